"""Synthetic data: sparse signals, one-bit measurements and side information.

Randomness is organized per trial. ``trial_streams(seed, trial)`` derives four
independent generators (signal, matrix, measurement noise, side information)
from ``SeedSequence(seed, spawn_key=(trial,))``. The same trial index therefore
produces the same signal and matrix at every point of a parameter sweep, and
changing e.g. the SI noise variance only rescales the SI noise draws.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channel import ChannelParams
from .errors import DimensionError, DomainError
from .priors import AmplitudeGaussian, AmplitudeLaplacian, SignalPrior, Support

__all__ = [
    "NoneSI",
    "NoisyAmplitude",
    "NoisySupport",
    "SlowVarying",
    "ScenarioConfig",
    "SideInformation",
    "TrialData",
    "trial_streams",
    "gen_signal",
    "gen_matrix",
    "gen_measurements",
    "gen_side_info",
    "gen_sequence",
    "support_labels",
    "make_trial",
    "nmse",
]


@dataclass(frozen=True)
class NoneSI:
    kind = "none"


@dataclass(frozen=True)
class NoisyAmplitude:
    """Move a fraction of the support, then add i.i.d. noise to every entry.

    ``noise_kind="gaussian"`` draws N(0, add_noise_var). ``"laplacian"`` draws
    Laplacian noise in the same parameterization as the Laplacian-SI model,
    i.e. scale 2 * add_noise_var.
    """

    support_error_frac: float = 0.1
    add_noise_var: float = 0.15
    noise_kind: str = "gaussian"
    kind = "noisy_amplitude"

    def __post_init__(self):
        _frac(self.support_error_frac)
        if self.add_noise_var < 0:
            raise DomainError("add_noise_var must be >= 0")
        if self.noise_kind not in ("gaussian", "laplacian"):
            raise DomainError(f"unknown noise_kind {self.noise_kind!r}")


@dataclass(frozen=True)
class NoisySupport:
    flip_frac: float = 0.1
    kind = "noisy_support"

    def __post_init__(self):
        _frac(self.flip_frac)


@dataclass(frozen=True)
class SlowVarying:
    support_change_frac: float = 0.1
    amp_innovation_var: float = 0.1
    epochs: int = 10
    kind = "slow_varying"

    def __post_init__(self):
        _frac(self.support_change_frac)
        if self.amp_innovation_var < 0:
            raise DomainError("amp_innovation_var must be >= 0")
        if self.epochs < 1:
            raise DomainError("epochs must be >= 1")


def _frac(f):
    if not (0.0 <= f <= 1.0):
        raise DomainError(f"fraction must lie in [0, 1], got {f}")


@dataclass(frozen=True)
class ScenarioConfig:
    N: int = 200
    M: int = 600
    prior: SignalPrior = field(default_factory=SignalPrior)
    ch: ChannelParams = field(default_factory=lambda: ChannelParams(0.15, 0.85))
    si_protocol: object = field(default_factory=NoneSI)
    seed: int = 0

    def __post_init__(self):
        if self.N < 1 or self.M < 0:
            raise DomainError("need N >= 1 and M >= 0")


@dataclass
class SideInformation:
    """Generated side information, materialized per denoiser on demand.

    ``amplitude`` is the noisy signal copy (None for support-only protocols);
    ``labels`` are the +-1 support labels the support-SI denoiser consumes.
    """

    amplitude: Optional[np.ndarray]
    labels: np.ndarray

    def laplacian(self, v_s):
        return AmplitudeLaplacian(self.amplitude, v_s)

    def gaussian(self, v_s):
        return AmplitudeGaussian(self.amplitude, v_s)

    def support(self, beta):
        return Support(self.labels, beta)


@dataclass
class TrialData:
    x_true: np.ndarray
    A: np.ndarray
    y: np.ndarray
    si: Optional[SideInformation] = None
    epoch_sequence: Optional[list] = None  # [(x_true, y), ...] for slow-varying runs


def trial_streams(seed, trial):
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(trial,))
    return dict(zip(("signal", "matrix", "noise", "si"), (np.random.default_rng(s) for s in ss.spawn(4))))


def gen_signal(prior: SignalPrior, N, rng):
    active = rng.random(N) < prior.lam
    amp = rng.standard_normal(N) * math.sqrt(prior.v_x)
    return np.where(active, amp, 0.0)


def gen_matrix(M, N, rng):
    """i.i.d. N(0, 1) entries, no column normalization."""
    return rng.standard_normal((M, N))


def gen_measurements(x, A, ch: ChannelParams, rng):
    """y = eta * Q(A x + n); Q(t) = +1 if t > 0 else -1; eta = -1 w.p. 1 - gamma."""
    x = np.asarray(x, dtype=float)
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[1] != x.shape[0]:
        raise DimensionError(f"A has shape {A.shape}, x has {x.shape}")
    M = A.shape[0]
    noise = rng.standard_normal(M) * math.sqrt(ch.v)
    flips = rng.random(M) < 1.0 - ch.gamma
    q = np.where(A @ x + noise > 0, 1.0, -1.0)
    return np.where(flips, -q, q)


def support_labels(x):
    return np.where(np.asarray(x) != 0, 1.0, -1.0)


def _move_support(x, n_move, v_x, rng):
    # drop n_move active entries and activate n_move inactive ones with fresh amplitudes
    out = x.copy()
    active = np.flatnonzero(x != 0)
    inactive = np.flatnonzero(x == 0)
    n_move = min(n_move, active.size, inactive.size)
    drop = rng.choice(active, size=n_move, replace=False)
    add = rng.choice(inactive, size=n_move, replace=False)
    fresh = rng.standard_normal(n_move) * math.sqrt(v_x)
    out[drop] = 0.0
    out[add] = fresh
    return out


def gen_side_info(x, protocol, rng, prior: SignalPrior = None):
    prior = prior or SignalPrior()
    x = np.asarray(x, dtype=float)
    N = x.size
    if isinstance(protocol, NoisyAmplitude):
        K = int(np.count_nonzero(x))
        moved = _move_support(x, int(round(protocol.support_error_frac * K)), prior.v_x, rng)
        if protocol.noise_kind == "gaussian":
            noise = rng.standard_normal(N) * math.sqrt(protocol.add_noise_var)
        else:
            noise = rng.laplace(0.0, 1.0, N) * (2.0 * protocol.add_noise_var)
        return SideInformation(moved + noise, support_labels(moved))
    if isinstance(protocol, NoisySupport):
        labels = support_labels(x)
        flip = rng.random(N) < protocol.flip_frac
        return SideInformation(None, np.where(flip, -labels, labels))
    if isinstance(protocol, SlowVarying):
        raise TypeError("slow-varying side information comes from previous estimates; use gen_sequence")
    raise TypeError(f"protocol {type(protocol).__name__} generates no side information")


def gen_sequence(x0, protocol: SlowVarying, rng, prior: SignalPrior):
    """Signal sequence whose support turns over by ``support_change_frac`` per epoch.

    Consecutive supports share exactly ceil((1 - frac) * K) indices, K being
    the current support size (which stays constant).
    """
    xs = [np.asarray(x0, dtype=float).copy()]
    for _ in range(protocol.epochs - 1):
        prev = xs[-1]
        K = int(np.count_nonzero(prev))
        keep = math.ceil((1.0 - protocol.support_change_frac) * K - 1e-9)
        nxt = _move_support(prev, K - keep, prior.v_x, rng)
        persistent = (prev != 0) & (nxt != 0)
        nxt[persistent] += rng.standard_normal(int(persistent.sum())) * math.sqrt(
            protocol.amp_innovation_var
        )
        xs.append(nxt)
    return xs


def make_trial(sc: ScenarioConfig, trial, seed=None):
    """Materialize one trial of a scenario from its own random streams."""
    streams = trial_streams(sc.seed if seed is None else seed, trial)
    x = gen_signal(sc.prior, sc.N, streams["signal"])
    A = gen_matrix(sc.M, sc.N, streams["matrix"])
    proto = sc.si_protocol
    if isinstance(proto, SlowVarying):
        xs = gen_sequence(x, proto, streams["si"], sc.prior)
        seq = [(xt, gen_measurements(xt, A, sc.ch, streams["noise"])) for xt in xs]
        return TrialData(xs[0], A, seq[0][1], None, seq)
    y = gen_measurements(x, A, sc.ch, streams["noise"])
    si = None
    if not isinstance(proto, NoneSI):
        si = gen_side_info(x, proto, streams["si"], sc.prior)
    return TrialData(x, A, y, si)


def nmse(x_true, x_hat, return_flag=False):
    """|| x/||x|| - x_hat/||x_hat|| ||_2.

    An all-zero estimate is scored 1 (its normalized form is taken as the zero
    vector); ``return_flag=True`` also returns whether that happened.
    """
    x = np.asarray(x_true, dtype=float).ravel()
    xh = np.asarray(x_hat, dtype=float).ravel()
    if x.shape != xh.shape:
        raise DimensionError(f"length mismatch: {x.shape} vs {xh.shape}")
    nx = np.linalg.norm(x)
    if nx == 0:
        raise DomainError("NMSE is undefined for an all-zero true signal")
    nh = np.linalg.norm(xh)
    degenerate = nh == 0
    val = 1.0 if degenerate else float(np.linalg.norm(x / nx - xh / nh))
    return (val, degenerate) if return_flag else val
