"""Sum-product GAMP for noisy one-bit measurements, with and without side information.

``run_noisy1bg`` is the plain engine with the Bernoulli-Gaussian denoiser.
``run_with_si`` swaps in a side-information denoiser and wraps the inner
loop in an outer EM loop that re-estimates the SI noise parameter.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channel import ChannelParams, f_update
from .em import BETA_BOUNDS, VS_BOUNDS, EmInputs, em_update
from .errors import DimensionError, DomainError, GampDivergenceError
from .priors import NoSI, SignalPrior, Support, denoise
from .sim import nmse

__all__ = [
    "GampConfig",
    "GampState",
    "GampResult",
    "linear_measurement_step",
    "linear_estimation_step",
    "run_noisy1bg",
    "run_with_si",
]


@dataclass(frozen=True)
class GampConfig:
    max_inner_iters: int = 30
    max_outer_iters: int = 10
    damping: float = 1.0
    tau_floor: float = 1e-12
    convergence_tol: float = 1e-6
    em_enabled: bool = True
    warm_start: bool = True
    em_tol: float = 1e-4  # relative parameter change that ends the outer loop

    def __post_init__(self):
        if self.max_inner_iters < 1 or self.max_outer_iters < 1:
            raise DomainError("iteration counts must be >= 1")
        if not (0.0 < self.damping <= 1.0):
            raise DomainError(f"damping must lie in (0, 1], got {self.damping}")
        if self.tau_floor <= 0:
            raise DomainError("tau_floor must be positive")


@dataclass
class GampState:
    x_hat: np.ndarray
    tau_x: np.ndarray
    s_hat: np.ndarray
    tau_s: np.ndarray
    p_hat: np.ndarray
    tau_p: np.ndarray
    r_hat: np.ndarray
    tau_r: np.ndarray
    active_prob: np.ndarray
    iteration: int = 0

    @classmethod
    def initial(cls, M, N, prior: SignalPrior):
        return cls(
            x_hat=np.full(N, prior.mean),
            tau_x=np.full(N, prior.variance),
            s_hat=np.zeros(M),
            tau_s=np.zeros(M),
            p_hat=np.zeros(M),
            tau_p=np.ones(M),
            r_hat=np.zeros(N),
            tau_r=np.ones(N),
            active_prob=np.full(N, prior.lam),
        )


@dataclass
class GampResult:
    x_hat: np.ndarray
    tau_x: np.ndarray
    active_prob: np.ndarray
    estimated_param: Optional[float] = None
    inner_iterations_used: int = 0
    outer_iterations_used: int = 0
    trajectory: Optional[list] = None
    param_history: list = field(default_factory=list)
    warnings: list = field(default_factory=list)


def _check_dims(A, vec, axis, name):
    if vec.shape != (A.shape[axis],):
        raise DimensionError(f"{name} has shape {vec.shape}, A is {A.shape}")


def linear_measurement_step(A, state: GampState, tau_floor=1e-12, A2=None):
    """tau_p = (A*A) tau_x and the Onsager-corrected p_hat = A x_hat - tau_p * s_hat."""
    A = np.asarray(A, dtype=float)
    _check_dims(A, state.x_hat, 1, "x_hat")
    _check_dims(A, state.s_hat, 0, "s_hat")
    A2 = A * A if A2 is None else A2
    tau_p = np.maximum(A2 @ state.tau_x, tau_floor)
    p_hat = A @ state.x_hat - tau_p * state.s_hat
    return p_hat, tau_p


def linear_estimation_step(A, state: GampState, tau_floor=1e-12, A2=None):
    """tau_r = 1 / ((A*A)^T tau_s) and r_hat = x_hat + tau_r * A^T s_hat."""
    A = np.asarray(A, dtype=float)
    _check_dims(A, state.x_hat, 1, "x_hat")
    _check_dims(A, state.s_hat, 0, "s_hat")
    A2 = A * A if A2 is None else A2
    prec = A2.T @ state.tau_s
    with np.errstate(divide="ignore"):
        tau_r = np.clip(1.0 / prec, tau_floor, 1.0 / tau_floor)
    r_hat = state.x_hat + tau_r * (A.T @ state.s_hat)
    return r_hat, tau_r


def _validate_inputs(A, y):
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    if A.ndim != 2:
        raise DimensionError("A must be a matrix")
    if y.shape != (A.shape[0],):
        raise DimensionError(f"y has shape {y.shape}, A is {A.shape}")
    if not np.all((y == 1) | (y == -1)):
        raise DomainError("measurements must be +1 or -1")
    return A, y


def _inner_loop(A, A2, y, prior, ch, si, cfg, state, x_true, trajectory):
    d = cfg.damping
    used = 0
    for t in range(cfg.max_inner_iters):
        state.p_hat, state.tau_p = linear_measurement_step(A, state, cfg.tau_floor, A2)
        s_new, state.tau_s = f_update(y, state.p_hat, state.tau_p, ch, cfg.tau_floor)
        state.s_hat = s_new if d == 1.0 else d * s_new + (1 - d) * state.s_hat
        state.r_hat, state.tau_r = linear_estimation_step(A, state, cfg.tau_floor, A2)
        out = denoise(state.r_hat, state.tau_r, prior, si)
        x_new = out.mean if d == 1.0 else d * out.mean + (1 - d) * state.x_hat
        state.iteration += 1
        used += 1
        if not (np.all(np.isfinite(x_new)) and np.all(np.isfinite(out.variance))):
            raise GampDivergenceError(
                f"non-finite estimate at iteration {state.iteration}",
                iteration=state.iteration,
            )
        delta = np.linalg.norm(x_new - state.x_hat)
        scale = np.linalg.norm(x_new)
        state.x_hat = x_new
        state.tau_x = np.maximum(out.variance, cfg.tau_floor)
        state.active_prob = out.active_prob
        if trajectory is not None:
            trajectory.append(nmse(x_true, x_new) if np.any(x_new) else float("nan"))
        if delta <= cfg.convergence_tol * scale:
            break
    return used


def _empty_result(N, prior, x_true):
    st = GampState.initial(0, N, prior)
    return GampResult(
        x_hat=st.x_hat, tau_x=st.tau_x, active_prob=st.active_prob,
        trajectory=[] if x_true is not None else None,
    )


def run_noisy1bg(A, y, prior: SignalPrior, ch: ChannelParams, cfg=None, x_true=None):
    """Reconstruct x from one-bit measurements y = sign-flip(sign(A x + n))."""
    cfg = cfg or GampConfig()
    A, y = _validate_inputs(A, y)
    M, N = A.shape
    if M == 0:
        return _empty_result(N, prior, x_true)
    state = GampState.initial(M, N, prior)
    trajectory = [] if x_true is not None else None
    used = _inner_loop(A, A * A, y, prior, ch, NoSI(), cfg, state, x_true, trajectory)
    return GampResult(
        x_hat=state.x_hat,
        tau_x=state.tau_x,
        active_prob=state.active_prob,
        inner_iterations_used=used,
        outer_iterations_used=1,
        trajectory=trajectory,
    )


def run_with_si(A, y, prior: SignalPrior, ch: ChannelParams, si, cfg=None, x_true=None):
    """GAMP with a side-information denoiser and an outer EM loop on its parameter."""
    cfg = cfg or GampConfig()
    if si is None or isinstance(si, NoSI):
        raise TypeError("run_with_si needs side information; use run_noisy1bg")
    A, y = _validate_inputs(A, y)
    M, N = A.shape
    if si.x_tilde.shape != (N,):
        raise DimensionError(f"side information has shape {si.x_tilde.shape}, N={N}")
    if M == 0:
        return _empty_result(N, prior, x_true)

    A2 = A * A
    state = GampState.initial(M, N, prior)
    trajectory = [] if x_true is not None else None
    history = [si.param]
    notes = []
    bounds = BETA_BOUNDS if isinstance(si, Support) else VS_BOUNDS
    inner_total = outer = 0
    n_outer = cfg.max_outer_iters if cfg.em_enabled else 1
    for outer in range(1, n_outer + 1):
        if outer > 1 and not cfg.warm_start:
            state = GampState.initial(M, N, prior)
        inner_total += _inner_loop(A, A2, y, prior, ch, si, cfg, state, x_true, trajectory)
        if not cfg.em_enabled:
            break
        old = si.param
        new = em_update(EmInputs(state.r_hat, state.tau_r, state.active_prob, prior, si))
        if new in bounds:
            msg = f"EM estimate of {si.param_name} hit bound {new:g} at outer iteration {outer}"
            notes.append(msg)
        si = si.with_param(new)
        history.append(new)
        if abs(new - old) <= cfg.em_tol * abs(old):
            break

    return GampResult(
        x_hat=state.x_hat,
        tau_x=state.tau_x,
        active_prob=state.active_prob,
        estimated_param=si.param if cfg.em_enabled else None,
        inner_iterations_used=inner_total,
        outer_iterations_used=outer,
        trajectory=trajectory,
        param_history=history,
        warnings=notes,
    )
