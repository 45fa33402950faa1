"""Input denoisers: posterior mean/variance of x given r_hat ~ N(x, tau_r).

The signal prior is Bernoulli-Gaussian, optionally multiplied by a
side-information factor p(x_tilde | x). Every posterior here is a mixture of
a spike at zero and one or two Gaussian pieces, so each denoiser builds
per-component log-weights, normalizes them with
:func:`~onebit_si.gauss_special.normalize_log_weights`, and combines the
component means and variances.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionError, DomainError, NumericalDegeneracyError
from .gauss_special import log_normal_pdf, normalize_log_weights, trunc_gauss_stats

__all__ = [
    "SignalPrior",
    "NoSI",
    "AmplitudeLaplacian",
    "AmplitudeGaussian",
    "Support",
    "DenoiserOutput",
    "bg_denoise",
    "laplacian_si_denoise",
    "gaussian_si_denoise",
    "support_si_denoise",
    "denoise",
]


@dataclass(frozen=True)
class SignalPrior:
    """(1 - lam) delta(x) + lam N(x; 0, v_x)."""

    lam: float = 0.1
    v_x: float = 5.5

    def __post_init__(self):
        if not (0.0 < self.lam <= 1.0):
            raise DomainError(f"lam must lie in (0, 1], got {self.lam}")
        if not (self.v_x > 0 and np.isfinite(self.v_x)):
            raise DomainError(f"v_x must be positive, got {self.v_x}")

    @property
    def mean(self):
        return 0.0

    @property
    def variance(self):
        return self.lam * self.v_x


def _vector(a):
    return np.atleast_1d(np.asarray(a, dtype=float))


@dataclass(frozen=True)
class NoSI:
    param_name = None


@dataclass(frozen=True)
class AmplitudeLaplacian:
    """x_tilde = x + w with w Laplacian of scale 2 v_s: density exp(-|w|/(2 v_s)) / (4 v_s)."""

    x_tilde: np.ndarray = field(repr=False)
    v_s: float = 1.0
    param_name = "v_s"

    def __post_init__(self):
        object.__setattr__(self, "x_tilde", _vector(self.x_tilde))
        if not (self.v_s > 0 and np.isfinite(self.v_s)):
            raise DomainError(f"v_s must be positive, got {self.v_s}")

    @property
    def param(self):
        return self.v_s

    def with_param(self, value):
        return replace(self, v_s=value)


@dataclass(frozen=True)
class AmplitudeGaussian:
    """x_tilde = x + w with w ~ N(0, v_s)."""

    x_tilde: np.ndarray = field(repr=False)
    v_s: float = 1.0
    param_name = "v_s"

    def __post_init__(self):
        object.__setattr__(self, "x_tilde", _vector(self.x_tilde))
        if not (self.v_s > 0 and np.isfinite(self.v_s)):
            raise DomainError(f"v_s must be positive, got {self.v_s}")

    @property
    def param(self):
        return self.v_s

    def with_param(self, value):
        return replace(self, v_s=value)


@dataclass(frozen=True)
class Support:
    """Noisy support labels: x_tilde = zeta * s, P(zeta = +1) = beta, s = +1 iff x != 0."""

    x_tilde: np.ndarray = field(repr=False)
    beta: float = 0.9
    param_name = "beta"

    def __post_init__(self):
        labels = _vector(self.x_tilde)
        if not np.all((labels == 1) | (labels == -1)):
            raise DomainError("support labels must be exactly +1 or -1")
        object.__setattr__(self, "x_tilde", labels)
        if not (0.5 < self.beta <= 1.0):
            raise DomainError(f"beta must lie in (0.5, 1], got {self.beta}")

    @property
    def param(self):
        return self.beta

    def with_param(self, value):
        return replace(self, beta=value)


@dataclass
class DenoiserOutput:
    mean: np.ndarray
    variance: np.ndarray
    active_prob: np.ndarray


def _check(r_hat, tau_r, x_tilde=None):
    r_hat = _vector(r_hat)
    tau_r = np.broadcast_to(_vector(tau_r), r_hat.shape)
    if np.any(~(tau_r > 0)):
        raise DomainError("tau_r must be strictly positive")
    if x_tilde is not None and x_tilde.shape != r_hat.shape:
        raise DimensionError(
            f"side information has shape {x_tilde.shape}, expected {r_hat.shape}"
        )
    return r_hat, tau_r


def _slab_gaussian(r_hat, tau_r, prior):
    # N(x; r_hat, tau_r) N(x; 0, v_x) = N(r_hat; 0, v_x + tau_r) N(x; m_g, v_g)
    denom = prior.v_x + tau_r
    m_g = prior.v_x * r_hat / denom
    v_g = prior.v_x * tau_r / denom
    return m_g, v_g, log_normal_pdf(r_hat, 0.0, denom)


def _two_point(log_slab, log_spike, m, v):
    # posterior (1 - pi) delta + pi N(m, v)
    _, (pi, _) = normalize_log_weights(log_slab, log_spike)
    mean = pi * m
    var = pi * v + pi * (1.0 - pi) * m * m
    return DenoiserOutput(mean, var, pi)


def _log(p):
    with np.errstate(divide="ignore"):
        return np.log(p)


def bg_denoise(r_hat, tau_r, prior: SignalPrior):
    r_hat, tau_r = _check(r_hat, tau_r)
    m_g, v_g, log_ev = _slab_gaussian(r_hat, tau_r, prior)
    log_slab = _log(prior.lam) + log_ev
    log_spike = _log(1.0 - prior.lam) + log_normal_pdf(0.0, r_hat, tau_r)
    return _two_point(log_slab, log_spike, m_g, v_g)


def gaussian_si_denoise(r_hat, tau_r, prior: SignalPrior, si: AmplitudeGaussian):
    """Bernoulli-Gaussian prior times N(x_tilde; x, v_s)."""
    x_t = si.x_tilde
    r_hat, tau_r = _check(r_hat, tau_r, x_t)
    v_s = si.v_s
    m_bg, v_bg, log_ev = _slab_gaussian(r_hat, tau_r, prior)
    d = prior.v_x * tau_r + tau_r * v_s + v_s * prior.v_x
    m = (r_hat * v_s * prior.v_x + prior.v_x * tau_r * x_t) / d
    v = v_s * tau_r * prior.v_x / d
    log_slab = _log(prior.lam) + log_ev + log_normal_pdf(x_t, m_bg, v_bg + v_s)
    log_spike = (
        _log(1.0 - prior.lam)
        + log_normal_pdf(0.0, r_hat, tau_r)
        + log_normal_pdf(0.0, x_t, v_s)
    )
    return _two_point(log_slab, log_spike, m, v)


def support_si_denoise(r_hat, tau_r, prior: SignalPrior, si: Support):
    x_t = si.x_tilde
    r_hat, tau_r = _check(r_hat, tau_r, x_t)
    m_g, v_g, log_ev = _slab_gaussian(r_hat, tau_r, prior)
    agree, disagree = _log(si.beta), _log(1.0 - si.beta)
    log_slab = _log(prior.lam) + np.where(x_t > 0, agree, disagree) + log_ev
    log_spike = (
        _log(1.0 - prior.lam)
        + np.where(x_t < 0, agree, disagree)
        + log_normal_pdf(0.0, r_hat, tau_r)
    )
    return _two_point(log_slab, log_spike, m_g, v_g)


@dataclass
class LaplacianPosterior:
    """Three-piece decomposition of the Laplacian-SI posterior.

    ``weights`` are the normalized masses of (spike at 0, slab below x_tilde,
    slab above x_tilde); ``means``/``variances`` describe the two slab pieces,
    which are Gaussians N(m_g +- v_g/(2 v_s), v_g) truncated at x_tilde.
    """

    log_z: np.ndarray
    weights: tuple
    means: tuple
    variances: tuple


def laplacian_posterior(r_hat, tau_r, prior: SignalPrior, si: AmplitudeLaplacian):
    x_t = si.x_tilde
    r_hat, tau_r = _check(r_hat, tau_r, x_t)
    v_s = si.v_s
    b = 2.0 * v_s
    m_g, v_g, log_ev = _slab_gaussian(r_hat, tau_r, prior)
    shift = v_g / b
    m_lo, m_hi = m_g + shift, m_g - shift
    # log C1 and log C2
    log_c1 = -np.log(4.0 * v_s) - (x_t - m_g - 0.5 * shift) / b
    log_c2 = -np.log(4.0 * v_s) - (-x_t + m_g - 0.5 * shift) / b
    log_i0_lo, mean_lo, var_lo = trunc_gauss_stats(x_t, m_lo, v_g, side="below")
    log_i0_hi, mean_hi, var_hi = trunc_gauss_stats(x_t, m_hi, v_g, side="above")

    log_lam = _log(prior.lam)
    log_spike = (
        _log(1.0 - prior.lam)
        + log_normal_pdf(0.0, r_hat, tau_r)
        - np.log(4.0 * v_s)
        - np.abs(x_t) / b
    )
    log_lo = log_lam + log_ev + log_c1 + log_i0_lo
    log_hi = log_lam + log_ev + log_c2 + log_i0_hi
    log_z, (w0, w_lo, w_hi) = normalize_log_weights(log_spike, log_lo, log_hi)
    bad = ~np.isfinite(log_z)
    if np.any(bad):
        idx = int(np.flatnonzero(bad)[0])
        raise NumericalDegeneracyError(
            f"Laplacian-SI normalizer vanished at element {idx}", index=idx
        )
    return LaplacianPosterior(log_z, (w0, w_lo, w_hi), (mean_lo, mean_hi), (var_lo, var_hi))


def laplacian_si_denoise(r_hat, tau_r, prior: SignalPrior, si: AmplitudeLaplacian):
    post = laplacian_posterior(r_hat, tau_r, prior, si)
    w0, w_lo, w_hi = post.weights
    m_lo, m_hi = post.means
    v_lo, v_hi = post.variances
    mean = w_lo * m_lo + w_hi * m_hi
    # E[x^2] - E[x]^2 of the spike/lo/hi mixture, as a sum of nonnegative terms
    var = (
        w_lo * v_lo
        + w_hi * v_hi
        + w0 * w_lo * m_lo**2
        + w0 * w_hi * m_hi**2
        + w_lo * w_hi * (m_lo - m_hi) ** 2
    )
    # the two slab weights can round to just above 1 when the spike is negligible
    return DenoiserOutput(mean, var, np.minimum(w_lo + w_hi, 1.0))


def denoise(r_hat, tau_r, prior: SignalPrior, si=None):
    """Dispatch to the denoiser matching the side-information variant."""
    if si is None or isinstance(si, NoSI):
        return bg_denoise(r_hat, tau_r, prior)
    if isinstance(si, AmplitudeLaplacian):
        return laplacian_si_denoise(r_hat, tau_r, prior, si)
    if isinstance(si, AmplitudeGaussian):
        return gaussian_si_denoise(r_hat, tau_r, prior, si)
    if isinstance(si, Support):
        return support_si_denoise(r_hat, tau_r, prior, si)
    raise TypeError(f"unsupported side information {type(si).__name__}")
