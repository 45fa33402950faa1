"""Gaussian special functions and the closed-form integrals built on them.

Everything here accepts scalars or numpy arrays and broadcasts. Tail
probabilities go through ``erfc``/``erfcx`` so that relative accuracy is kept
far into both tails; mixture weights are handled as log-weights and turned
into probabilities with :func:`normalize_log_weights`.
"""

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DomainError

SQRT2 = np.sqrt(2.0)
SQRT2PI = np.sqrt(2.0 * np.pi)
LOG_SQRT2PI = 0.5 * np.log(2.0 * np.pi)

__all__ = [
    "GaussParams",
    "std_normal_pdf",
    "std_normal_cdf",
    "log_std_normal_cdf",
    "log_normal_pdf",
    "mills_ratio",
    "normalize_log_weights",
    "probit_gauss_moments",
    "trunc_gauss_moments",
    "trunc_gauss_stats",
    "gauss_product",
]


def _finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise DomainError("non-finite input")


def _positive(name, a):
    if np.any(np.asarray(a) <= 0) or np.any(np.isnan(a)):
        raise DomainError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class GaussParams:
    mean: float
    variance: float

    def __post_init__(self):
        if not (np.isfinite(self.mean) and np.isfinite(self.variance)):
            raise DomainError("Gaussian parameters must be finite")
        if self.variance <= 0:
            raise DomainError("variance must be strictly positive")


def std_normal_pdf(x):
    x = np.asarray(x, dtype=float)
    _finite(x)
    return np.exp(-0.5 * x * x) / SQRT2PI


def std_normal_cdf(x):
    """Phi(x) evaluated as erfc(-x/sqrt(2))/2, accurate in both tails."""
    x = np.asarray(x, dtype=float)
    _finite(x)
    return 0.5 * special.erfc(-x / SQRT2)


def log_std_normal_cdf(x):
    x = np.asarray(x, dtype=float)
    return special.log_ndtr(x)


def log_normal_pdf(x, mean, var):
    """log N(x; mean, var)."""
    d = np.asarray(x, dtype=float) - mean
    return -0.5 * d * d / var - 0.5 * np.log(var) - LOG_SQRT2PI


def mills_ratio(a):
    """phi(a) / Phi(a), computed through erfcx so it stays finite for a << 0."""
    a = np.asarray(a, dtype=float)
    return np.sqrt(2.0 / np.pi) / special.erfcx(-a / SQRT2)


def normalize_log_weights(*log_weights):
    """Max-shifted exponentiation of a set of log-weights.

    Returns ``(log_total, probs)`` where ``probs`` is a list of arrays summing
    to one elementwise. Entries equal to ``-inf`` get probability zero.
    """
    stacked = np.stack(np.broadcast_arrays(*[np.asarray(w, dtype=float) for w in log_weights]))
    shift = np.max(stacked, axis=0)
    safe = np.where(np.isfinite(shift), shift, 0.0)
    e = np.exp(stacked - safe)
    total = np.sum(e, axis=0)
    with np.errstate(divide="ignore"):
        log_total = np.log(total) + safe
    probs = e / np.where(total > 0, total, 1.0)
    return log_total, list(probs)


def probit_gauss_moments(v, p_hat, tau_p):
    """Integrals of z**q * Phi(z/sqrt(v)) against N(z; p_hat, tau_p), q = 0, 1, 2.

    ``v = 0`` is allowed; Phi(z/sqrt(v)) then becomes the step 1{z > 0} and the
    same expressions give the moments of the truncated Gaussian.
    """
    v = np.asarray(v, dtype=float)
    p_hat = np.asarray(p_hat, dtype=float)
    tau_p = np.asarray(tau_p, dtype=float)
    _finite(v, p_hat, tau_p)
    _positive("tau_p", tau_p)
    if np.any(v < 0):
        raise DomainError("noise variance must be non-negative")
    s = np.sqrt(v + tau_p)
    a = p_hat / s
    phi_a = std_normal_pdf(a)
    pi0 = std_normal_cdf(a)
    pi1 = p_hat * pi0 + tau_p * phi_a / s
    pi2 = tau_p * pi0 + p_hat * pi1 + tau_p * p_hat * v * phi_a / s**3
    return pi0, pi1, pi2


def trunc_gauss_moments(upper, m, tau):
    """I_q = integral of x**q N(x; m, tau) over (-inf, upper], q = 0, 1, 2."""
    upper = np.asarray(upper, dtype=float)
    m = np.asarray(m, dtype=float)
    tau = np.asarray(tau, dtype=float)
    _finite(upper, m, tau)
    _positive("tau", tau)
    sd = np.sqrt(tau)
    b = (upper - m) / sd
    phi_b = std_normal_pdf(b)
    i0 = std_normal_cdf(b)
    i1 = m * i0 - sd * phi_b
    i2 = m * i1 + tau * i0 - upper * sd * phi_b
    return i0, i1, i2


def trunc_gauss_stats(bound, m, tau, side="below"):
    """Log-mass, mean and variance of N(m, tau) restricted to one side of ``bound``.

    ``side="below"`` keeps (-inf, bound], ``side="above"`` keeps [bound, inf).
    This is the normalized counterpart of :func:`trunc_gauss_moments`
    (mean = I1/I0, variance = I2/I0 - mean**2) without forming I0 explicitly,
    so it stays usable when I0 underflows.
    """
    m = np.asarray(m, dtype=float)
    tau = np.asarray(tau, dtype=float)
    sd = np.sqrt(tau)
    b = (np.asarray(bound, dtype=float) - m) / sd
    if side == "above":
        b = -b
    elif side != "below":
        raise ValueError(f"unknown side {side!r}")
    r = mills_ratio(b)
    shrink = np.clip(r * (b + r), 0.0, 1.0)
    mean = m - sd * r if side == "below" else m + sd * r
    return special.log_ndtr(b), mean, tau * (1.0 - shrink)


def gauss_product(a: GaussParams, b: GaussParams):
    """N(x; a) N(x; b) = scale * N(x; prod)."""
    vs = a.variance + b.variance
    var = a.variance * b.variance / vs
    mean = (a.mean * b.variance + b.mean * a.variance) / vs
    log_scale = log_normal_pdf(0.0, a.mean - b.mean, vs)
    return float(np.exp(log_scale)), GaussParams(float(mean), float(var))
