"""Output channel: AWGN, sign quantization, then a random sign flip.

p(y | z) = gamma * A + (1 - gamma) * (1 - A), with A = Phi(y z / sqrt(v)).
"""

from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import DimensionError, DomainError
from .gauss_special import (
    mills_ratio,
    normalize_log_weights,
    probit_gauss_moments,
    std_normal_cdf,
)

__all__ = ["ChannelParams", "likelihood", "posterior_z_moments", "f_update"]


@dataclass(frozen=True)
class ChannelParams:
    """Pre-quantization noise variance ``v`` and sign-keep probability ``gamma``."""

    v: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.v) and self.v >= 0):
            raise DomainError(f"noise variance must be finite and >= 0, got {self.v}")
        if not (0.5 < self.gamma <= 1.0):
            raise DomainError(f"gamma must lie in (0.5, 1], got {self.gamma}")


def _check_labels(y):
    y = np.asarray(y)
    if not np.all((y == 1) | (y == -1)):
        raise DomainError("measurements must be +1 or -1")
    return y.astype(float)


def _sign_prob(y, z, v):
    # P(sign(z + n) == y) for n ~ N(0, v); v == 0 uses the quantizer's step
    # (sign(0) = -1).
    if v == 0:
        return np.where(y > 0, z > 0, z <= 0).astype(float)
    return std_normal_cdf(y * z / np.sqrt(v))


def likelihood(y, z, ch: ChannelParams):
    y = _check_labels(y)
    z = np.asarray(z, dtype=float)
    a = _sign_prob(y, z, ch.v)
    return ch.gamma * a + (1.0 - ch.gamma) * (1.0 - a)


def posterior_z_moments(y, p_hat, tau_p, ch: ChannelParams):
    """Normalizer Z^p, E[z|y] and E[z^2|y] for z ~ N(p_hat, tau_p) under the channel.

    With gamma = 1 and |p_hat| far on the wrong side, Z^p may underflow to 0
    while the returned moments saturate at their truncated-Gaussian limit.
    """
    log_z, mean, var = _posterior_z(y, p_hat, tau_p, ch)
    return np.exp(log_z), mean, var + mean * mean


def _posterior_z(y, p_hat, tau_p, ch):
    """Log normalizer, mean and variance of the channel posterior on z.

    The posterior is a two-component mixture: the sign was kept (weight
    gamma * PI0-type mass) or flipped. Each component is the Gaussian tilted by
    Phi(+-z/sqrt(v)), whose mean and variance follow from the PI integrals
    divided by their zeroth moment. Working with those ratios through the Mills
    ratio keeps the result finite when Z^p itself underflows.
    """
    y = _check_labels(y)
    p_hat = np.asarray(p_hat, dtype=float)
    tau_p = np.asarray(tau_p, dtype=float)
    if np.any(tau_p <= 0) or np.any(np.isnan(tau_p)):
        raise DomainError("tau_p must be strictly positive")
    s = np.sqrt(ch.v + tau_p)
    a = y * p_hat / s
    gain = tau_p / s

    # component kept: tilt by Phi(y z / sqrt(v)); flipped: by Phi(-y z / sqrt(v))
    r_keep = mills_ratio(a)
    r_flip = mills_ratio(-a)
    mean_keep = p_hat + y * gain * r_keep
    mean_flip = p_hat - y * gain * r_flip
    shrink = gain * gain
    var_keep = tau_p - shrink * np.clip(r_keep * (a + r_keep), 0.0, 1.0)
    var_flip = tau_p - shrink * np.clip(r_flip * (r_flip - a), 0.0, 1.0)

    with np.errstate(divide="ignore"):
        lw_keep = np.log(ch.gamma) + special.log_ndtr(a)
        lw_flip = np.log1p(-ch.gamma) + special.log_ndtr(-a)
    log_z, (w_keep, w_flip) = normalize_log_weights(lw_keep, lw_flip)

    mean = w_keep * mean_keep + w_flip * mean_flip
    var = (
        w_keep * var_keep
        + w_flip * var_flip
        + w_keep * w_flip * (mean_keep - mean_flip) ** 2
    )
    # a kept/flipped mixture can be wider than the prior, so var is not capped at tau_p
    return log_z, mean, var


def posterior_z_moments_direct(y, p_hat, tau_p, ch: ChannelParams):
    """Same quantities assembled literally from PI0, PI1, PI2.

    Loses accuracy once Z^p is tiny; kept as a cross-check for the stable path.
    """
    y = _check_labels(y)
    pi0, pi1, pi2 = probit_gauss_moments(ch.v, p_hat, tau_p)
    g = ch.gamma
    full1 = p_hat
    full2 = p_hat**2 + tau_p
    pos = y > 0
    z = np.where(pos, g * pi0 + (1 - g) * (1 - pi0), g * (1 - pi0) + (1 - g) * pi0)
    m1 = np.where(pos, g * pi1 + (1 - g) * (full1 - pi1), g * (full1 - pi1) + (1 - g) * pi1)
    m2 = np.where(pos, g * pi2 + (1 - g) * (full2 - pi2), g * (full2 - pi2) + (1 - g) * pi2)
    return z, m1 / z, m2 / z


def f_update(y, p_hat, tau_p, ch: ChannelParams, tau_floor=1e-12):
    """Scaled residual s_hat and its precision tau_s, elementwise."""
    y = np.asarray(y)
    p_hat = np.asarray(p_hat, dtype=float)
    tau_p = np.asarray(tau_p, dtype=float)
    if not (y.shape == p_hat.shape == tau_p.shape):
        raise DimensionError(
            f"shape mismatch: y{y.shape}, p_hat{p_hat.shape}, tau_p{tau_p.shape}"
        )
    _, mean, var = _posterior_z(y, p_hat, tau_p, ch)
    s_hat = (mean - p_hat) / tau_p
    tau_s = (1.0 - var / tau_p) / tau_p
    return s_hat, np.maximum(tau_s, tau_floor)
