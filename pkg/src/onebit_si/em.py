"""EM re-estimation of the side-information noise parameter.

The E-step uses the GAMP marginal posteriors p(x_n | r_hat_n, tau_r_n, x_tilde_n)
evaluated at the current parameter; each M-step has a closed form.
"""

from dataclasses import dataclass

import numpy as np

from .priors import (
    AmplitudeGaussian,
    AmplitudeLaplacian,
    SignalPrior,
    Support,
    gaussian_si_denoise,
    laplacian_posterior,
)

__all__ = [
    "EmInputs",
    "update_vs_laplacian",
    "update_vs_gaussian",
    "update_beta",
    "em_update",
    "VS_BOUNDS",
    "BETA_BOUNDS",
]

VS_BOUNDS = (1e-8, 1e8)
BETA_BOUNDS = (0.5 + 1e-9, 1.0)


@dataclass
class EmInputs:
    r_hat: np.ndarray
    tau_r: np.ndarray
    active_prob: np.ndarray
    prior: SignalPrior
    si: object
    current_param: float = None

    def __post_init__(self):
        self.r_hat = np.atleast_1d(np.asarray(self.r_hat, dtype=float))
        self.tau_r = np.broadcast_to(np.asarray(self.tau_r, dtype=float), self.r_hat.shape)
        if self.active_prob is not None:
            self.active_prob = np.broadcast_to(
                np.asarray(self.active_prob, dtype=float), self.r_hat.shape
            )
        if self.current_param is None and self.si is not None:
            self.current_param = self.si.param

    def side_info(self):
        # the posterior is taken at current_param, which may differ from si's own
        if self.current_param is None or self.current_param == self.si.param:
            return self.si
        return self.si.with_param(self.current_param)


def _require(inp, kind):
    if not isinstance(inp.si, kind):
        raise TypeError(
            f"{kind.__name__} side information required, got {type(inp.si).__name__}"
        )


def expected_abs_deviation(inp: EmInputs):
    """E|x_n - x_tilde_n| under the Laplacian-SI posterior, per element."""
    _require(inp, AmplitudeLaplacian)
    si = inp.side_info()
    post = laplacian_posterior(inp.r_hat, inp.tau_r, inp.prior, si)
    w0, w_lo, w_hi = post.weights
    m_lo, m_hi = post.means
    x_t = si.x_tilde
    # below-x_tilde piece contributes x_tilde - x, above piece x - x_tilde,
    # the spike |x_tilde|
    return w_lo * (x_t - m_lo) + w_hi * (m_hi - x_t) + w0 * np.abs(x_t)


def update_vs_laplacian(inp: EmInputs):
    dev = expected_abs_deviation(inp)
    return float(np.clip(np.sum(dev) / (2.0 * dev.size), *VS_BOUNDS))


def expected_sq_deviation(inp: EmInputs):
    """E[(x_n - x_tilde_n)^2] under the Gaussian-SI posterior, per element."""
    _require(inp, AmplitudeGaussian)
    si = inp.side_info()
    out = gaussian_si_denoise(inp.r_hat, inp.tau_r, inp.prior, si)
    # E[x^2] - 2 x_tilde E[x] + x_tilde^2 = var + (mean - x_tilde)^2
    return out.variance + (out.mean - si.x_tilde) ** 2


def update_vs_gaussian(inp: EmInputs):
    dev = expected_sq_deviation(inp)
    return float(np.clip(np.mean(dev), *VS_BOUNDS))


def update_beta(inp: EmInputs):
    _require(inp, Support)
    if inp.active_prob is None:
        raise ValueError("update_beta needs posterior active probabilities")
    labels = inp.si.x_tilde
    pi = inp.active_prob
    agree = np.where(labels > 0, pi, 1.0 - pi)
    return float(np.clip(np.mean(agree), *BETA_BOUNDS))


def em_update(inp: EmInputs):
    """One M-step for whichever parameter ``inp.si`` carries."""
    if isinstance(inp.si, AmplitudeLaplacian):
        return update_vs_laplacian(inp)
    if isinstance(inp.si, AmplitudeGaussian):
        return update_vs_gaussian(inp)
    if isinstance(inp.si, Support):
        return update_beta(inp)
    raise TypeError(f"no EM update for {type(inp.si).__name__}")
