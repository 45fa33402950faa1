"""Randomized closed-form versus quadrature comparisons.

Each check draws parameter sets from a seeded generator, evaluates the closed
form and the quadrature oracle, and records the worst relative error.

Relative error is measured against the natural magnitude of each quantity:
a normalizer or second moment against itself, a first moment against
sqrt(second moment), since a first moment may sit arbitrarily close to zero
while the distribution it belongs to does not.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from ..channel import ChannelParams, posterior_z_moments
from ..em import EmInputs, expected_abs_deviation
from ..gauss_special import probit_gauss_moments, trunc_gauss_moments
from ..priors import (
    AmplitudeGaussian,
    AmplitudeLaplacian,
    SignalPrior,
    Support,
    bg_denoise,
    gaussian_si_denoise,
    laplacian_posterior,
    laplacian_si_denoise,
    support_si_denoise,
)
from .oracles import oracle_expectation, oracle_moments

__all__ = ["CheckResult", "CHECKS", "run_oracle_suite", "format_report"]


@dataclass
class CheckResult:
    name: str
    draws: int
    worst_rel_err: float
    tol: float
    seconds: float
    worst_params: dict = None

    @property
    def passed(self):
        return self.worst_rel_err <= self.tol


def _rel(closed, exact, scale):
    return abs(float(closed) - exact) / max(abs(exact), scale)


def _moment_errs(closed, oracle):
    """Errors on (Z, first, second) given closed and oracle triples."""
    z, m1, m2 = closed
    oz, om1, om2 = oracle
    return max(
        _rel(z, oz, 0.0),
        _rel(m1, om1, math.sqrt(abs(om2))),
        _rel(m2, om2, 0.0),
    )


def _signal_params(rng):
    return dict(
        lam=rng.uniform(0.05, 0.5),
        v_x=rng.uniform(0.5, 10.0),
        r_hat=rng.uniform(-10.0, 10.0),
        tau_r=math.exp(rng.uniform(math.log(0.01), math.log(5.0))),
    )


def _denoiser_errs(out, oracle):
    _, om1, om2 = oracle
    mean, var = float(out.mean[0]), float(out.variance[0])
    return max(_rel(mean, om1, math.sqrt(om2)), _rel(var + mean * mean, om2, 0.0))


def _probit(rng):
    v = math.exp(rng.uniform(math.log(1e-3), math.log(10.0)))
    tau = math.exp(rng.uniform(math.log(0.01), math.log(5.0)))
    # place p_hat so that the argument of Phi spans the bulk and both tails
    a = rng.uniform(-8.0, 8.0)
    p_hat = a * math.sqrt(v + tau)
    params = dict(y=1.0, p_hat=p_hat, tau_p=tau, v=v, gamma=1.0)
    pi0, pi1, pi2 = probit_gauss_moments(v, p_hat, tau)
    z, m1, m2 = oracle_moments("probit_channel", params)
    # PI_q = Z * E[z^q] for the gamma = 1, y = +1 posterior
    err = max(_rel(pi0, z, 0.0), _rel(pi1, z * m1, z * math.sqrt(m2)), _rel(pi2, z * m2, 0.0))
    return err, params


def _trunc(rng):
    m = rng.uniform(-10.0, 10.0)
    tau = math.exp(rng.uniform(math.log(0.01), math.log(5.0)))
    upper = m + rng.uniform(-8.0, 8.0) * math.sqrt(tau)
    params = dict(upper=upper, m=m, tau=tau)
    i0, i1, i2 = trunc_gauss_moments(upper, m, tau)
    z, m1, m2 = oracle_moments("trunc_gauss", params)
    err = max(_rel(i0, z, 0.0), _rel(i1, z * m1, z * math.sqrt(m2)), _rel(i2, z * m2, 0.0))
    return err, params


def _channel(rng):
    v = math.exp(rng.uniform(math.log(1e-3), math.log(10.0)))
    tau = math.exp(rng.uniform(math.log(0.01), math.log(5.0)))
    gamma = rng.uniform(0.5 + 1e-3, 1.0)
    y = float(rng.choice([-1.0, 1.0]))
    p_hat = rng.uniform(-6.0, 6.0) * math.sqrt(v + tau)
    params = dict(y=y, p_hat=p_hat, tau_p=tau, v=v, gamma=gamma)
    closed = posterior_z_moments(np.array([y]), np.array([p_hat]), np.array([tau]), ChannelParams(v, gamma))
    return _moment_errs([float(c[0]) for c in closed], oracle_moments("probit_channel", params)), params


def _bg(rng):
    p = _signal_params(rng)
    out = bg_denoise(p["r_hat"], p["tau_r"], SignalPrior(p["lam"], p["v_x"]))
    return _denoiser_errs(out, oracle_moments("bg", p)), p


def _laplace_params(rng):
    p = _signal_params(rng)
    p["x_tilde"] = rng.uniform(-10.0, 10.0)
    p["v_s"] = rng.uniform(0.05, 5.0)
    return p


def _laplace(rng):
    p = _laplace_params(rng)
    prior = SignalPrior(p["lam"], p["v_x"])
    si = AmplitudeLaplacian(np.array([p["x_tilde"]]), p["v_s"])
    out = laplacian_si_denoise(p["r_hat"], p["tau_r"], prior, si)
    oracle = oracle_moments("bg_laplace", p)
    log_z = float(laplacian_posterior(p["r_hat"], p["tau_r"], prior, si).log_z[0])
    err = max(_denoiser_errs(out, oracle), abs(math.expm1(log_z - math.log(oracle[0]))))
    return err, p


def _gauss(rng):
    p = _signal_params(rng)
    p["x_tilde"] = rng.uniform(-10.0, 10.0)
    p["v_s"] = rng.uniform(0.05, 5.0)
    si = AmplitudeGaussian(np.array([p["x_tilde"]]), p["v_s"])
    out = gaussian_si_denoise(p["r_hat"], p["tau_r"], SignalPrior(p["lam"], p["v_x"]), si)
    return _denoiser_errs(out, oracle_moments("bg_gauss", p)), p


def _support(rng):
    p = _signal_params(rng)
    p["x_tilde"] = float(rng.choice([-1.0, 1.0]))
    p["beta"] = rng.uniform(0.6, 1.0)
    si = Support(np.array([p["x_tilde"]]), p["beta"])
    out = support_si_denoise(p["r_hat"], p["tau_r"], SignalPrior(p["lam"], p["v_x"]), si)
    return _denoiser_errs(out, oracle_moments("bg_support", p)), p


def _abs_dev(rng):
    p = _laplace_params(rng)
    si = AmplitudeLaplacian(np.array([p["x_tilde"]]), p["v_s"])
    inp = EmInputs(p["r_hat"], p["tau_r"], None, SignalPrior(p["lam"], p["v_x"]), si)
    closed = float(expected_abs_deviation(inp)[0])
    xt = p["x_tilde"]
    _, (exact,) = oracle_expectation("bg_laplace", p, [lambda t: abs(t - xt)])
    return _rel(closed, exact, 0.0), p


CHECKS = {
    "probit_gauss_moments (PI0, PI1, PI2)": _probit,
    "trunc_gauss_moments (I0, I1, I2)": _trunc,
    "channel posterior moments": _channel,
    "Bernoulli-Gaussian denoiser": _bg,
    "Laplacian-SI denoiser and normalizer": _laplace,
    "Gaussian-SI denoiser": _gauss,
    "support-SI denoiser": _support,
    "E|x - x_tilde| for the v_s update": _abs_dev,
}


def run_oracle_suite(draws=500, seed=20240, tol=1e-6, checks=None):
    results = []
    for i, (name, fn) in enumerate(CHECKS.items()):
        if checks is not None and name not in checks:
            continue
        rng = np.random.default_rng([seed, i])
        t0 = time.perf_counter()
        worst, worst_p = 0.0, None
        for _ in range(draws):
            err, params = fn(rng)
            if not err <= worst:  # also catches NaN
                worst, worst_p = err, params
        results.append(CheckResult(name, draws, worst, tol, time.perf_counter() - t0, worst_p))
    return results


def format_report(results):
    lines = []
    for r in results:
        tag = "PASS" if r.passed else "FAIL"
        lines.append(f"{tag}  {r.name:<40s} draws={r.draws:<5d} worst_rel={r.worst_rel_err:.2e}  ({r.seconds:.1f}s)")
    return "\n".join(lines)
