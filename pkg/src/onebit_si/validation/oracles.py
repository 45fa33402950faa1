"""Brute-force reference moments by adaptive quadrature.

Nothing in here calls the closed-form code in the rest of the package: every
density is written out again from its definition and integrated with
``scipy.integrate.quad`` piecewise between kinks, with the point mass at zero
added exactly. Integrands are rescaled by the log of their peak so that the
quadrature works on O(1) values no matter how small the normalizer is.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from ..errors import OracleError

__all__ = [
    "QuadratureSpec",
    "oracle_moments",
    "oracle_expectation",
    "grid_posterior_mean",
    "KINDS",
]

KINDS = ("bg", "bg_laplace", "bg_gauss", "bg_support", "probit_channel", "trunc_gauss")


@dataclass
class QuadratureSpec:
    epsabs: float = 1e-10
    epsrel: float = 1e-10
    limit: int = 200
    span: float = 40.0  # half-width of the integration box, in standard deviations
    extra_points: list = field(default_factory=list)

    def __post_init__(self):
        if self.epsabs <= 0 or self.epsrel <= 0:
            raise ValueError("tolerances must be positive")
        self.extra_points = sorted(self.extra_points)


def _lnorm(x, m, v):
    return -0.5 * (x - m) ** 2 / v - 0.5 * math.log(2 * math.pi * v)


def _lphi_cdf(x):
    return float(special.log_ndtr(x))


def _build(kind, p):
    """Return (log slab density, log spike mass or None, center, scale, kinks)."""
    if kind == "probit_channel":
        y, p_hat, tau, v, gamma = p["y"], p["p_hat"], p["tau_p"], p["v"], p["gamma"]

        def keep(z):
            if v == 0:
                return 1.0 if (z > 0) == (y > 0) else 0.0
            return float(special.ndtr(y * z / math.sqrt(v)))

        def logf(z):
            a = keep(z)
            lik = gamma * a + (1 - gamma) * (1 - a)
            if lik <= 0:
                return -math.inf
            return math.log(lik) + _lnorm(z, p_hat, tau)

        return logf, None, p_hat, math.sqrt(tau), [0.0]

    if kind == "trunc_gauss":
        upper, m, tau = p["upper"], p["m"], p["tau"]

        def logf(x):
            return _lnorm(x, m, tau) if x <= upper else -math.inf

        # center the box on the mass, which sits near ``upper`` when it is far in the tail
        center = min(m, upper)
        return logf, None, center, math.sqrt(tau), [upper]

    lam, v_x, r, tau = p["lam"], p["v_x"], p["r_hat"], p["tau_r"]
    log_lam = math.log(lam)
    log_1m = math.log1p(-lam) if lam < 1 else -math.inf
    vg = v_x * tau / (v_x + tau)
    mg = v_x * r / (v_x + tau)

    def base(x):
        return log_lam + _lnorm(x, 0.0, v_x) + _lnorm(x, r, tau)

    spike = log_1m + _lnorm(0.0, r, tau)
    if kind == "bg":
        return base, spike, mg, math.sqrt(vg), [0.0]
    if kind == "bg_laplace":
        xt, vs = p["x_tilde"], p["v_s"]

        def lap(x):
            return -math.log(4 * vs) - abs(x - xt) / (2 * vs)

        width = math.sqrt(vg) + vg / (2 * vs)
        return (lambda x: base(x) + lap(x)), spike + lap(0.0), mg, width, [0.0, xt]
    if kind == "bg_gauss":
        xt, vs = p["x_tilde"], p["v_s"]
        prec = 1 / v_x + 1 / tau + 1 / vs
        center = (r / tau + xt / vs) / prec
        return (
            (lambda x: base(x) + _lnorm(x, xt, vs)),
            spike + _lnorm(0.0, xt, vs),
            center,
            math.sqrt(1 / prec),
            [0.0, xt],
        )
    if kind == "bg_support":
        xt, beta = p["x_tilde"], p["beta"]
        lb = math.log(beta)
        l1b = math.log1p(-beta) if beta < 1 else -math.inf
        slab_w = lb if xt > 0 else l1b
        spike_w = lb if xt < 0 else l1b
        return (lambda x: base(x) + slab_w), spike + spike_w, mg, math.sqrt(vg), [0.0]
    raise ValueError(f"unknown oracle kind {kind!r}")


def _integrate(kind, params, g, spec):
    logf, spike, center, scale, kinks = _build(kind, params)
    lo = min([center] + kinks) - spec.span * scale
    hi = max([center] + kinks) + spec.span * scale
    pts = sorted({lo, hi, center, *[k for k in kinks + spec.extra_points if lo < k < hi]})
    # rescale by the largest log-density seen on a probe grid
    probe = np.concatenate([np.linspace(lo, hi, 2001), pts])
    c = max(logf(float(t)) for t in probe)
    if spike is not None:
        c = max(c, spike)
    if not math.isfinite(c):
        raise OracleError(f"{kind}: density vanishes everywhere on the integration box")

    results = []
    for gfun in g:
        total, err = 0.0, 0.0
        for a, b in zip(pts[:-1], pts[1:]):
            try:
                val, e, *rest = integrate.quad(
                    lambda t: gfun(t) * math.exp(logf(t) - c),
                    a,
                    b,
                    epsabs=spec.epsabs * scale,
                    epsrel=spec.epsrel,
                    limit=spec.limit,
                    full_output=1,
                )
            except OverflowError as exc:
                raise OracleError(f"{kind}: density peak far above the probe grid maximum") from exc
            total += val
            err += e
        if spike is not None:
            total += gfun(0.0) * math.exp(spike - c)
        if err > 1e3 * max(spec.epsabs * scale, spec.epsrel * abs(total)):
            raise OracleError(f"{kind}: quadrature error estimate {err:.3g} too large")
        results.append(total)
    return c, results


def oracle_expectation(kind, params, funcs, spec=None):
    """Posterior expectations of each function in ``funcs``.

    Returns ``(log_z, [E f for f in funcs])``.
    """
    spec = spec or QuadratureSpec()
    c, vals = _integrate(kind, params, [lambda t: 1.0] + list(funcs), spec)
    z = vals[0]
    if not z > 0:
        raise OracleError(f"{kind}: zero normalizer")
    return c + math.log(z), [v / z for v in vals[1:]]


def oracle_moments(kind, params, spec=None):
    """(Z, E[x], E[x^2]) of the named unnormalized posterior.

    ``kind`` is one of :data:`KINDS`. Parameter dicts use the keys
    ``lam, v_x, r_hat, tau_r`` for the signal posteriors (plus ``x_tilde, v_s``
    or ``x_tilde, beta``), ``y, p_hat, tau_p, v, gamma`` for the channel and
    ``upper, m, tau`` for a Gaussian cut off above ``upper``.
    """
    log_z, (m1, m2) = oracle_expectation(kind, params, [lambda t: t, lambda t: t * t], spec)
    return math.exp(log_z), m1, m2


def _log_lik(Z, y, v, gamma):
    # sum over measurements of log p(y_m | z_m) for a batch of z vectors
    if v == 0:
        a = ((Z > 0) == (y > 0)).astype(float)
    else:
        a = special.ndtr(y * Z / math.sqrt(v))
    with np.errstate(divide="ignore"):
        return np.log(gamma * a + (1 - gamma) * (1 - a)).sum(axis=-1)


def _trapz_grid(lo, hi, n):
    g = np.linspace(lo, hi, n)
    w = np.full(n, g[1] - g[0])
    w[0] = w[-1] = 0.5 * (g[1] - g[0])
    return g, w


def grid_posterior_mean(A, y, lam, v_x, v, gamma, box=None, coarse=201, fine=241):
    """Exact posterior mean for a two-coefficient spike-and-slab problem.

    The posterior splits over the four support patterns. The slab parts are
    integrated on a coarse grid over [-box, box] to find where the mass is,
    then again on a fine grid over that region. ``box`` defaults to eight
    prior standard deviations; one-bit data pin down direction much better
    than magnitude, so the radial tail can reach far out.
    """
    if box is None:
        box = 8.0 * math.sqrt(v_x)
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    if A.shape[1] != 2:
        raise ValueError("grid oracle handles exactly two coefficients")
    lp_slab = math.log(lam) - 0.5 * math.log(2 * math.pi * v_x)
    lp_spike = math.log1p(-lam) if lam < 1 else -math.inf

    def refine_1d(col):
        g, _ = _trapz_grid(-box, box, coarse * 4)
        lp = _log_lik(np.outer(g, A[:, col]), y, v, gamma) - 0.5 * g * g / v_x
        keep = g[lp > lp.max() - 40]
        d = g[1] - g[0]
        g, w = _trapz_grid(keep.min() - 2 * d, keep.max() + 2 * d, fine * 8)
        lp = _log_lik(np.outer(g, A[:, col]), y, v, gamma) - 0.5 * g * g / v_x
        return g, w, lp

    def refine_2d():
        g, _ = _trapz_grid(-box, box, coarse)
        X1, X2 = np.meshgrid(g, g, indexing="ij")
        pts = np.stack([X1.ravel(), X2.ravel()], axis=1)
        lp = _log_lik(pts @ A.T, y, v, gamma) - 0.5 * (pts**2).sum(1) / v_x
        keep = pts[lp > lp.max() - 40]
        d = g[1] - g[0]
        g1, w1 = _trapz_grid(keep[:, 0].min() - 2 * d, keep[:, 0].max() + 2 * d, fine)
        g2, w2 = _trapz_grid(keep[:, 1].min() - 2 * d, keep[:, 1].max() + 2 * d, fine)
        X1, X2 = np.meshgrid(g1, g2, indexing="ij")
        pts = np.stack([X1.ravel(), X2.ravel()], axis=1)
        lp = _log_lik(pts @ A.T, y, v, gamma) - 0.5 * (pts**2).sum(1) / v_x
        return pts, np.outer(w1, w2).ravel(), lp

    pieces = []  # (log mass, mean vector)
    both0 = lp_spike * 2 + _log_lik(np.zeros((1, A.shape[0])), y, v, gamma)[0]
    pieces.append((both0, np.zeros(2)))
    for col in (0, 1):
        g, w, lp = refine_1d(col)
        c = lp.max()
        mass = np.sum(w * np.exp(lp - c))
        mean = np.zeros(2)
        mean[col] = np.sum(w * g * np.exp(lp - c)) / mass
        pieces.append((lp_slab + lp_spike + c + math.log(mass), mean))
    pts, w, lp = refine_2d()
    c = lp.max()
    e = w * np.exp(lp - c)
    mass = e.sum()
    pieces.append((2 * lp_slab + c + math.log(mass), (pts * e[:, None]).sum(0) / mass))

    logs = np.array([p[0] for p in pieces])
    wts = np.exp(logs - logs.max())
    wts /= wts.sum()
    return sum(wt * p[1] for wt, p in zip(wts, pieces))
