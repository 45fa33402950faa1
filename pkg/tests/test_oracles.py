import math

import numpy as np
import pytest

from onebit_si.errors import OracleError
from onebit_si.validation.oracles import (
    QuadratureSpec,
    grid_posterior_mean,
    oracle_expectation,
    oracle_moments,
)

SIG = dict(lam=0.2, v_x=3.0, r_hat=0.7, tau_r=0.5)


def test_dense_prior_is_gaussian_product():
    p = dict(lam=1.0, v_x=3.0, r_hat=0.7, tau_r=0.5)
    z, m1, m2 = oracle_moments("bg", p)
    var = 3.0 * 0.5 / 3.5
    mean = 3.0 * 0.7 / 3.5
    assert z == pytest.approx(math.exp(-0.5 * 0.49 / 3.5) / math.sqrt(2 * math.pi * 3.5), rel=1e-10)
    assert m1 == pytest.approx(mean, rel=1e-10)
    assert m2 == pytest.approx(var + mean**2, rel=1e-10)


def test_half_normal_channel():
    _, m1, _ = oracle_moments("probit_channel", dict(y=1.0, p_hat=0.0, tau_p=1.0, v=1.0, gamma=1.0))
    # 2 * PI1 with PI1 = phi(0) / sqrt(2)
    assert m1 == pytest.approx(2 / math.sqrt(2 * math.pi) / math.sqrt(2), rel=1e-10)


def test_flat_gaussian_side_info_matches_bg():
    a = oracle_moments("bg", SIG)
    b = oracle_moments("bg_gauss", dict(SIG, x_tilde=1.0, v_s=1e12))
    assert b[1] == pytest.approx(a[1], rel=1e-6)
    assert b[2] == pytest.approx(a[2], rel=1e-6)


def test_more_subdivisions_do_not_move_results():
    p = dict(SIG, x_tilde=-1.5, v_s=0.3)
    a = oracle_moments("bg_laplace", p, QuadratureSpec(limit=200))
    b = oracle_moments("bg_laplace", p, QuadratureSpec(limit=400))
    for u, w in zip(a, b):
        assert u == pytest.approx(w, rel=1e-11)


def test_expectation_of_constant():
    log_z, (one,) = oracle_expectation("bg_support", dict(SIG, x_tilde=1.0, beta=0.8), [lambda t: 1.0])
    assert one == pytest.approx(1.0, rel=1e-14) and math.isfinite(log_z)


def test_bad_inputs():
    with pytest.raises(ValueError):
        oracle_moments("nope", SIG)
    with pytest.raises(ValueError):
        QuadratureSpec(epsabs=0)
    assert QuadratureSpec(extra_points=[3.0, -1.0]).extra_points == [-1.0, 3.0]


def test_extreme_density_fails_loudly():
    # no flips, noiseless, and the Gaussian sits 1e4 standard deviations on the wrong side
    with pytest.raises(OracleError):
        oracle_moments("probit_channel", dict(y=1.0, p_hat=-1e4, tau_p=1.0, v=0.0, gamma=1.0))


def test_grid_oracle_single_column_limit():
    # second column all zeros: the problem decouples and x2 keeps its prior mean of 0
    rng = np.random.default_rng(0)
    A = np.column_stack([rng.normal(size=30), np.zeros(30)])
    y = np.where(A[:, 0] * 1.5 > 0, 1.0, -1.0)
    m = grid_posterior_mean(A, y, 0.5, 5.5, 0.1, 0.95)
    assert abs(m[1]) < 1e-9 and m[0] > 0
