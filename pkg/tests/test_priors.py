import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onebit_si.errors import DimensionError, DomainError
from onebit_si.priors import (
    AmplitudeGaussian,
    AmplitudeLaplacian,
    NoSI,
    SignalPrior,
    Support,
    bg_denoise,
    denoise,
    gaussian_si_denoise,
    laplacian_posterior,
    laplacian_si_denoise,
    support_si_denoise,
)
from onebit_si.validation.oracles import oracle_moments


def _arr(x):
    return np.array([x], dtype=float)


def _check_against_oracle(out, kind, params, rel):
    _, m1, m2 = oracle_moments(kind, params)
    assert out.mean[0] == pytest.approx(m1, rel=rel, abs=rel * np.sqrt(m2))
    assert out.variance[0] == pytest.approx(m2 - m1 * m1, rel=rel, abs=rel * m2)


# values frozen from the quadrature oracle (scipy quad, 1e-10 tolerances)

def test_bg_reference_point():
    out = bg_denoise(1.0, 0.4, SignalPrior(0.15, 5.5))
    assert out.mean[0] == pytest.approx(0.11971701871822225, rel=1e-8)
    assert out.variance[0] == pytest.approx(0.14515525358603892, rel=1e-8)
    _check_against_oracle(out, "bg", dict(lam=0.15, v_x=5.5, r_hat=1.0, tau_r=0.4), 1e-8)


def test_laplacian_reference_point():
    p = dict(lam=0.1, v_x=5.5, r_hat=0.6, tau_r=0.5, x_tilde=2.0, v_s=0.3)
    out = laplacian_si_denoise(0.6, 0.5, SignalPrior(0.1, 5.5), AmplitudeLaplacian(_arr(2.0), 0.3))
    assert out.mean[0] == pytest.approx(0.19371053658435197, rel=1e-7)
    assert out.variance[0] == pytest.approx(0.2511619310168401, rel=1e-7)
    _check_against_oracle(out, "bg_laplace", p, 1e-7)


def test_gaussian_reference_point():
    p = dict(lam=0.1, v_x=5.5, r_hat=-0.3, tau_r=0.7, x_tilde=1.4, v_s=0.2)
    out = gaussian_si_denoise(-0.3, 0.7, SignalPrior(0.1, 5.5), AmplitudeGaussian(_arr(1.4), 0.2))
    assert out.mean[0] == pytest.approx(0.32380809579441744, rel=1e-8)
    assert out.variance[0] == pytest.approx(0.26632306225159247, rel=1e-8)
    _check_against_oracle(out, "bg_gauss", p, 1e-8)


def test_support_reference_point():
    p = dict(lam=0.1, v_x=5.5, r_hat=1.1, tau_r=0.6, x_tilde=1.0, beta=0.9)
    out = support_si_denoise(1.1, 0.6, SignalPrior(0.1, 5.5), Support(_arr(1.0), 0.9))
    assert out.mean[0] == pytest.approx(0.43413611441449057, rel=1e-9)
    assert out.variance[0] == pytest.approx(0.47890497278783506, rel=1e-9)
    _check_against_oracle(out, "bg_support", p, 1e-9)


def test_bg_gaussian_limit():
    out = bg_denoise(1.7, 0.4, SignalPrior(1 - 1e-12, 5.5))
    assert out.mean[0] == pytest.approx(5.5 * 1.7 / 5.9, abs=1e-6)


def test_symmetric_inputs_give_zero_mean():
    prior = SignalPrior(0.2, 5.5)
    assert bg_denoise(0.0, 1.0, prior).mean[0] == 0
    assert laplacian_si_denoise(0.0, 1.0, prior, AmplitudeLaplacian(_arr(0.0), 0.5)).mean[0] == 0
    assert gaussian_si_denoise(0.0, 1.0, prior, AmplitudeGaussian(_arr(0.0), 0.5)).mean[0] == 0


def test_perfect_support_si_zeroes_out():
    out = support_si_denoise(np.array([3.0, -2.0]), np.array([0.5, 0.5]), SignalPrior(0.1, 5.5),
                             Support(np.array([-1.0, -1.0]), 1.0))
    assert np.all(out.active_prob == 0) and np.all(out.mean == 0) and np.all(out.variance == 0)


def test_rejects_bad_inputs():
    prior = SignalPrior()
    with pytest.raises(DomainError):
        bg_denoise(1.0, 0.0, prior)
    with pytest.raises(DomainError):
        Support(np.array([1.0, 0.0]), 0.9)
    with pytest.raises(DomainError):
        Support(np.array([1.0]), 0.5)
    with pytest.raises(DomainError):
        AmplitudeLaplacian(np.zeros(2), 0.0)
    with pytest.raises(DomainError):
        SignalPrior(0.0, 1.0)
    with pytest.raises(DimensionError):
        laplacian_si_denoise(np.zeros(3), np.ones(3), prior, AmplitudeLaplacian(np.zeros(2), 1.0))


def test_dispatch():
    prior = SignalPrior()
    r, t = np.array([0.3, -1.0]), np.array([0.5, 0.2])
    assert np.array_equal(denoise(r, t, prior).mean, bg_denoise(r, t, prior).mean)
    assert np.array_equal(denoise(r, t, prior, NoSI()).mean, bg_denoise(r, t, prior).mean)
    si = AmplitudeGaussian(np.array([0.1, 0.2]), 0.4)
    assert np.array_equal(denoise(r, t, prior, si).mean, gaussian_si_denoise(r, t, prior, si).mean)


def test_with_param_returns_new_instance():
    si = AmplitudeLaplacian(np.ones(3), 0.4)
    si2 = si.with_param(0.8)
    assert si2.v_s == 0.8 and si.v_s == 0.4 and si2.param == 0.8


def test_laplacian_posterior_weights_sum_to_one():
    rng = np.random.default_rng(0)
    r = rng.uniform(-5, 5, 100)
    post = laplacian_posterior(r, np.full(100, 0.3), SignalPrior(0.2, 5.5), AmplitudeLaplacian(r + 0.1, 0.5))
    assert np.allclose(sum(post.weights), 1.0)


# properties

r_vals = st.floats(-10, 10)
tau_vals = st.floats(0.01, 5)
lam_vals = st.floats(0.05, 0.5)
vx_vals = st.floats(0.5, 10)


@given(r_vals, tau_vals, lam_vals, vx_vals)
def test_bg_mean_is_odd(r, tau, lam, v_x):
    prior = SignalPrior(lam, v_x)
    a, b = bg_denoise(r, tau, prior), bg_denoise(-r, tau, prior)
    assert a.mean[0] == -b.mean[0]
    assert a.variance[0] == b.variance[0]


@settings(max_examples=200)
@given(r_vals, tau_vals, lam_vals, vx_vals, r_vals)
def test_flat_side_information_is_uninformative(r, tau, lam, v_x, xt):
    prior = SignalPrior(lam, v_x)
    ref = bg_denoise(r, tau, prior)
    for si in (AmplitudeLaplacian(_arr(xt), 1e8), AmplitudeGaussian(_arr(xt), 1e8),
               Support(_arr(1.0 if xt >= 0 else -1.0), 0.5 + 1e-9)):
        out = denoise(r, tau, prior, si)
        assert abs(out.mean[0] - ref.mean[0]) <= 1e-4
        assert abs(out.variance[0] - ref.variance[0]) <= 1e-4


@settings(max_examples=200)
@given(st.floats(-40, 40), st.floats(1e-4, 50), lam_vals, vx_vals, st.floats(-40, 40), st.floats(1e-3, 10))
def test_outputs_well_formed(r, tau, lam, v_x, xt, vs):
    prior = SignalPrior(lam, v_x)
    for si in (None, AmplitudeLaplacian(_arr(xt), vs), AmplitudeGaussian(_arr(xt), vs),
               Support(_arr(1.0 if xt >= 0 else -1.0), min(0.5 + vs / 10, 1.0))):
        out = denoise(r, tau, prior, si)
        assert np.isfinite(out.mean[0])
        assert out.variance[0] >= 0
        assert 0 <= out.active_prob[0] <= 1


@settings(max_examples=40, deadline=None)
@given(r_vals, tau_vals, lam_vals, vx_vals, r_vals, st.floats(0.05, 5))
def test_second_moment_matches_oracle(r, tau, lam, v_x, xt, vs):
    p = dict(lam=lam, v_x=v_x, r_hat=r, tau_r=tau, x_tilde=xt, v_s=vs)
    out = laplacian_si_denoise(r, tau, SignalPrior(lam, v_x), AmplitudeLaplacian(_arr(xt), vs))
    _, _, m2 = oracle_moments("bg_laplace", p)
    assert out.mean[0] ** 2 + out.variance[0] == pytest.approx(m2, rel=1e-6)
