import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from onebit_si.em import (
    BETA_BOUNDS,
    VS_BOUNDS,
    EmInputs,
    em_update,
    expected_abs_deviation,
    expected_sq_deviation,
    update_beta,
    update_vs_gaussian,
    update_vs_laplacian,
)
from onebit_si.priors import AmplitudeGaussian, AmplitudeLaplacian, SignalPrior, Support
from onebit_si.validation.oracles import oracle_expectation

PRIOR = SignalPrior(0.1, 5.5)


def test_abs_deviation_reference_point():
    p = dict(lam=0.1, v_x=5.5, r_hat=0.5, tau_r=0.3, x_tilde=1.0, v_s=0.4)
    inp = EmInputs(0.5, 0.3, None, PRIOR, AmplitudeLaplacian(np.array([1.0]), 0.4))
    _, (ref,) = oracle_expectation("bg_laplace", p, [lambda t: abs(t - 1.0)])
    assert expected_abs_deviation(inp)[0] == pytest.approx(ref, rel=1e-6)


def test_laplacian_update_is_half_mean_deviation():
    n = 7
    si = AmplitudeLaplacian(np.full(n, 1.0), 0.4)
    inp = EmInputs(np.full(n, 0.5), np.full(n, 0.3), None, PRIOR, si)
    single = expected_abs_deviation(EmInputs(0.5, 0.3, None, PRIOR, AmplitudeLaplacian(np.array([1.0]), 0.4)))[0]
    assert update_vs_laplacian(inp) == pytest.approx(single / 2, rel=1e-14)


def test_perfect_side_information_clamps_low():
    x = np.array([0.0, 1.3, -2.0, 0.0])
    si = AmplitudeLaplacian(x, 1e-12)
    inp = EmInputs(x, np.full(4, 1e-22), None, SignalPrior(0.5, 5.5), si)
    assert update_vs_laplacian(inp) == VS_BOUNDS[0]


def test_sq_deviation_reference_point():
    p = dict(lam=0.1, v_x=5.5, r_hat=-0.3, tau_r=0.7, x_tilde=1.4, v_s=0.2)
    inp = EmInputs(-0.3, 0.7, None, PRIOR, AmplitudeGaussian(np.array([1.4]), 0.2))
    _, (ref,) = oracle_expectation("bg_gauss", p, [lambda t: (t - 1.4) ** 2])
    assert expected_sq_deviation(inp)[0] == pytest.approx(ref, rel=1e-6)
    assert update_vs_gaussian(inp) == pytest.approx(ref, rel=1e-6)


def test_gaussian_all_zero_case():
    si = AmplitudeGaussian(np.zeros(5), 1.0)
    inp = EmInputs(np.zeros(5), np.full(5, 0.01), None, SignalPrior(1e-9, 5.5), si)
    assert update_vs_gaussian(inp) < 1e-6


def test_gaussian_self_consistency():
    # r_hat observed around a Gaussian-perturbed copy; iterating the update should settle near v_s*
    rng = np.random.default_rng(3)
    n, vs_true, tau = 1000, 0.5, 0.05
    x = np.where(rng.random(n) < 0.3, rng.normal(0, np.sqrt(5.5), n), 0.0)
    xt = x + rng.normal(0, np.sqrt(vs_true), n)
    r = x + rng.normal(0, np.sqrt(tau), n)
    vs = 3.0
    for _ in range(50):
        vs = update_vs_gaussian(EmInputs(r, np.full(n, tau), None, SignalPrior(0.3, 5.5), AmplitudeGaussian(xt, vs)))
    assert vs_true / 2 <= vs <= 2 * vs_true


def test_beta_hand_example():
    inp = EmInputs(np.zeros(4), np.ones(4), np.array([0.9, 0.8, 0.3, 0.1]), PRIOR,
                   Support(np.array([1.0, 1.0, -1.0, -1.0]), 0.9))
    assert update_beta(inp) == pytest.approx(0.825, rel=1e-15)


def test_beta_extremes():
    labels = np.array([1.0, -1.0, 1.0])
    perfect = EmInputs(np.zeros(3), np.ones(3), np.array([1.0, 0.0, 1.0]), PRIOR, Support(labels, 0.9))
    assert update_beta(perfect) == 1.0
    flat = EmInputs(np.zeros(3), np.ones(3), np.full(3, 0.5), PRIOR, Support(labels, 0.9))
    assert update_beta(flat) == BETA_BOUNDS[0]


@given(st.lists(st.floats(0, 1), min_size=1, max_size=30), st.data())
def test_beta_bounded_and_linear(pi, data):
    pi = np.array(pi)
    labels = np.array(data.draw(st.lists(st.sampled_from([-1.0, 1.0]), min_size=pi.size, max_size=pi.size)))
    inp = EmInputs(np.zeros(pi.size), np.ones(pi.size), pi, PRIOR, Support(labels, 0.9))
    b = update_beta(inp)
    assert BETA_BOUNDS[0] <= b <= 1.0
    raw = np.mean(np.where(labels > 0, pi, 1 - pi))
    assert b == pytest.approx(float(np.clip(raw, *BETA_BOUNDS)), abs=1e-15)


@given(st.lists(st.floats(-8, 8), min_size=1, max_size=20), st.floats(0.05, 3), st.floats(0.05, 3))
def test_sq_deviation_nonnegative(r, tau, vs):
    r = np.array(r)
    inp = EmInputs(r, tau, None, PRIOR, AmplitudeGaussian(r[::-1].copy(), vs))
    assert np.all(expected_sq_deviation(inp) >= -1e-10)


def test_wrong_variant_raises():
    lap = AmplitudeLaplacian(np.zeros(2), 1.0)
    with pytest.raises(TypeError):
        update_vs_gaussian(EmInputs(np.zeros(2), np.ones(2), None, PRIOR, lap))
    with pytest.raises(TypeError):
        update_beta(EmInputs(np.zeros(2), np.ones(2), np.zeros(2), PRIOR, lap))
    with pytest.raises(TypeError):
        em_update(EmInputs(np.zeros(2), np.ones(2), None, PRIOR, None))


def test_current_param_overrides_si():
    si = AmplitudeLaplacian(np.array([1.0]), 0.4)
    a = update_vs_laplacian(EmInputs(0.5, 0.3, None, PRIOR, si, current_param=1.2))
    b = update_vs_laplacian(EmInputs(0.5, 0.3, None, PRIOR, si.with_param(1.2)))
    assert a == b
