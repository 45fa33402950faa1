import numpy as np
import pytest

from onebit_si.channel import ChannelParams, f_update
from onebit_si.errors import DimensionError, DomainError, GampDivergenceError
from onebit_si.gamp import (
    GampConfig,
    GampState,
    linear_estimation_step,
    linear_measurement_step,
    run_noisy1bg,
    run_with_si,
)
from onebit_si.priors import AmplitudeLaplacian, SignalPrior, Support, bg_denoise
from onebit_si.sim import NoisyAmplitude, ScenarioConfig, make_trial, nmse, support_labels


def test_config_validation():
    for kw in (dict(max_inner_iters=0), dict(max_outer_iters=0), dict(damping=0.0), dict(damping=1.1), dict(tau_floor=0)):
        with pytest.raises(DomainError):
            GampConfig(**kw)


def test_initial_state():
    st = GampState.initial(4, 3, SignalPrior(0.2, 5.0))
    assert np.all(st.x_hat == 0) and np.allclose(st.tau_x, 1.0) and np.all(st.s_hat == 0)


def test_single_iteration_by_hand():
    A = np.array([[1.0, -2.0, 0.5], [0.3, 1.0, -1.0]])
    y = np.array([1.0, -1.0])
    prior, ch = SignalPrior(0.3, 2.0), ChannelParams(0.2, 0.9)
    res = run_noisy1bg(A, y, prior, ch, GampConfig(max_inner_iters=1))

    tau_x = np.full(3, 0.6)
    tau_p = (A * A) @ tau_x
    p_hat = np.zeros(2)  # x_hat = 0 and s_hat = 0 at the start
    s_hat, tau_s = f_update(y, p_hat, tau_p, ch)
    tau_r = 1.0 / ((A * A).T @ tau_s)
    r_hat = tau_r * (A.T @ s_hat)
    ref = bg_denoise(r_hat, tau_r, prior)
    assert np.allclose(res.x_hat, ref.mean, rtol=0, atol=1e-12)
    assert np.allclose(res.tau_x, ref.variance, rtol=0, atol=1e-12)


def test_linear_steps_shapes_and_floors():
    A = np.ones((3, 2))
    st = GampState.initial(3, 2, SignalPrior())
    st.tau_x[:] = 0.0
    _, tau_p = linear_measurement_step(A, st, tau_floor=1e-9)
    assert np.all(tau_p == 1e-9)
    st.tau_s[:] = 0.0
    _, tau_r = linear_estimation_step(A, st, tau_floor=1e-9)
    assert np.allclose(tau_r, 1e9, rtol=1e-15)
    with pytest.raises(DimensionError):
        linear_measurement_step(np.ones((3, 5)), st)


def test_rejects_bad_measurements():
    with pytest.raises(DomainError):
        run_noisy1bg(np.ones((2, 2)), np.array([1.0, 0.0]), SignalPrior(), ChannelParams())
    with pytest.raises(DimensionError):
        run_noisy1bg(np.ones((2, 2)), np.array([1.0, 1.0, -1.0]), SignalPrior(), ChannelParams())


def test_no_measurements_returns_prior_mean():
    res = run_noisy1bg(np.zeros((0, 4)), np.zeros(0), SignalPrior(0.2, 3.0), ChannelParams())
    assert np.all(res.x_hat == 0) and np.allclose(res.tau_x, 0.6)


def test_beats_zero_estimator():
    sc = ScenarioConfig(N=50, M=250, prior=SignalPrior(0.15, 5.5), seed=11)
    for t in range(5):
        d = make_trial(sc, t)
        res = run_noisy1bg(d.A, d.y, sc.prior, sc.ch)
        assert nmse(d.x_true, res.x_hat) < np.sqrt(2)


def test_deterministic():
    sc = ScenarioConfig(N=40, M=160, si_protocol=NoisyAmplitude(), seed=5)
    d = make_trial(sc, 0)
    a = run_with_si(d.A, d.y, sc.prior, sc.ch, d.si.laplacian(1.0))
    b = run_with_si(d.A, d.y, sc.prior, sc.ch, d.si.laplacian(1.0))
    assert np.array_equal(a.x_hat, b.x_hat) and a.param_history == b.param_history


def test_trajectory_recorded():
    sc = ScenarioConfig(N=40, M=160, seed=2)
    d = make_trial(sc, 0)
    res = run_noisy1bg(d.A, d.y, sc.prior, sc.ch, x_true=d.x_true)
    assert len(res.trajectory) == res.inner_iterations_used
    assert res.trajectory[-1] == pytest.approx(nmse(d.x_true, res.x_hat))


def test_damping_still_converges():
    sc = ScenarioConfig(N=50, M=200, seed=8)
    d = make_trial(sc, 0)
    res = run_noisy1bg(d.A, d.y, sc.prior, sc.ch, GampConfig(damping=0.7, max_inner_iters=80))
    assert nmse(d.x_true, res.x_hat) < 0.6


def test_em_disabled_single_outer_pass():
    sc = ScenarioConfig(N=40, M=160, si_protocol=NoisyAmplitude(), seed=3)
    d = make_trial(sc, 0)
    res = run_with_si(d.A, d.y, sc.prior, sc.ch, d.si.laplacian(0.3), GampConfig(em_enabled=False))
    assert res.outer_iterations_used == 1 and res.estimated_param is None


def test_cold_restart_runs():
    sc = ScenarioConfig(N=40, M=160, si_protocol=NoisyAmplitude(), seed=3)
    d = make_trial(sc, 0)
    res = run_with_si(d.A, d.y, sc.prior, sc.ch, d.si.gaussian(1.0), GampConfig(warm_start=False, max_outer_iters=3))
    assert np.all(np.isfinite(res.x_hat)) and len(res.param_history) >= 2


def test_with_si_requires_side_information():
    with pytest.raises(TypeError):
        run_with_si(np.ones((2, 2)), np.ones(2), SignalPrior(), ChannelParams(), None)
    with pytest.raises(DimensionError):
        run_with_si(np.ones((2, 2)), np.ones(2), SignalPrior(), ChannelParams(), AmplitudeLaplacian(np.ones(3), 1.0))


def test_divergence_is_reported(monkeypatch):
    import onebit_si.gamp as gamp_mod

    def broken(*args, **kwargs):
        out = bg_denoise(*args[:3])
        out.mean[:] = np.nan
        return out

    monkeypatch.setattr(gamp_mod, "denoise", broken)
    sc = ScenarioConfig(N=10, M=30)
    d = make_trial(sc, 0)
    with pytest.raises(GampDivergenceError) as exc:
        run_noisy1bg(d.A, d.y, sc.prior, sc.ch)
    assert exc.value.iteration == 1


def test_perfect_support_recovers_support():
    # noiseless channel, exact support labels with beta = 1, M >> N
    sc = ScenarioConfig(N=50, M=500, prior=SignalPrior(0.15, 5.5), ch=ChannelParams(0.0, 1.0), seed=21)
    hits = 0
    n = 20
    for t in range(n):
        d = make_trial(sc, t)
        si = Support(support_labels(d.x_true), 1.0)
        res = run_with_si(d.A, d.y, sc.prior, sc.ch, si, GampConfig(em_enabled=False))
        est = np.abs(res.x_hat) > 1e-3
        hits += np.array_equal(est, d.x_true != 0)
    assert hits >= 0.95 * n
