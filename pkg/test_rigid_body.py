"""
Tests for the rigid-body predictor, BDF2 corrector and helpers.
"""

import numpy as np
import pytest

from slabforge.analysis import response_metrics
from slabforge.errors import DivergenceError
from slabforge.rigid_body import (
    DofParams,
    DofState,
    RigidBodyState,
    StateHistory,
    analytic_damped_oscillator,
    bdf2_residual,
    body_surface_velocity,
    corrector,
    implicit_bdf2_step,
    integrate_dof,
    predictor,
)

GALLOPING = DofParams(inertia=20.0, damping=0.00581195, stiffness=3.08425)


def integrate(params, d0, b0, dt, t_end, tol=1e-13):
    state = DofState(d0, b0)
    for _ in range(int(round(t_end / dt))):
        result = integrate_dof(params, state, 0.0, dt, tol)
        state = state.advanced(result.value, result.rate)
    return state


def test_predictor_free_motion():
    assert predictor(DofParams(1.0), DofState(0.0, 1.0), 0.0, 0.1) == pytest.approx((0.1, 1.0))


def test_predictor_constant_load():
    assert predictor(DofParams(1.0), DofState(0.0, 0.0), 3.0, 0.15) == pytest.approx((0.0, 0.45))


def test_predictor_zero_step_keeps_state():
    assert predictor(GALLOPING, DofState(0.3, -0.2), 5.0, 0.0) == (0.3, -0.2)
    with pytest.raises(ValueError):
        predictor(GALLOPING, DofState(), 0.0, -0.1)


def test_first_corrector_iterate():
    value, rate = corrector(DofParams(1.0), DofState(0.0, 0.0), (0.0, 0.45), 3.0, 0.15)
    assert value == pytest.approx(0.045, rel=1e-12)
    assert rate == pytest.approx(0.3, rel=1e-12)


def test_corrector_keeps_equilibrium():
    state = DofState(0.0, 0.0, 0.0, 0.0)
    assert corrector(GALLOPING, state, (0.0, 0.0), 0.0, 0.1) == (0.0, 0.0)


def test_first_step_backfills_history():
    state = DofState(1.0, 2.0).backfilled(0.1)
    assert state.prev_value == pytest.approx(0.8)
    assert state.prev_rate == 2.0
    assert state.backfilled(0.5) is state
    accelerated = DofState(1.0, 2.0).backfilled(0.1, acceleration=4.0)
    assert accelerated.prev_value == pytest.approx(0.82)
    assert accelerated.prev_rate == pytest.approx(1.6)


def test_free_body_fixed_point_matches_direct_solve():
    params = DofParams(1.0)
    state = DofState(0.2, -0.1, 0.25, -0.4)
    result = integrate_dof(params, state, 3.0, 0.15, 1e-14)
    assert (result.value, result.rate) == pytest.approx(implicit_bdf2_step(params, state, 3.0, 0.15), rel=1e-12)


def test_galloping_parameters_converge():
    state = DofState(1.0, 0.0).backfilled(0.1, GALLOPING.acceleration(1.0, 0.0, 0.0))
    result = integrate_dof(GALLOPING, state, 0.0, 0.1, 1e-5)
    assert result.residual < 1e-5
    assert bdf2_residual(GALLOPING, state, result.value, result.rate, 0.0, 0.1) <= 1e-4


def test_linearity():
    params = DofParams(2.0, 0.3, 5.0)
    one = integrate(params, 0.4, -0.1, 0.05, 1.0, tol=1e-15)
    two = integrate(params, 0.8, -0.2, 0.05, 1.0, tol=1e-15)
    assert two.value == pytest.approx(2.0 * one.value, rel=1e-12)
    assert two.rate == pytest.approx(2.0 * one.rate, rel=1e-12)


def test_second_order_convergence():
    params = DofParams(1.0, 0.5, 4.0)
    d0, b0, t_end = 1.0, 0.0, 2.0
    exact, _ = analytic_damped_oscillator(params, d0, b0, t_end)
    errors = [abs(integrate(params, d0, b0, 0.1 / 2**i, t_end).value - exact) for i in range(5)]
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert 1.8 <= orders[-1] <= 2.2
    assert 1.8 <= orders[-2] <= 2.2


def trajectory(params, d0, b0, dt, t_end, tol=1e-13):
    """Samples of a free response started from an exact history."""
    state = DofState(d0, b0).backfilled(dt, params.acceleration(d0, b0, 0.0))
    values = [d0]
    for _ in range(int(round(t_end / dt))):
        result = integrate_dof(params, state, 0.0, dt, tol)
        state = state.advanced(result.value, result.rate)
        values.append(result.value)
    return np.array(values)


def test_second_order_convergence_with_galloping_coefficients():
    t_end = 50.0
    exact, _ = analytic_damped_oscillator(GALLOPING, 1.0, 0.0, t_end)
    errors = [abs(trajectory(GALLOPING, 1.0, 0.0, dt, t_end)[-1] - exact) for dt in (0.2, 0.1, 0.05, 0.025)]
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all((orders >= 1.8) & (orders <= 2.2)), orders


def test_measured_undamped_frequency():
    params = DofParams(GALLOPING.inertia, 0.0, GALLOPING.stiffness)
    dt, t_end = 0.05, 50.0
    values = trajectory(params, 1.0, 0.0, dt, t_end)
    metrics = response_metrics(dt * np.arange(len(values)), values)
    assert metrics.n_peaks >= 3
    assert metrics.dominant_frequency == pytest.approx(np.sqrt(3.08425 / 20.0) / (2.0 * np.pi), rel=0.01)
    assert metrics.dominant_frequency == pytest.approx(0.0625, rel=0.01)


def test_corrector_cap_raises():
    with pytest.raises(DivergenceError) as info:
        integrate_dof(DofParams(1.0), DofState(), 3.0, 0.15, 1e-12, max_iters=1)
    assert info.value.iterations == 1


def test_non_positive_tolerance_rejected():
    with pytest.raises(ValueError):
        integrate_dof(GALLOPING, DofState(), 0.0, 0.1, 0.0)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        DofParams(0.0)
    with pytest.raises(ValueError):
        DofParams(1.0, damping=-0.1)


def test_natural_frequency():
    assert DofParams(1.0, 0.0, 4.0 * np.pi**2).natural_frequency == pytest.approx(1.0)


def test_analytic_oscillator_without_stiffness():
    value, rate = analytic_damped_oscillator(DofParams(2.0), 0.0, 0.0, 3.0, load=4.0)
    assert value == pytest.approx(9.0, rel=1e-10)
    assert rate == pytest.approx(6.0, rel=1e-10)


def test_body_surface_velocity():
    assert body_surface_velocity(2.0, 3.0, (1.0, 0.0)) == pytest.approx([0.0, 5.0])
    assert body_surface_velocity(0.0, 1.0, (0.0, 1.0)) == pytest.approx([-1.0, 0.0])
    u = body_surface_velocity(0.7, 0.0, np.random.default_rng(1).normal(size=(5, 2)))
    assert u == pytest.approx(np.tile([0.0, 0.7], (5, 1)))


def test_history_requires_increasing_time():
    history = StateHistory()
    history.append(RigidBodyState(0.0))
    history.append(RigidBodyState(0.1))
    with pytest.raises(ValueError):
        history.append(RigidBodyState(0.1))
    assert len(history) == 2


def test_state_accessors():
    state = RigidBodyState(1.0, DofState(0.1, 0.2), DofState(0.3, 0.4))
    assert (state.d, state.ddot, state.theta, state.thetadot) == (0.1, 0.2, 0.3, 0.4)
