import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from nhflows.errors import DegenerateOrbitError, IntegrityError, NumericError, RateError
from nhflows.integrate import (
    Monitor,
    Trajectory,
    divergence_estimate,
    integrate,
    integrate_adaptive,
    liouville_residual,
    reparameterize,
    rk4_step,
    rotation_number,
    with_monitors,
)
from nhflows.liealg import maybe_reorthogonalize, orthogonality_defect, so3_hat

seeds = st.integers(min_value=0, max_value=2**31 - 1)


def euler_top(I):
    I = np.asarray(I, dtype=float)
    return lambda w: np.cross(I * w, w) / I


# ---- single step

@given(seeds)
def test_rk4_linear_matches_taylor(seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((4, 4))
    y = rng.standard_normal(4)
    dt = 0.1
    Mh = M * dt
    taylor = np.eye(4) + Mh + Mh @ Mh / 2 + Mh @ Mh @ Mh / 6 + Mh @ Mh @ Mh @ Mh / 24
    assert np.allclose(rk4_step(lambda v: M @ v, y, dt), taylor @ y, rtol=0, atol=1e-14)


def test_rk4_zero_field():
    y = np.array([1.0, -2.0, 3.0])
    assert np.array_equal(rk4_step(lambda v: np.zeros_like(v), y, 0.1), y)


def test_rk4_non_finite():
    with pytest.raises(NumericError):
        rk4_step(lambda v: np.full_like(v, np.inf), np.zeros(2), 0.1)


def test_harmonic_oscillator_energy():
    mon = Monitor("energy", lambda y: 0.5 * float(y @ y), 1e-10)
    traj = integrate(lambda y: np.array([y[1], -y[0]]), np.array([1.0, 0.0]), 10.0, 1e-3, [mon])
    assert traj.max_drift("energy") <= 1e-10
    assert np.allclose(traj.final, [np.cos(10.0), -np.sin(10.0)], atol=1e-11)


# ---- integrate

def test_zero_horizon():
    traj = integrate(lambda y: y, np.ones(2), 0.0, 0.1)
    assert len(traj) == 1 and np.array_equal(traj.final, np.ones(2))


def test_integrate_argument_checks():
    with pytest.raises(ValueError):
        integrate(lambda y: y, np.ones(1), 1.0, 0.0)
    with pytest.raises(ValueError):
        integrate(lambda y: y, np.ones(1), 1.0, 0.3)


def test_record_every_keeps_final_state():
    traj = integrate(lambda y: -y, np.ones(1), 1.05, 0.01, record_every=10)
    assert traj.times[-1] == pytest.approx(1.05)
    assert np.allclose(np.diff(traj.times[:-1]), 0.1)
    assert traj.final[0] == pytest.approx(np.exp(-1.05), rel=1e-9)


def test_integrity_error_names_monitor():
    mon = Monitor("norm", lambda y: float(y @ y), 1e-12)
    with pytest.raises(IntegrityError, match="norm"):
        integrate(lambda y: y, np.ones(2), 1.0, 0.01, [mon])


def test_constraint_monitor_uses_target():
    mon = Monitor("c", lambda y: y[0], 1e-3, relative=False, target=0.0)
    traj = integrate(lambda y: np.zeros(1), np.array([5e-4]), 0.1, 0.01, [mon])
    assert traj.max_drift("c") == pytest.approx(5e-4)


def test_projection_hook_repairs_rotation():
    # kinematics dR/dt = R hat(w) with a deliberately sloppy projection cadence
    w = np.array([0.3, -1.1, 0.7])
    W = so3_hat(w)

    def f(y):
        R = y.reshape(3, 3)
        return (R @ W).ravel()

    def proj(y):
        return maybe_reorthogonalize(y.reshape(3, 3)).ravel()

    traj = integrate(f, np.eye(3).ravel(), 50.0, 0.05, projection=proj, stride=1)
    assert max(orthogonality_defect(y.reshape(3, 3)) for y in traj.states) <= 1e-10
    # projection never increases the defect and is idempotent
    R = expm(W) + 1e-6
    assert orthogonality_defect(proj(R.ravel()).reshape(3, 3)) <= orthogonality_defect(R)
    P = proj(R.ravel())
    assert np.allclose(proj(P), P, atol=1e-15)


def test_determinism():
    f = euler_top([1.0, 2.0, 3.0])
    a = integrate(f, np.array([1.0, 0.5, -0.3]), 5.0, 1e-2)
    b = integrate(f, np.array([1.0, 0.5, -0.3]), 5.0, 1e-2)
    assert np.array_equal(a.states, b.states)


def test_step_halving_order_four():
    f = euler_top([1.0, 2.0, 3.0])
    w0 = np.array([1.0, 0.5, -0.3])
    ref = integrate_adaptive(f, w0, 10.0, t_eval=np.array([10.0]), rtol=1e-13, atol=1e-15).final
    e1 = np.linalg.norm(integrate(f, w0, 10.0, 0.1).final - ref)
    e2 = np.linalg.norm(integrate(f, w0, 10.0, 0.05).final - ref)
    assert 12 <= e1 / e2 <= 20


def test_with_monitors_on_adaptive_output():
    f = euler_top([1.0, 2.0, 3.0])
    traj = integrate_adaptive(f, np.array([1.0, 0.5, -0.3]), 10.0, t_eval=np.linspace(0, 10, 11))
    with_monitors(traj, [Monitor("E", lambda w: float(w @ (np.array([1, 2, 3]) * w)), 1e-9)])
    assert traj.max_drift("E") < 1e-10


# ---- divergence and Liouville

def test_divergence_free_euler_top():
    f = euler_top([1.0, 2.0, 3.0])
    rng = np.random.default_rng(0)
    for _ in range(5):
        assert abs(divergence_estimate(f, rng.standard_normal(3))) <= 1e-8


@given(seeds)
def test_divergence_of_linear_field(seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((5, 5))
    assert divergence_estimate(lambda y: M @ y, rng.standard_normal(5)) == pytest.approx(np.trace(M), abs=1e-9)


def test_divergence_of_gradient_field():
    H = np.array([[2.0, 1.0], [1.0, 3.0]])
    assert divergence_estimate(lambda y: H @ y, np.array([0.3, 0.1])) == pytest.approx(5.0, abs=1e-9)


def test_liouville_residual_cases():
    f = euler_top([1.0, 2.0, 3.0])
    states = np.random.default_rng(1).standard_normal((5, 3))
    assert np.max(liouville_residual(f, lambda y: 1.0, states)) <= 1e-8
    # a constant density on a contracting linear field leaves |trace| as the residual
    M = np.diag([-1.0, -2.0])
    res = liouville_residual(lambda y: M @ y, lambda y: 1.0, np.ones((1, 2)))
    assert res[0] == pytest.approx(3.0, abs=1e-8)


# ---- reparameterization

def test_reparameterize_identity_and_scaling():
    t = np.linspace(0, 5, 501)
    states = np.column_stack([np.sin(t), np.cos(t)])
    traj = Trajectory(t, states)
    same = reparameterize(traj, lambda y: 1.0)
    assert np.max(np.abs(same.states - states)) <= 1e-10
    double = reparameterize(traj, lambda y: 2.0)
    assert double.times[-1] == pytest.approx(10.0)
    assert np.allclose(double.channels["t"], double.times / 2)
    spline = reparameterize(traj, lambda y: 2.0, method="spline")
    assert spline.times[-1] == pytest.approx(10.0)


def test_reparameterize_rejects_nonpositive_rate():
    traj = Trajectory(np.linspace(0, 1, 5), np.zeros((5, 1)))
    with pytest.raises(RateError):
        reparameterize(traj, lambda y: 0.0)


def test_reparameterize_state_dependent_rate():
    # rate 1 + y on y(t) = t gives tau = t + t^2 / 2
    t = np.linspace(0, 2, 2001)
    traj = Trajectory(t, t[:, None])
    out = reparameterize(traj, lambda y: 1.0 + y[0], method="spline")
    assert out.times[-1] == pytest.approx(4.0, abs=1e-12)
    expect = -1 + np.sqrt(1 + 2 * out.times)
    assert np.max(np.abs(out.states[:, 0] - expect)) < 1e-8


# ---- rotation numbers

def test_rotation_number_pure_rotation():
    t = np.arange(0, 100, 0.01)
    w, err = rotation_number(t, np.cos(1.7 * t), np.sin(1.7 * t))
    assert abs(w - 1.7) <= 1e-10


@settings(max_examples=5, deadline=None)
@given(st.floats(min_value=0.5, max_value=2.0), st.floats(min_value=0.1, max_value=0.8))
def test_rotation_number_modulated(omega, eps):
    # phase omega t + eps sin(t) over many periods has mean rate omega
    t = np.arange(0, 2 * np.pi * 1e4, 0.05)
    ph = omega * t + eps * np.sin(t)
    w, _ = rotation_number(t, np.cos(ph), np.sin(ph))
    assert abs(w - omega) <= 1e-6


def test_rotation_number_degenerate():
    t = np.linspace(0, 1, 10)
    with pytest.raises(DegenerateOrbitError):
        rotation_number(t, np.zeros(10), np.zeros(10))
