import numpy as np
import pytest
from hypothesis import given, strategies as st

from nhflows.errors import ConditioningError, DegenerateMetricError, MeasureError, ParameterError, StateError
from nhflows.integrate import integrate, liouville_residual
from nhflows.liealg import SO3_VECTOR_TO_WEDGE, so, so3_operator
from nhflows.lplusr import (
    ChaplyginSphere,
    LplusRSystem,
    SphericalSupport,
    chaplygin_inertia,
    chaplygin_sphere_rhs,
    frame_products,
    limit_system,
    lplusr_measure,
    lplusr_rhs,
    lr_limit_sweep,
    so3_lplusr_from_vectors,
    support_gamma_from_balls,
)
from nhflows.lr import LrSystem
from nhflows.operators import InertiaOperator, physical_inertia, veselova_distribution

seeds = st.integers(min_value=0, max_value=2**31 - 1)
P = SO3_VECTOR_TO_WEDGE


def unit(v):
    return v / np.linalg.norm(v)


def random_spd(rng, m, scale=0.5):
    a = rng.standard_normal((m, m))
    return scale * a @ a.T / m


def random_frame(rng):
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[2] *= -1
    return q


def euler_top(I):
    Iinv = np.linalg.inv(I)
    return lambda w: Iinv @ np.cross(I @ w, w)


# ---- general L+R flow

def test_lplusr_rest():
    Iop = physical_inertia([1.0, 2.0, 3.0, 4.0])
    G = random_spd(np.random.default_rng(0), 6)
    dw, dG = lplusr_rhs(Iop, np.zeros(6), G)
    assert np.array_equal(dw, np.zeros(6)) and np.array_equal(dG, np.zeros((6, 6)))


@given(seeds)
def test_lplusr_without_gamma_is_free_flow(seed):
    rng = np.random.default_rng(seed)
    Iop = physical_inertia(rng.uniform(0.5, 2.0, 4))
    w = rng.standard_normal(6)
    dw, dG = lplusr_rhs(Iop, w, np.zeros((6, 6)))
    assert np.array_equal(dG, np.zeros((6, 6)))
    # x = I omega obeys dx/dt = [x, A x] with A = I^{-1}
    x = Iop.mat @ w
    assert np.allclose(Iop.mat @ dw, so(4).bracket(x, Iop.inverse_mat @ x), atol=1e-12)


@given(seeds)
def test_lplusr_integrals_have_zero_derivative(seed):
    rng = np.random.default_rng(seed)
    Iop = physical_inertia(rng.uniform(0.5, 2.0, 4))
    sys = LplusRSystem(Iop)
    y = sys.pack(rng.standard_normal(6), random_spd(rng, 6))
    d = sys.rhs(y)
    w, G = sys.unpack(y)
    dw, dG = sys.unpack(d)
    B = Iop.mat + G
    dE = float(w @ B @ dw) + 0.5 * float(w @ dG @ w)
    Bw = B @ w
    dM = 2.0 * float(Bw @ (dG @ w + B @ dw))
    assert abs(dE) <= 1e-12 * max(1.0, sys.energy(y))
    assert abs(dM) <= 1e-11 * max(1.0, sys.momentum_norm(y))


def test_lplusr_measure_values():
    Iop = physical_inertia([1.0, 2.0, 3.0])
    assert lplusr_measure(Iop, np.zeros((3, 3))) == pytest.approx(np.sqrt(np.prod(np.diag(Iop.mat))))
    with pytest.raises(MeasureError):
        lplusr_measure(Iop, -10.0 * np.eye(3))


def test_lplusr_degenerate_metric():
    Iop = physical_inertia([1.0, 2.0, 3.0])
    G = -np.diag(np.diag(Iop.mat) * np.array([1.0, 0.0, 0.0]))
    sys = LplusRSystem(Iop)
    with pytest.raises(DegenerateMetricError):
        sys.rhs(sys.pack([1.0, 0.0, 0.0], G))
    with pytest.raises(ConditioningError):
        lplusr_rhs(Iop, [1.0, 0.0, 0.0], G)
    with pytest.raises(ParameterError):
        sys.pack(np.zeros(3), np.array([[1.0, 2.0, 0], [0, 1, 0], [0, 0, 1]]))


def test_lplusr_flow_invariants_and_liouville():
    rng = np.random.default_rng(3)
    Iop = physical_inertia([1.0, 1.5, 2.0, 3.0])
    sys = LplusRSystem(Iop)
    y0 = sys.pack(rng.standard_normal(6), random_spd(rng, 6))
    traj = integrate(sys.rhs, y0, 10.0, 1e-3, record_every=500)
    E = np.array([sys.energy(y) for y in traj.states])
    M = np.array([sys.momentum_norm(y) for y in traj.states])
    S = np.array([sys.gamma_spectrum(y) for y in traj.states])
    assert np.max(np.abs(E - E[0])) / E[0] <= 1e-8
    assert np.max(np.abs(M - M[0])) / M[0] <= 1e-8
    assert np.max(np.abs(S - S[0])) <= 1e-9
    assert np.max(liouville_residual(sys.rhs, sys.density, traj.states)) <= 1e-6


# ---- Chaplygin sphere

def chaplygin_state(rng):
    F = random_frame(rng)
    return np.concatenate([rng.standard_normal(3), F.ravel()])


def test_chaplygin_massless_is_euler_top():
    rng = np.random.default_rng(0)
    I = np.diag([1.0, 2.0, 3.0])
    y = chaplygin_state(rng)
    dOm, *_ = chaplygin_sphere_rhs(I, 0.0, 1.0, y[:3], y[3:6], y[6:9], y[9:])
    assert np.allclose(dOm, euler_top(I)(y[:3]), atol=1e-14)


@given(seeds)
def test_chaplygin_momentum_equation(seed):
    rng = np.random.default_rng(seed)
    sys = ChaplyginSphere(chaplygin_inertia([1.0, 1.5, 2.0], 1.0, 0.8), 1.0, 0.8)
    y = chaplygin_state(rng)
    d = sys.rhs(y)
    Om, g = y[:3], y[9:]
    # d/dt K with K = I Omega - m a^2 (Omega, gamma) gamma
    dK = sys.I @ d[:3] - sys.k * (float(d[:3] @ g) + float(Om @ d[9:])) * g - sys.k * float(Om @ g) * d[9:]
    assert np.max(np.abs(dK - np.cross(sys.K(y), Om))) <= 1e-12


@given(seeds)
def test_chaplygin_matches_rank_one_lplusr(seed):
    rng = np.random.default_rng(seed)
    I = chaplygin_inertia([1.0, 1.5, 2.0], 0.7, 1.0)
    sys = ChaplyginSphere(I, 0.7, 1.0)
    y = chaplygin_state(rng)
    g = y[9:]
    Iop, Gamma = so3_lplusr_from_vectors(I, -sys.k * np.outer(g, g))
    dw, dG = lplusr_rhs(Iop, P @ y[:3], Gamma)
    assert np.allclose(dw, P @ sys.rhs(y)[:3], atol=1e-12)
    dg = sys.rhs(y)[9:]
    assert np.allclose(dG, so3_operator(-sys.k * (np.outer(dg, g) + np.outer(g, dg))), atol=1e-12)


@given(seeds)
def test_chaplygin_rank_one_density(seed):
    rng = np.random.default_rng(seed)
    I = chaplygin_inertia([1.0, 1.5, 2.0], 0.7, 1.0)
    sys = ChaplyginSphere(I, 0.7, 1.0)
    y = chaplygin_state(rng)
    g = y[9:]
    expect = np.sqrt(np.linalg.det(I) * (1.0 - sys.k * float(g @ np.linalg.solve(I, g))))
    assert sys.density(y) == pytest.approx(expect, rel=1e-12)


def test_chaplygin_conservation():
    sys = ChaplyginSphere(chaplygin_inertia([1.0, 1.5, 2.0], 1.0, 0.8), 1.0, 0.8)
    y0 = chaplygin_state(np.random.default_rng(4))
    traj = integrate(sys.rhs, y0, 20.0, 1e-3, record_every=500)
    ref = sys.integrals(y0)
    for y in traj.states:
        for k, v in sys.integrals(y).items():
            assert abs(v - ref[k]) <= 1e-8 * max(1.0, abs(ref[k])), k
    prods = np.array([frame_products(y) for y in traj.states])
    assert np.max(np.abs(prods - [1, 1, 1, 0, 0, 0])) <= 1e-9
    assert np.max(liouville_residual(sys.rhs, sys.density, traj.states[::4])) <= 1e-6


def test_chaplygin_parameter_errors():
    with pytest.raises(ParameterError):
        ChaplyginSphere(np.eye(3), 2.0, 1.0)
    with pytest.raises(ParameterError):
        ChaplyginSphere(np.eye(3), -1.0, 1.0)


# ---- spherical support

def test_support_without_gamma_is_euler_top():
    I = np.diag([1.0, 2.0, 3.0])
    sys = SphericalSupport(I, 0.0, 0.0, 0.0)
    y = chaplygin_state(np.random.default_rng(1))
    assert np.allclose(sys.rhs(y)[:3], euler_top(I)(y[:3]), atol=1e-14)


def test_support_conservation():
    sys = SphericalSupport(np.diag([1.0, 2.0, 3.0]), 0.5, 0.3, 0.8)
    y0 = chaplygin_state(np.random.default_rng(2))
    traj = integrate(sys.rhs, y0, 20.0, 1e-3, record_every=500)
    ref = sys.integrals(y0)
    for y in traj.states:
        for k, v in sys.integrals(y).items():
            assert abs(v - ref[k]) <= 1e-8 * max(1.0, abs(ref[k])), k
    prods = np.array([frame_products(y) for y in traj.states])
    assert np.max(np.abs(prods - [1, 1, 1, 0, 0, 0])) <= 1e-8
    assert np.max(liouville_residual(sys.rhs, sys.density, traj.states[::4])) <= 1e-6


@given(seeds)
def test_support_density_expansion(seed):
    rng = np.random.default_rng(seed)
    J = np.diag(rng.uniform(1.0, 3.0, 3))
    a, b, c = rng.uniform(0.0, 2.0, 3)
    sys = SphericalSupport(J, a, b, c)
    y = chaplygin_state(rng)
    assert sys.density_expanded(y) == pytest.approx(sys.density(y), rel=1e-10)


def test_support_degenerate_metric():
    sys = SphericalSupport(np.diag([1.0, 2.0, 3.0]), -1.0, 0.0, 0.0)
    y = np.concatenate([[1.0, 0.0, 0.0], np.eye(3).ravel()])
    with pytest.raises(DegenerateMetricError):
        sys.rhs(y)
    with pytest.raises(MeasureError):
        sys.density(y)


def test_balls_single_is_rank_one():
    I, G = support_gamma_from_balls([2.0], [0.5], [[0.0, 0.0, 1.0]])
    assert np.allclose(G, 8.0 * np.diag([0.0, 0.0, 1.0]))
    assert np.linalg.matrix_rank(G) == 1
    assert np.allclose(I, -8.0 * np.eye(3))


def test_balls_orthogonal_give_identity():
    J = np.diag([20.0, 21.0, 22.0])
    I, G = support_gamma_from_balls([1.0, 4.0, 9.0], [1.0, 2.0, 3.0], np.eye(3), J=J)
    assert np.allclose(G, np.eye(3))
    assert np.allclose(I, J - 3.0 * np.eye(3))


@pytest.mark.parametrize("D,rho,g", [
    ([-1.0], [1.0], [[1.0, 0, 0]]),
    ([1.0], [0.0], [[1.0, 0, 0]]),
    ([1.0], [1.0], [[2.0, 0, 0]]),
    ([1.0, 1.0], [1.0], [[1.0, 0, 0], [0, 1.0, 0]]),
])
def test_balls_errors(D, rho, g):
    with pytest.raises(ParameterError):
        support_gamma_from_balls(D, rho, g)


def test_balls_generic_gamma_is_nondegenerate():
    rng = np.random.default_rng(0)
    dirs = np.array([unit(v) for v in rng.standard_normal((4, 3))])
    _, G = support_gamma_from_balls([1.0, 2.0, 0.5, 1.5], [1.0, 1.2, 0.8, 2.0], dirs)
    assert np.linalg.eigvalsh(G)[0] > 1e-3


# ---- degeneration to the LR flow

def test_limit_zero_eps_is_free_flow():
    Iop = physical_inertia([1.0, 2.0, 3.0])
    dist = veselova_distribution(3)
    sys, y = limit_system(Iop, dist, 0.0, np.array([0.3, -0.2, 0.0]))
    w, G = sys.unpack(y)
    assert np.array_equal(G, np.zeros((3, 3)))
    x = Iop.mat @ w
    assert np.allclose(Iop.mat @ sys.rhs(y)[:3], so(3).bracket(x, Iop.inverse_mat @ x))


def test_limit_sweep_converges():
    Iop = InertiaOperator(3, so3_operator(np.diag([1.0, 2.0, 3.0])))
    dist = veselova_distribution(3)
    rep = lr_limit_sweep(Iop, dist, [10.0, 100.0, 1000.0], 2.0, dt0=2e-3, seed=1)
    assert np.all(np.diff(rep.deviations) < 0)
    assert -1.2 <= rep.slope <= -0.8
    assert rep.density_spread[-1] < rep.density_spread[0]
    assert np.all(rep.steps <= 2e-3)


def test_limit_sweep_rejects_inadmissible_start():
    Iop = physical_inertia([1.0, 2.0, 3.0])
    dist = veselova_distribution(3)
    with pytest.raises(StateError):
        lr_limit_sweep(Iop, dist, [10.0], 1.0, omega0=dist.vectors[0])


def test_limit_lr_reference_matches_start():
    # the reference LR system starts from the same omega
    Iop = physical_inertia([1.0, 2.0, 3.0])
    dist = veselova_distribution(3)
    w0 = dist.d_projector @ np.array([0.3, -0.2, 0.5])
    lr = LrSystem(Iop.inverse(), dist.rho)
    y = lr.initial_state(dist, w0)
    assert np.allclose(Iop.inverse_mat @ y[:3], w0)
