import numpy as np
import pytest
from hypothesis import given, strategies as st

from nhflows.errors import ChainError, ParameterError
from nhflows.liealg import algebra_dim, hat, outer_wedge, so, so3_hat, vee, wedge, wedge_position
from nhflows.operators import (
    Distribution,
    InertiaOperator,
    chain_operator,
    physical_inertia,
    so3_inertia,
    standard_chain,
    suslov_distribution,
    veselova_distribution,
    veselova_inertia,
)

seeds = st.integers(min_value=0, max_value=2**31 - 1)
positive = st.lists(st.floats(min_value=0.1, max_value=10.0), min_size=3, max_size=6)


def test_physical_inertia_values():
    assert np.allclose(physical_inertia([1, 1, 1]).mat, 2 * np.eye(3))
    Iop = physical_inertia([4, 3, 2, 1])
    assert Iop.mat[wedge_position(1, 2, 4), wedge_position(1, 2, 4)] == 7
    assert Iop.mat[wedge_position(3, 4, 4), wedge_position(3, 4, 4)] == 3
    inv = physical_inertia([4, 3, 2, 1], invert=True)
    assert inv.mat[0, 0] == pytest.approx(1 / 7)


@given(positive, seeds)
def test_physical_inertia_matches_matrix_form(I, seed):
    # the operator acts as omega -> I omega + omega I
    rng = np.random.default_rng(seed)
    n = len(I)
    w = rng.standard_normal(algebra_dim(n))
    D = np.diag(I)
    assert np.allclose(physical_inertia(I).mat @ w, vee(D @ hat(w) + hat(w) @ D))


def test_physical_inertia_rejects_nonpositive():
    with pytest.raises(ParameterError):
        physical_inertia([1, 0, 2])


def test_veselova_inertia_values():
    assert np.allclose(veselova_inertia([1, 1, 1]).mat, np.eye(3))
    assert veselova_inertia([1, 2, 3]).mat[0, 0] == pytest.approx(1 / 3)
    with pytest.raises(ParameterError):
        veselova_inertia([1, -2, 3])


@given(st.lists(st.floats(min_value=0.2, max_value=5.0), min_size=3, max_size=3), seeds)
def test_veselova_inertia_vector_identity(A, seed):
    # on so(3): I(x cross y) = (Ax cross Ay) / det A
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal((2, 3))
    A = np.array(A)
    Iop = veselova_inertia(A)
    lhs = Iop(so3_hat(np.cross(x, y)))
    rhs = so3_hat(np.cross(A * x, A * y)) / np.prod(A)
    assert np.allclose(lhs, rhs, atol=1e-12)
    # and, equivalently, maps x ^ y to Ax ^ Ay / det A in any dimension
    assert np.allclose(Iop(outer_wedge(x, y)), outer_wedge(A * x, A * y) / np.prod(A), atol=1e-12)


@given(positive, seeds)
def test_inverse_pair_and_commuting_diagonals(I, seed):
    rng = np.random.default_rng(seed)
    n = len(I)
    Iop = physical_inertia(I)
    X = hat(rng.standard_normal(algebra_dim(n)))
    assert np.allclose(Iop.inverse()(Iop(X)), X, atol=1e-12)
    V = veselova_inertia(I).mat
    assert np.allclose(Iop.mat @ V - V @ Iop.mat, 0)


def test_inertia_operator_validation():
    with pytest.raises(ParameterError):
        InertiaOperator(3, np.diag([1.0, -1.0, 1.0]))
    with pytest.raises(ParameterError):
        InertiaOperator(3, np.array([[1.0, 0.5, 0], [0, 1, 0], [0, 0, 1]]))


def test_so3_inertia_acts_on_vectors():
    J = np.diag([1.0, 2.0, 3.0])
    Iop = so3_inertia(J)
    w = np.array([0.3, -0.2, 0.5])
    assert np.allclose(Iop(so3_hat(w)), so3_hat(J @ w))


# ---- chains

def test_chain_operator_identity():
    Iop = chain_operator(np.eye(1), [1.0], standard_chain(3, 2)[:1] + [np.eye(3)])
    assert np.allclose(Iop.mat, np.eye(3))


def test_chain_operator_spectrum():
    Iop = chain_operator(2 * np.eye(1), [3.0, 5.0], standard_chain(4, 2))
    assert np.allclose(np.sort(Iop.eigenvalues()), [2, 3, 3, 5, 5, 5])


def test_chain_operator_commutes_with_pieces():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((3, 3))
    A0 = a @ a.T + 3 * np.eye(3)
    Iop = chain_operator(A0, [2.0, 7.0], standard_chain(5, 3))
    for w in Iop.chain.pieces:
        P = w @ w.T
        assert np.allclose(Iop.mat @ P, P @ Iop.mat, atol=1e-12)


def test_chain_operator_errors():
    chain = standard_chain(4, 2)
    with pytest.raises(ChainError):
        chain_operator(np.eye(1), [1.0, 1.0], [chain[0], chain[0], chain[2]])
    with pytest.raises(ChainError):
        # span{E12, E23} is not a subalgebra: the bracket gives E13
        bad = np.zeros((2, 6))
        bad[0, wedge_position(1, 2, 4)] = bad[1, wedge_position(2, 3, 4)] = 1
        chain_operator(np.eye(2), [1.0], [bad, np.eye(6)])
    with pytest.raises(ParameterError):
        chain_operator(np.eye(1), [1.0, -1.0], chain)


# ---- distributions

def test_suslov_distribution_counts():
    d = suslov_distribution(4, 2)
    assert d.rho == 1
    assert np.array_equal(d.vectors[0], vee(wedge(3, 4, 4)))
    assert suslov_distribution(4, 3).rho == 0
    d5 = suslov_distribution(5, 3)
    assert d5.rho == 1 and np.array_equal(d5.vectors[0], vee(wedge(4, 5, 5)))
    assert np.allclose(d.vectors @ d.vectors.T, np.eye(d.rho))
    for r in range(1, 5):
        assert suslov_distribution(5, r).rho == (5 - r) * (4 - r) // 2


@pytest.mark.parametrize("n,r", [(4, 0), (4, 4), (2, 1)])
def test_suslov_distribution_range(n, r):
    with pytest.raises(ParameterError):
        suslov_distribution(n, r)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_symmetric_pair(n):
    dist = suslov_distribution(n, 1)
    alg = so(n)
    assert dist.is_subalgebra()
    Ph, Pd = dist.h_projector, dist.d_projector
    D, H = dist.d_basis, dist.vectors
    for a in D:
        for b in D:
            c = alg.bracket(a, b)
            assert np.allclose(Pd @ c, 0)
        for h in H:
            c = alg.bracket(h, a)
            assert np.allclose(Ph @ c, 0)


def test_veselova_distribution():
    d3 = veselova_distribution(3)
    assert d3.rho == 1 and np.array_equal(d3.vectors[0], vee(wedge(2, 3, 3)))
    d4 = veselova_distribution(4)
    assert d4.rho == 3 and d4.is_subalgebra()
    assert np.allclose(d4.d_basis @ d4.d_basis.T, np.eye(3))
    with pytest.raises(ParameterError):
        veselova_distribution(2)


def test_distribution_validation():
    with pytest.raises(ParameterError):
        Distribution(3, np.array([[1.0, 0, 0], [1.0, 0, 0]]))
    with pytest.raises(ParameterError):
        Distribution(3, np.eye(3))
