import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nhflows.errors import DegenerateBasisError, DimensionError, ProjectionError, WedgeIndexError
from nhflows.liealg import (
    SO3_VECTOR_TO_WEDGE,
    adjoint,
    algebra_dim,
    commutator,
    cross3,
    dim_to_n,
    hat,
    killing,
    maybe_reorthogonalize,
    orthogonality_defect,
    project_span,
    reorthogonalize,
    so,
    so3_hat,
    so3_operator,
    so3_vee,
    vee,
    wedge,
    wedge_pairs,
    wedge_position,
)

dims = st.integers(min_value=2, max_value=6)
seeds = st.integers(min_value=0, max_value=2**31 - 1)


def random_skew(rng, n):
    a = rng.standard_normal((n, n))
    return a - a.T


def random_rotation(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


# ---- wedge basis

def test_wedge_entries():
    X = wedge(1, 2, 3)
    assert X[0, 1] == 1 and X[1, 0] == -1 and np.count_nonzero(X) == 2
    X = wedge(2, 3, 3)
    assert X[1, 2] == 1 and X[2, 1] == -1 and np.count_nonzero(X) == 2
    X = wedge(1, 4, 4)
    assert X[0, 3] == 1 and X[3, 0] == -1 and np.count_nonzero(X) == 2


@pytest.mark.parametrize("i,j,n", [(2, 1, 3), (1, 1, 3), (0, 2, 3), (1, 4, 3)])
def test_wedge_invalid_index(i, j, n):
    with pytest.raises(WedgeIndexError):
        wedge(i, j, n)
    with pytest.raises(WedgeIndexError):
        wedge_position(i, j, n)


def test_lexicographic_order():
    assert wedge_pairs(4) == ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
    assert wedge_position(3, 4, 4) == 5
    assert algebra_dim(5) == 10 and dim_to_n(10) == 5
    with pytest.raises(DimensionError):
        dim_to_n(4)


@given(dims, seeds)
def test_hat_vee_round_trip(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(algebra_dim(n))
    X = hat(v)
    assert np.allclose(X, -X.T)
    assert np.array_equal(vee(X), v)


# ---- Killing form

def test_killing_values():
    assert killing(wedge(1, 2, 3), wedge(1, 2, 3)) == pytest.approx(1.0)
    assert killing(wedge(1, 2, 3), wedge(1, 3, 3)) == 0.0


def test_killing_dimension_mismatch():
    with pytest.raises(DimensionError):
        killing(wedge(1, 2, 3), wedge(1, 2, 4))
    with pytest.raises(DimensionError):
        commutator(wedge(1, 2, 3), wedge(1, 2, 4))
    with pytest.raises(DimensionError):
        adjoint(np.eye(4), wedge(1, 2, 3))


@given(dims, seeds)
def test_killing_is_coordinate_dot(n, seed):
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal((2, algebra_dim(n)))
    assert killing(hat(u), hat(v)) == pytest.approx(float(u @ v), abs=1e-12)
    assert killing(hat(u), hat(u)) == pytest.approx(float(np.sum(u**2)), abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_wedge_basis_orthonormal(n):
    basis = [wedge(i + 1, j + 1, n) for i, j in wedge_pairs(n)]
    gram = np.array([[killing(a, b) for b in basis] for a in basis])
    assert np.allclose(gram, np.eye(len(basis)), atol=1e-15)


# ---- brackets

def test_bracket_sign_convention():
    # E12 E23 - E23 E12 has (1,3) entry +1
    assert np.array_equal(commutator(wedge(1, 2, 3), wedge(2, 3, 3)), wedge(1, 3, 3))
    alg = so(3)
    e = np.eye(3)
    assert np.array_equal(alg.bracket(e[0], e[2]), e[1])


@given(dims, seeds)
def test_commutator_antisymmetric_and_skew(n, seed):
    rng = np.random.default_rng(seed)
    X, Y = random_skew(rng, n), random_skew(rng, n)
    assert np.allclose(commutator(X, X), 0)
    C = commutator(X, Y)
    assert np.allclose(C, -C.T, atol=1e-12)


@settings(max_examples=50)
@given(dims, seeds)
def test_jacobi_identity(n, seed):
    rng = np.random.default_rng(seed)
    X, Y, Z = (random_skew(rng, n) for _ in range(3))
    J = commutator(X, commutator(Y, Z)) + commutator(Y, commutator(Z, X)) + commutator(Z, commutator(X, Y))
    assert np.max(np.abs(J)) < 1e-12


@given(dims, seeds)
def test_ad_skewness(n, seed):
    rng = np.random.default_rng(seed)
    X, Y, Z = (random_skew(rng, n) for _ in range(3))
    assert abs(killing(commutator(X, Y), Z) + killing(Y, commutator(X, Z))) < 1e-12


@given(dims, seeds)
def test_structure_constants_match_matrices(n, seed):
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal((2, algebra_dim(n)))
    alg = so(n)
    assert np.allclose(alg.bracket(u, v), vee(commutator(hat(u), hat(v))), atol=1e-12)
    assert np.allclose(alg.ad(u), -alg.ad(u).T)


# ---- adjoint action

def test_adjoint_identity():
    X = wedge(1, 3, 4)
    assert np.array_equal(adjoint(np.eye(4), X), X)


def test_adjoint_quarter_turn():
    # rotation by pi/2 in the (1,2) plane
    g = np.eye(3)
    g[:2, :2] = [[0.0, -1.0], [1.0, 0.0]]
    Y = adjoint(g, wedge(1, 3, 3))
    assert np.allclose(Y, -wedge(2, 3, 3))


@given(dims, seeds)
def test_adjoint_isometry(n, seed):
    rng = np.random.default_rng(seed)
    g = random_rotation(rng, n)
    X, Y = random_skew(rng, n), random_skew(rng, n)
    assert abs(killing(adjoint(g, X), adjoint(g, Y)) - killing(X, Y)) < 1e-12


# ---- projections

def test_project_span_cases():
    basis = [wedge(1, 2, 4), wedge(3, 4, 4)]
    X = 2.0 * wedge(1, 2, 4) - wedge(3, 4, 4)
    assert np.allclose(project_span(X, basis), X)
    assert np.allclose(project_span(wedge(1, 3, 4), basis), 0)


def test_project_onto_lower_block_zeroes_first_row():
    n = 4
    sub = [wedge(i, j, n) for i in range(2, n + 1) for j in range(i + 1, n + 1)]
    rng = np.random.default_rng(0)
    P = project_span(random_skew(rng, n), sub)
    assert np.all(P[0] == 0) and np.all(P[:, 0] == 0)


def test_project_span_degenerate():
    with pytest.raises(DegenerateBasisError):
        project_span(wedge(1, 2, 3), [wedge(1, 2, 3), 2 * wedge(1, 2, 3)])


@given(dims.filter(lambda n: n >= 3), seeds)
def test_project_span_properties(n, seed):
    rng = np.random.default_rng(seed)
    basis = [random_skew(rng, n) for _ in range(2)]
    X = random_skew(rng, n)
    P = project_span(X, basis)
    assert np.allclose(project_span(P, basis), P, atol=1e-12)
    for b in basis:
        assert abs(killing(X - P, b)) < 1e-10


# ---- orthogonality repair

def test_reorthogonalize_cases():
    rng = np.random.default_rng(1)
    g = random_rotation(rng, 4)
    assert np.allclose(reorthogonalize(g), g, atol=1e-14)
    assert np.allclose(reorthogonalize(1.01 * g), g, atol=1e-14)
    r = reorthogonalize(g + 1e-4 * rng.standard_normal((4, 4)))
    assert orthogonality_defect(r) <= 1e-14
    assert np.linalg.det(r) > 0


def test_reorthogonalize_failures():
    with pytest.raises(ProjectionError):
        reorthogonalize(2.0 * np.eye(3))
    with pytest.raises(ProjectionError):
        reorthogonalize(np.diag([1.0, 1.0, -1.0]))


def test_maybe_reorthogonalize_threshold():
    g = np.eye(3) * (1 + 1e-12)
    assert np.array_equal(maybe_reorthogonalize(g), g)
    assert orthogonality_defect(maybe_reorthogonalize(np.eye(3) * (1 + 1e-6))) < 1e-14


# ---- so(3) and vectors

@given(seeds)
def test_so3_vector_chart(seed):
    rng = np.random.default_rng(seed)
    w, v = rng.standard_normal((2, 3))
    assert np.allclose(so3_hat(w) @ v, np.cross(w, v))
    assert np.allclose(so3_vee(so3_hat(w)), w)
    P = SO3_VECTOR_TO_WEDGE
    assert np.allclose(hat(P @ w), so3_hat(w))
    # the chart turns the cross product into the bracket
    assert np.allclose(so(3).bracket(P @ w, P @ v), P @ np.cross(w, v), atol=1e-12)
    J = np.diag(rng.uniform(1, 2, 3))
    assert np.allclose(so3_operator(J) @ (P @ w), P @ (J @ w))


@given(seeds)
def test_cross3_matches_numpy(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal((2, 3))
    assert np.allclose(cross3(a, b), np.cross(a, b), atol=1e-14)
    A, B = rng.standard_normal((2, 5, 3))
    assert np.allclose(cross3(A, B), np.cross(A, B), atol=1e-14)
