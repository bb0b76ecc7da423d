"""Linear algebra on so(n) in the wedge basis.

Elements of so(n) are handled in two interchangeable forms: as skew
matrices of shape (n, n) and as coordinate vectors of length
m = n(n-1)/2 with respect to the wedge basis

    (E_i ^ E_j)_{kl} = delta_ik delta_jl - delta_jk delta_il,  i < j,

ordered lexicographically in (i, j).  The bilinear form
<X, Y> = -1/2 tr(XY) makes the wedge basis orthonormal, so in coordinates
it is the Euclidean dot product and symmetric operators are symmetric
matrices.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import (
    DegenerateBasisError,
    DimensionError,
    ProjectionError,
    WedgeIndexError,
)

REORTHO_THRESHOLD = 1e-10
MAX_PROJECTION_DISTANCE = 0.1


def algebra_dim(n: int) -> int:
    """Dimension n(n-1)/2 of so(n)."""
    return n * (n - 1) // 2


def dim_to_n(m: int) -> int:
    """Invert ``algebra_dim``; raise if m is not triangular."""
    n = int(round((1 + np.sqrt(1 + 8 * m)) / 2))
    if algebra_dim(n) != m:
        raise DimensionError(f"{m} is not the dimension of any so(n)")
    return n


@lru_cache(maxsize=None)
def wedge_pairs(n: int) -> tuple[tuple[int, int], ...]:
    """Zero-based index pairs (i, j), i < j, in lexicographic order."""
    return tuple((i, j) for i in range(n) for j in range(i + 1, n))


@lru_cache(maxsize=None)
def _triu(n: int) -> tuple[np.ndarray, np.ndarray]:
    rows, cols = np.triu_indices(n, k=1)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


def wedge_position(i: int, j: int, n: int) -> int:
    """Coordinate position of E_i ^ E_j (one-based i < j)."""
    if not (1 <= i < j <= n):
        raise WedgeIndexError(f"need 1 <= i < j <= {n}, got ({i}, {j})")
    return wedge_pairs(n).index((i - 1, j - 1))


def wedge(i: int, j: int, n: int) -> np.ndarray:
    """The basis matrix E_i ^ E_j with one-based indices i < j."""
    if not (1 <= i < j <= n):
        raise WedgeIndexError(f"need 1 <= i < j <= {n}, got ({i}, {j})")
    X = np.zeros((n, n))
    X[i - 1, j - 1] = 1.0
    X[j - 1, i - 1] = -1.0
    return X


def outer_wedge(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """The bivector u ^ v = u v^T - v u^T as a skew matrix."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return np.outer(u, v) - np.outer(v, u)


def hat(v: np.ndarray, n: int | None = None) -> np.ndarray:
    """Skew matrix with wedge coordinates ``v``."""
    v = np.asarray(v, dtype=float)
    if n is None:
        n = dim_to_n(v.shape[-1])
    elif v.shape[-1] != algebra_dim(n):
        raise DimensionError(f"expected {algebra_dim(n)} coordinates, got {v.shape[-1]}")
    rows, cols = _triu(n)
    X = np.zeros(v.shape[:-1] + (n, n))
    X[..., rows, cols] = v
    X[..., cols, rows] = -v
    return X


def vee(X: np.ndarray) -> np.ndarray:
    """Wedge coordinates of a skew matrix (upper triangle, row major)."""
    X = np.asarray(X, dtype=float)
    if X.ndim < 2 or X.shape[-1] != X.shape[-2]:
        raise DimensionError(f"expected square matrices, got shape {X.shape}")
    rows, cols = _triu(X.shape[-1])
    return X[..., rows, cols].copy()


def killing(X: np.ndarray, Y: np.ndarray) -> float:
    """The invariant form -1/2 tr(XY)."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape:
        raise DimensionError(f"shape mismatch {X.shape} vs {Y.shape}")
    return -0.5 * float(np.einsum("ij,ji->", X, Y))


def commutator(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Matrix commutator XY - YX."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape != Y.shape:
        raise DimensionError(f"shape mismatch {X.shape} vs {Y.shape}")
    return X @ Y - Y @ X


def adjoint(g: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Conjugation g^{-1} X g for an orthogonal matrix g."""
    g = np.asarray(g, dtype=float)
    X = np.asarray(X, dtype=float)
    if g.shape != X.shape:
        raise DimensionError(f"shape mismatch {g.shape} vs {X.shape}")
    return g.T @ X @ g


def project_span(X: np.ndarray, basis) -> np.ndarray:
    """Orthogonal projection of X onto the span of ``basis``.

    ``basis`` is a sequence of skew matrices; orthogonality is taken with
    respect to the invariant form.  A dependent spanning set raises
    ``DegenerateBasisError``.
    """
    X = np.asarray(X, dtype=float)
    B = np.array([vee(b) for b in basis])
    if B.size == 0:
        return np.zeros_like(X)
    if B.shape[1] != algebra_dim(X.shape[0]):
        raise DimensionError("basis and element belong to different algebras")
    gram = B @ B.T
    w = np.linalg.eigvalsh(gram)
    if w[0] <= 1e-12 * max(w[-1], 1.0):
        raise DegenerateBasisError("spanning set is linearly dependent")
    coef = np.linalg.solve(gram, B @ vee(X))
    return hat(coef @ B, X.shape[0])


def orthogonality_defect(g: np.ndarray) -> float:
    """Frobenius norm of g^T g - I."""
    g = np.asarray(g, dtype=float)
    return float(np.linalg.norm(g.T @ g - np.eye(g.shape[0])))


def reorthogonalize(g: np.ndarray) -> np.ndarray:
    """Nearest rotation to ``g`` (orthogonal polar factor).

    Raises ``ProjectionError`` when ``g`` is farther than 0.1 (Frobenius)
    from the orthogonal group or when the nearest orthogonal matrix is a
    reflection.
    """
    g = np.asarray(g, dtype=float)
    u, _, vt = np.linalg.svd(g)
    r = u @ vt
    if np.linalg.norm(g - r) > MAX_PROJECTION_DISTANCE:
        raise ProjectionError("matrix is too far from the orthogonal group")
    if np.linalg.det(r) <= 0:
        raise ProjectionError("matrix has non-positive determinant")
    return r


def maybe_reorthogonalize(g: np.ndarray, threshold: float = REORTHO_THRESHOLD) -> np.ndarray:
    """Reorthogonalize only when the orthogonality defect exceeds ``threshold``."""
    if orthogonality_defect(g) > threshold:
        return reorthogonalize(g)
    return np.asarray(g, dtype=float)


class SoAlgebra:
    """Coordinate arithmetic on so(n) backed by structure constants.

    ``structure[k, i, j]`` is the k-th wedge coordinate of [E_i, E_j].
    """

    def __init__(self, n: int):
        if n < 2:
            raise DimensionError("so(n) needs n >= 2")
        self.n = n
        self.m = algebra_dim(n)
        self.pairs = wedge_pairs(n)
        self.basis = hat(np.eye(self.m), n)
        brackets = np.einsum("aij,bjk->abik", self.basis, self.basis)
        brackets = brackets - brackets.transpose(1, 0, 2, 3)
        self.structure = np.ascontiguousarray(vee(brackets).transpose(2, 0, 1))
        # ad_flat[i] reshaped gives ad(E_i) as an m x m matrix
        self._ad_flat = self.structure.transpose(1, 0, 2).reshape(self.m, self.m * self.m)

    def ad(self, u: np.ndarray) -> np.ndarray:
        """Matrix of Y -> [u, Y] in wedge coordinates (antisymmetric)."""
        return (u @ self._ad_flat).reshape(self.m, self.m)

    def bracket(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Wedge coordinates of [u, v]."""
        return self.ad(u) @ v


@lru_cache(maxsize=None)
def so(n: int) -> SoAlgebra:
    """Cached ``SoAlgebra`` instance for so(n)."""
    return SoAlgebra(n)


# so(3) and R^3: hat(w) v = w x v.  Wedge coordinates (w12, w13, w23) of
# hat(w) are (-w3, w2, -w1); the change of basis is its own inverse.
SO3_VECTOR_TO_WEDGE = np.array([[0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]])


def so3_hat(w: np.ndarray) -> np.ndarray:
    """Cross-product matrix of a 3-vector."""
    w = np.asarray(w, dtype=float)
    return np.array([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])


def so3_vee(X: np.ndarray) -> np.ndarray:
    """Inverse of ``so3_hat``."""
    X = np.asarray(X, dtype=float)
    return np.array([X[2, 1], X[0, 2], X[1, 0]])


def so3_operator(J: np.ndarray) -> np.ndarray:
    """Wedge-basis matrix of the operator acting as J on 3-vectors."""
    P = SO3_VECTOR_TO_WEDGE
    return P @ np.asarray(J, dtype=float) @ P


def cross3(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cross product of 3-vectors, row-wise when ``a`` is a (k, 3) array.

    Equivalent to ``np.cross`` but much cheaper for the tiny arrays used in
    the vector fields.
    """
    if a.ndim == 1:
        a0, a1, a2 = a.tolist()
        b0, b1, b2 = b.tolist()
        return np.array([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
    return np.stack([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0], axis=-1)
