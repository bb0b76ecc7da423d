"""Inertia operators and constraint distributions on so(n).

Operators are stored as symmetric positive definite m x m matrices in the
wedge basis.  A distribution is stored through an orthonormal basis of its
annihilator, the constraint subspace h; the admissible subspace d is the
orthogonal complement of h.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ChainError, DimensionError, ParameterError
from .liealg import algebra_dim, dim_to_n, hat, so, so3_operator, vee, wedge_pairs

SPD_THRESHOLD = 1e-10


@dataclass(frozen=True)
class ChainStructure:
    """Orthonormal data of a chain g0 < g1 < ... < gN = so(n).

    ``g0`` spans the smallest subalgebra, ``pieces[k]`` spans the
    orthogonal complement w_{k+1} of g_k in g_{k+1}, ``A0`` is the operator
    on g0 in the ``g0`` coordinates and ``s`` the scalars on each w_k.
    """

    g0: np.ndarray
    pieces: tuple[np.ndarray, ...]
    A0: np.ndarray
    s: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class InertiaOperator:
    """Symmetric positive definite operator on so(n), wedge-basis matrix."""

    n: int
    mat: np.ndarray
    chain: ChainStructure | None = field(default=None, repr=False)

    def __post_init__(self):
        mat = np.array(self.mat, dtype=float)
        m = algebra_dim(self.n)
        if mat.shape != (m, m):
            raise DimensionError(f"operator on so({self.n}) must be {m}x{m}, got {mat.shape}")
        if not np.allclose(mat, mat.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(mat).max())):
            raise ParameterError("operator is not symmetric")
        mat = 0.5 * (mat + mat.T)
        if np.linalg.eigvalsh(mat)[0] <= SPD_THRESHOLD:
            raise ParameterError("operator is not positive definite")
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    @property
    def m(self) -> int:
        return self.mat.shape[0]

    def __call__(self, X: np.ndarray) -> np.ndarray:
        """Apply to a skew matrix or to wedge coordinates."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 2 and X.shape == (self.n, self.n):
            return hat(self.mat @ vee(X), self.n)
        return X @ self.mat.T

    @cached_property
    def inverse_mat(self) -> np.ndarray:
        inv = np.linalg.inv(self.mat)
        return 0.5 * (inv + inv.T)

    def inverse(self) -> "InertiaOperator":
        return InertiaOperator(self.n, self.inverse_mat)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.mat)


@dataclass(frozen=True, eq=False)
class Distribution:
    """Left-invariant distribution given by an orthonormal annihilator basis.

    ``vectors`` holds the annihilator a^1, ..., a^rho as rows of wedge
    coordinates.  Non-orthonormal input is orthonormalized; a dependent set
    raises ``ParameterError``.
    """

    n: int
    vectors: np.ndarray

    def __post_init__(self):
        m = algebra_dim(self.n)
        a = np.array(self.vectors, dtype=float).reshape(-1, m)
        if a.shape[0] >= m:
            raise ParameterError("annihilator must have dimension below dim so(n)")
        if a.shape[0]:
            q, r = np.linalg.qr(a.T)
            d = np.abs(np.diag(r))
            if d.min() <= 1e-12 * max(d.max(), 1.0):
                raise ParameterError("annihilator vectors are linearly dependent")
            if not np.allclose(a @ a.T, np.eye(a.shape[0]), atol=1e-12):
                a = q.T
        a.setflags(write=False)
        object.__setattr__(self, "vectors", a)

    @classmethod
    def from_matrices(cls, mats) -> "Distribution":
        mats = [np.asarray(X, dtype=float) for X in mats]
        if not mats:
            raise ParameterError("use Distribution(n, empty) for an unconstrained system")
        return cls(mats[0].shape[0], np.array([vee(X) for X in mats]))

    @property
    def rho(self) -> int:
        return self.vectors.shape[0]

    @property
    def m(self) -> int:
        return algebra_dim(self.n)

    @property
    def annihilator(self) -> list[np.ndarray]:
        return [hat(a, self.n) for a in self.vectors]

    @cached_property
    def h_projector(self) -> np.ndarray:
        return self.vectors.T @ self.vectors

    @cached_property
    def d_projector(self) -> np.ndarray:
        return np.eye(self.m) - self.h_projector

    @cached_property
    def d_basis(self) -> np.ndarray:
        """Orthonormal basis of the admissible subspace, one row per vector."""
        w, v = np.linalg.eigh(self.d_projector)
        return v[:, w > 0.5].T

    def is_subalgebra(self, tol: float = 1e-12) -> bool:
        """Whether the annihilator h is closed under the bracket."""
        alg = so(self.n)
        for a in self.vectors:
            for b in self.vectors:
                c = alg.bracket(a, b)
                if np.linalg.norm(c - self.h_projector @ c) > tol:
                    return False
        return True


def physical_inertia(I, invert: bool = False) -> InertiaOperator:
    """Rigid-body operator omega -> I omega + omega I for I = diag(I_1..I_n).

    Diagonal in the wedge basis with entries I_i + I_j.  With
    ``invert=True`` the inverse (entries 1 / (I_i + I_j)) is returned.
    """
    I = np.asarray(I, dtype=float)
    if I.ndim != 1 or I.size < 2:
        raise ParameterError("need a vector of n >= 2 principal moments")
    if np.any(I <= 0):
        raise ParameterError("principal moments must be positive")
    diag = np.array([I[i] + I[j] for i, j in wedge_pairs(I.size)])
    if invert:
        diag = 1.0 / diag
    return InertiaOperator(I.size, np.diag(diag))


def veselova_inertia(A) -> InertiaOperator:
    """Operator with E_i ^ E_j -> (A_i A_j / det A) E_i ^ E_j.

    It maps x ^ y to (Ax ^ Ay) / det A.  For n = 3 it acts on vectors as
    A^{-1}, which is the relation I = A^{-1} between the inertia tensor and
    the parameters of the reduced system.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 1 or A.size < 2:
        raise ParameterError("need a vector of n >= 2 parameters")
    if np.any(A <= 0):
        raise ParameterError("parameters must be positive")
    det = float(np.prod(A))
    diag = np.array([A[i] * A[j] / det for i, j in wedge_pairs(A.size)])
    return InertiaOperator(A.size, np.diag(diag))


def so3_inertia(J) -> InertiaOperator:
    """Operator on so(3) acting on angular-velocity vectors as the 3x3 tensor J."""
    J = np.asarray(J, dtype=float)
    if J.ndim == 1:
        J = np.diag(J)
    return InertiaOperator(3, so3_operator(J))


def _orthonormal_columns(vectors: np.ndarray, what: str) -> np.ndarray:
    a = np.atleast_2d(np.asarray(vectors, dtype=float))
    q, r = np.linalg.qr(a.T)
    d = np.abs(np.diag(r))
    if d.size == 0 or d.min() <= 1e-12 * max(d.max(), 1.0):
        raise ChainError(f"{what} is not linearly independent")
    return q


def _as_coordinate_rows(basis, m: int) -> np.ndarray:
    rows = []
    for b in basis:
        b = np.asarray(b, dtype=float)
        rows.append(vee(b) if b.ndim == 2 else b)
    arr = np.array(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != m:
        raise ChainError("chain bases must live in the same algebra")
    return arr


def standard_chain(n: int, k0: int) -> list[np.ndarray]:
    """Bases of so(k0) < so(k0+1) < ... < so(n), acting on leading coordinates."""
    if not 2 <= k0 <= n:
        raise ParameterError("need 2 <= k0 <= n")
    pairs = wedge_pairs(n)
    eye = np.eye(algebra_dim(n))
    return [eye[[p for p, (i, j) in enumerate(pairs) if j < k]] for k in range(k0, n + 1)]


def chain_operator(A0, s, chain) -> InertiaOperator:
    """Operator equal to A0 on g0 and to s_k times the identity on w_k.

    ``chain`` lists bases of g0 < g1 < ... < gN, the last spanning so(n);
    entries may be skew matrices or wedge coordinates.  ``A0`` is a
    symmetric matrix in the orthonormalized g0 coordinates (an
    ``InertiaOperator`` on so(k) is accepted and its matrix used).
    """
    if len(chain) < 2:
        raise ChainError("a chain needs at least two algebras")
    first = np.asarray(chain[-1][0], dtype=float)
    m = first.shape[0] if first.ndim == 1 else algebra_dim(first.shape[0])
    n = dim_to_n(m)
    alg = so(n)
    spaces = [_orthonormal_columns(_as_coordinate_rows(b, m), f"basis {k}") for k, b in enumerate(chain)]
    if spaces[-1].shape[1] != m:
        raise ChainError("last algebra of the chain must be all of so(n)")
    for k, q in enumerate(spaces):
        for a in q.T:
            for b in q.T:
                c = alg.bracket(a, b)
                if np.linalg.norm(c - q @ (q.T @ c)) > 1e-10:
                    raise ChainError(f"basis {k} does not span a subalgebra")
        if k and np.linalg.norm(spaces[k - 1] - q @ (q.T @ spaces[k - 1])) > 1e-10:
            raise ChainError(f"algebra {k - 1} is not contained in algebra {k}")
        if k and q.shape[1] <= spaces[k - 1].shape[1]:
            raise ChainError(f"algebra {k - 1} is not a proper subalgebra of algebra {k}")
    s = tuple(float(v) for v in np.atleast_1d(s))
    if len(s) != len(spaces) - 1:
        raise ParameterError(f"need {len(spaces) - 1} scalars, got {len(s)}")
    if any(v <= 0 for v in s):
        raise ParameterError("chain scalars must be positive")
    A0 = np.asarray(A0.mat if isinstance(A0, InertiaOperator) else A0, dtype=float)
    k0 = spaces[0].shape[1]
    if A0.shape != (k0, k0):
        raise DimensionError(f"A0 must be {k0}x{k0}")
    pieces = []
    for k in range(1, len(spaces)):
        prev = spaces[k - 1]
        resid = spaces[k] - prev @ (prev.T @ spaces[k])
        u, sv, _ = np.linalg.svd(resid, full_matrices=False)
        pieces.append(u[:, sv > 0.5])
    mat = spaces[0] @ A0 @ spaces[0].T
    for sk, w in zip(s, pieces):
        mat = mat + sk * (w @ w.T)
    info = ChainStructure(spaces[0], tuple(pieces), 0.5 * (A0 + A0.T), s)
    return InertiaOperator(n, mat, chain=info)


def suslov_distribution(n: int, r: int) -> Distribution:
    """Constraints omega_ij = 0 for r+1 <= i < j <= n (one-based).

    ``r = 1`` is the classical multidimensional Suslov problem, whose
    annihilator so(n-1) makes (so(n), so(n-1)) a symmetric pair.
    """
    if n < 3:
        raise ParameterError("need n >= 3")
    if not 1 <= r <= n - 1:
        raise ParameterError(f"need 1 <= r <= {n - 1}, got {r}")
    eye = np.eye(algebra_dim(n))
    rows = [p for p, (i, j) in enumerate(wedge_pairs(n)) if i >= r]
    return Distribution(n, eye[rows])


def veselova_distribution(n: int) -> Distribution:
    """Annihilator spanned by E_p ^ E_q, 2 <= p < q <= n (one-based)."""
    if n < 3:
        raise ParameterError("need n >= 3")
    eye = np.eye(algebra_dim(n))
    rows = [p for p, (i, j) in enumerate(wedge_pairs(n)) if i >= 1]
    return Distribution(n, eye[rows])
