"""Euler-Poincare-Suslov flows on so(n).

The state is x = I(omega) in the wedge coordinates, A = I^{-1}, and the
constraints <A x, a^i> = 0 restrict omega to the admissible subspace d.
The flow is

    dx/dt = [x, A x] + sum_i lambda_i a^i,

with multipliers fixed by requiring the constraints to be preserved.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ApplicabilityError, DegenerateConstraintError, DimensionError, ParameterError
from .liealg import hat, so, vee, wedge_position
from .operators import Distribution, InertiaOperator, physical_inertia, suslov_distribution

COND_LIMIT = 1e12
PRESERVE_TOL = 1e-12


def _coords(x, m: int) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    if x.ndim == 2:
        v = vee(x)
        if v.size != m:
            raise DimensionError("state and system live in different algebras")
        return v, True
    if x.shape != (m,):
        raise DimensionError(f"expected {m} coordinates, got shape {x.shape}")
    return x, False


def _back(v: np.ndarray, as_matrix: bool, n: int) -> np.ndarray:
    return hat(v, n) if as_matrix else v


@dataclass(frozen=True)
class SplitDecomposition:
    """Orthonormal bases of d = u + d_0 + d_1 + ... + d_g, with A = s on u.

    Each entry is an array whose rows are wedge coordinates.
    """

    u: np.ndarray
    d0: np.ndarray
    dk: tuple[np.ndarray, ...]
    s: float


@dataclass(frozen=True, eq=False)
class EpsSystem:
    """Operator A = I^{-1} (``A``) together with a constraint distribution."""

    A: InertiaOperator
    dist: Distribution
    split: SplitDecomposition | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.A.n != self.dist.n:
            raise DimensionError("operator and distribution live in different algebras")
        a = self.dist.vectors
        if a.shape[0]:
            G = a @ self.A.mat @ a.T
            if np.linalg.cond(G) > COND_LIMIT:
                raise DegenerateConstraintError("multiplier Gram matrix is singular")

    @property
    def n(self) -> int:
        return self.A.n

    @property
    def m(self) -> int:
        return self.A.m

    @cached_property
    def _multiplier_map(self) -> np.ndarray:
        # lambda = M @ b solves G lambda = -<A b, a^i>, where b = [x, A x]
        a = self.dist.vectors
        if not a.shape[0]:
            return np.zeros((0, self.m))
        G = a @ self.A.mat @ a.T
        return -np.linalg.solve(G, a @ self.A.mat)

    def multipliers(self, x: np.ndarray) -> np.ndarray:
        alg = so(self.n)
        return self._multiplier_map @ alg.bracket(x, self.A.mat @ x)

    def rhs(self, x: np.ndarray) -> np.ndarray:
        """Flat-coordinate vector field."""
        b = so(self.n).bracket(x, self.A.mat @ x)
        return b + (self._multiplier_map @ b) @ self.dist.vectors

    def energy(self, x: np.ndarray) -> float:
        return 0.5 * float(x @ (self.A.mat @ x))

    def casimir(self, x: np.ndarray) -> float:
        return float(x @ x)

    def constraints(self, x: np.ndarray) -> np.ndarray:
        """Residuals <A x, a^i>; zero exactly on the admissible set."""
        return self.dist.vectors @ (self.A.mat @ x)

    def project_admissible(self, x: np.ndarray) -> np.ndarray:
        """Minimal-norm correction onto the constraint set (one Newton step).

        The constraints are linear in x, so one step is exact.
        """
        C = self.dist.vectors @ self.A.mat
        if not C.shape[0]:
            return np.array(x, dtype=float)
        return x - C.T @ np.linalg.solve(C @ C.T, C @ x)

    def random_admissible(self, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        return self.project_admissible(scale * rng.standard_normal(self.m))

    @cached_property
    def preserves_decomposition(self) -> bool:
        P_h = self.dist.h_projector
        P_d = self.dist.d_projector
        return float(np.linalg.norm(P_h @ self.A.mat @ P_d)) <= PRESERVE_TOL * max(1.0, np.abs(self.A.mat).max())


def eps_rhs(sys: EpsSystem, x):
    """Vector field [x, A x] + sum lambda_i a^i at x (matrix or coordinates)."""
    v, as_matrix = _coords(x, sys.m)
    return _back(sys.rhs(v), as_matrix, sys.n)


def eps_rhs_decomposed(sys: EpsSystem, x):
    """The reduced form dx/dt = [x, A x] projected onto d.

    Valid when A maps d to d and h to h; raises ``ApplicabilityError``
    otherwise.
    """
    if not sys.preserves_decomposition:
        raise ApplicabilityError("operator does not preserve the splitting h + d")
    v, as_matrix = _coords(x, sys.m)
    b = so(sys.n).bracket(v, sys.A.mat @ v)
    return _back(sys.dist.d_projector @ b, as_matrix, sys.n)


class ChainSplit:
    """Precomputed projections for the chain form of the flow."""

    def __init__(self, sys: EpsSystem):
        chain = sys.A.chain
        if chain is None:
            raise ApplicabilityError("operator was not built by chain_operator")
        a = sys.dist.vectors
        P_h = sys.dist.h_projector
        blocks = [chain.g0] + list(chain.pieces)
        # every block projector must map the annihilator into itself
        for Q in blocks:
            P = Q @ Q.T
            if a.shape[0] and np.linalg.norm(P_h @ P @ a.T - P @ a.T) > 1e-10:
                raise ApplicabilityError("distribution is not adapted to the chain")
        self.alg = so(sys.n)
        self.g0 = chain.g0
        self.P0 = chain.g0 @ chain.g0.T
        self.A = sys.A.mat
        self.s = chain.s
        self.Pw = [Q @ Q.T for Q in chain.pieces]
        self.Pd = [P - P_h @ P for P in self.Pw]
        # constraints inside g0
        h0 = self.P0 @ P_h @ self.P0
        w, v = np.linalg.eigh(h0)
        a0 = v[:, w > 0.5].T
        if a0.shape[0]:
            G = a0 @ self.A @ a0.T
            self.mult0 = -a0.T @ np.linalg.solve(G, a0 @ self.A)
        else:
            self.mult0 = np.zeros((self.A.shape[0], self.A.shape[0]))

    def components(self, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        return self.P0 @ x, [P @ x for P in self.Pw]

    def rhs(self, x: np.ndarray) -> np.ndarray:
        x0, xs = self.components(x)
        A0x0 = self.A @ x0
        b0 = self.P0 @ self.alg.bracket(x0, A0x0)
        out = b0 + self.mult0 @ b0
        for k, (xk, Pd) in enumerate(zip(xs, self.Pd)):
            sk = self.s[k]
            y = A0x0 - sk * x0
            for j in range(k):
                y = y + (self.s[j] - sk) * xs[j]
            out = out + Pd @ self.alg.bracket(xk, y)
        return out


def chain_split_rhs(sys: EpsSystem, x):
    """The flow computed component-wise along a chain of subalgebras.

    The g0 component follows the constrained flow on g0 and each w_k
    component follows
        dx_k/dt = [x_k, A0 x0 - s_k x0 + sum_{j<k} (s_j - s_k) x_j]
    projected onto d_k = d intersected with w_k.  Agrees with ``eps_rhs``.
    """
    v, as_matrix = _coords(x, sys.m)
    return _back(ChainSplit(sys).rhs(v), as_matrix, sys.n)


def fk_frequencies(I) -> np.ndarray:
    """Rotation frequencies of the integrable Suslov-type problem with r = 2.

    Omega_i = sqrt((I1 - I_{i+2})(I2 - I_{i+2}) / ((I1 + I_{i+2})(I2 + I_{i+2}))),
    i = 1..n-2, for principal moments ordered I1 >= I2 >= ... >= In > 0.
    """
    I = np.asarray(I, dtype=float)
    if I.ndim != 1 or I.size < 3:
        raise ParameterError("need at least three principal moments")
    if np.any(I <= 0) or np.any(np.diff(I) > 0):
        raise ParameterError("moments must be positive and non-increasing")
    I1, I2, rest = I[0], I[1], I[2:]
    return np.sqrt((I1 - rest) * (I2 - rest) / ((I1 + rest) * (I2 + rest)))


def fk_decomposition(n: int, A: InertiaOperator) -> SplitDecomposition:
    """Splitting u = span{E1^E2}, d_k = span{E1^E_{k+2}, E2^E_{k+2}}."""
    eye = np.eye(A.m)
    u = eye[[wedge_position(1, 2, n)]]
    dk = tuple(eye[[wedge_position(1, k, n), wedge_position(2, k, n)]] for k in range(3, n + 1))
    s = float(u[0] @ A.mat @ u[0])
    return SplitDecomposition(u=u, d0=np.zeros((0, A.m)), dk=dk, s=s)


def suslov_fk_system(I) -> EpsSystem:
    """Rigid body with constraints omega_ij = 0 for 3 <= i < j, plus its splitting."""
    I = np.asarray(I, dtype=float)
    fk_frequencies(I)  # validates ordering
    A = physical_inertia(I, invert=True)
    dist = suslov_distribution(I.size, 2)
    return EpsSystem(A, dist, split=fk_decomposition(I.size, A))


def split_integrals(sys: EpsSystem, x) -> np.ndarray:
    """First integrals H, F = <x, x>, components of x in d_0 and F_k = <B_k x_k, x_k>.

    B_k is A restricted to d_k minus s times the identity, where s is the
    scalar by which A acts on u.
    """
    sp = sys.split
    if sp is None:
        raise ApplicabilityError("system carries no splitting")
    if not sys.preserves_decomposition:
        raise ApplicabilityError("operator does not preserve the splitting h + d")
    Au = sp.u @ sys.A.mat @ sp.u.T
    if not np.allclose(Au, sp.s * np.eye(sp.u.shape[0]), atol=1e-12):
        raise ApplicabilityError("operator is not scalar on u")
    v, _ = _coords(x, sys.m)
    out = [sys.energy(v), float(v @ v)]
    out.extend(sp.d0 @ v)
    for D in sp.dk:
        xk = D @ v
        Bk = D @ sys.A.mat @ D.T - sp.s * np.eye(D.shape[0])
        out.append(float(xk @ Bk @ xk))
    return np.array(out)


@dataclass
class MultiplierReport:
    max_h_residual: float
    max_multiplier_norm: float
    samples: int


def multiplier_vanishing_check(sys: EpsSystem, samples: int, seed: int = 0) -> MultiplierReport:
    """Largest |[x, A x] projected onto h| and |sum lambda_i a^i| over random states.

    The multipliers vanish identically when the projection onto h of
    [x, A_d x] is zero on the admissible set (for instance for symmetric
    pairs with A scalar on d).
    """
    rng = np.random.default_rng(seed)
    alg = so(sys.n)
    P_h = sys.dist.h_projector
    worst_h = 0.0
    worst_l = 0.0
    for _ in range(samples):
        x = sys.random_admissible(rng)
        b = alg.bracket(x, sys.A.mat @ x)
        worst_h = max(worst_h, float(np.linalg.norm(P_h @ b)))
        lam = sys.multipliers(x)
        worst_l = max(worst_l, float(np.linalg.norm(lam @ sys.dist.vectors)))
    return MultiplierReport(worst_h, worst_l, samples)


def so4_pfaffian(x) -> float:
    """The second quadratic Casimir x12 x34 - x13 x24 + x14 x23 of so(4)."""
    v, _ = _coords(x, 6)
    return float(v[0] * v[5] - v[1] * v[4] + v[2] * v[3])


def cartan_suslov_system(I, a1: float, a2: float) -> EpsSystem:
    """so(4) body with the single constraint <a, A x> = 0, a = a1 E1^E2 + a2 E3^E4.

    The vector a lies in the Cartan subalgebra span{E1^E2, E3^E4}, which the
    rigid-body operator preserves, so [a, A a] = 0.
    """
    if a1 * a2 == 0:
        raise ParameterError("need a1 a2 != 0")
    I = np.asarray(I, dtype=float)
    if I.size != 4:
        raise ParameterError("the Cartan-constraint case lives on so(4)")
    A = physical_inertia(I, invert=True)
    a = np.zeros(6)
    a[0], a[5] = a1, a2
    return EpsSystem(A, Distribution(4, a[None, :]))


def cartan_integral_coefficients(sys: EpsSystem) -> tuple[float, float]:
    """(c1, c2) such that c1 <x, x> + c2 Pf(x) is a first integral on the constraint set.

    Casimirs are killed by the bracket term, so only lambda <grad F, a> has
    to vanish; on the constraint set this fixes (c1, c2) up to scale.
    """
    if sys.n != 4 or sys.dist.rho != 1:
        raise ApplicabilityError("needs so(4) with a single constraint")
    a = sys.dist.vectors[0]
    if np.linalg.norm(a[1:5]) > 1e-12:
        raise ApplicabilityError("constraint vector is not in span{E1^E2, E3^E4}")
    al, be = sys.A.mat[0, 0], sys.A.mat[5, 5]
    if np.linalg.norm(sys.A.mat[[0, 5]][:, 1:5]) > 1e-12:
        raise ApplicabilityError("operator does not preserve the Cartan subalgebra")
    a1, a2 = a[0], a[5]
    c1 = a2 * a2 * be - a1 * a1 * al
    c2 = -2.0 * a1 * a2 * (be - al)
    if np.hypot(c1, c2) < 1e-14:
        return 1.0, 0.0
    return float(c1), float(c2)


def cartan_integral(sys: EpsSystem, x) -> float:
    c1, c2 = cartan_integral_coefficients(sys)
    v, _ = _coords(x, 6)
    return c1 * float(v @ v) + c2 * so4_pfaffian(v)


def restricted_field(sys: EpsSystem):
    """Orthonormal basis B (rows) of the constraint set and the field z -> B f(B^T z)."""
    C = sys.dist.vectors @ sys.A.mat
    _, _, vt = np.linalg.svd(C)
    B = vt[C.shape[0]:]

    def f(z):
        return B @ sys.rhs(B.T @ z)

    return B, f
