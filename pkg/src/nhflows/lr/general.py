"""LR systems: left-invariant metric, right-invariant constraints.

State (x, alpha^1..alpha^rho) in wedge coordinates, stored flat as
[x, alpha^1, ..., alpha^rho].  The equations are

    dx/dt = [x, A x] + sum_i lambda_i alpha^i,
    dalpha^i/dt = [alpha^i, A x],

with lambda fixed by d/dt <alpha^i, A x> = 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateConstraintError, DimensionError, MeasureError
from ..liealg import hat, so, vee
from ..operators import Distribution, InertiaOperator

COND_LIMIT = 1e12


@dataclass
class LrState:
    """x and the transported constraint vectors, as skew matrices or coordinates."""

    x: np.ndarray
    alphas: np.ndarray


class LrSystem:
    """Flat-vector LR flow for an operator A = I^{-1} and rho constraint vectors."""

    def __init__(self, A: InertiaOperator, rho: int):
        self.A = A
        self.n = A.n
        self.m = A.m
        self.rho = rho
        self.alg = so(self.n)

    def pack(self, x: np.ndarray, alphas: np.ndarray) -> np.ndarray:
        alphas = np.asarray(alphas, dtype=float).reshape(self.rho, self.m)
        return np.concatenate([np.asarray(x, dtype=float), alphas.ravel()])

    def unpack(self, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return y[: self.m], y[self.m:].reshape(self.rho, self.m)

    def initial_state(self, dist: Distribution, omega: np.ndarray) -> np.ndarray:
        """State at g = identity: alpha^i = a^i and x = I(omega)."""
        if dist.rho != self.rho or dist.n != self.n:
            raise DimensionError("distribution does not match the system")
        return self.pack(self.A.inverse_mat @ omega, dist.vectors)

    def multipliers(self, y: np.ndarray) -> np.ndarray:
        x, al = self.unpack(y)
        Ax = self.A.mat @ x
        b = self.alg.bracket(x, Ax)
        G = al @ self.A.mat @ al.T
        if np.linalg.cond(G) > COND_LIMIT:
            raise DegenerateConstraintError("transported constraints are degenerate")
        return np.linalg.solve(G, -(al @ (self.A.mat @ b)))

    def rhs(self, y: np.ndarray) -> np.ndarray:
        x, al = self.unpack(y)
        Ax = self.A.mat @ x
        ad = self.alg.ad(Ax)
        b = -ad @ x
        G = al @ self.A.mat @ al.T
        lam = np.linalg.solve(G, -(al @ (self.A.mat @ b)))
        xdot = b + lam @ al
        aldot = -al @ ad.T
        return np.concatenate([xdot, aldot.ravel()])

    def energy(self, y: np.ndarray) -> float:
        x = y[: self.m]
        return 0.5 * float(x @ (self.A.mat @ x))

    def constraints(self, y: np.ndarray) -> np.ndarray:
        """f_i = <alpha^i, A x>; these are first integrals and vanish on the constraint set."""
        x, al = self.unpack(y)
        return al @ (self.A.mat @ x)

    def alpha_products(self, y: np.ndarray) -> np.ndarray:
        _, al = self.unpack(y)
        return al @ al.T

    def density(self, y: np.ndarray) -> float:
        _, al = self.unpack(y)
        return lr_measure_density(self.A, al)

    def project_admissible(self, y: np.ndarray) -> np.ndarray:
        x, al = self.unpack(y)
        C = al @ self.A.mat
        x = x - C.T @ np.linalg.solve(C @ C.T, C @ x)
        return self.pack(x, al)


def lr_measure_density(A: InertiaOperator, alphas) -> float:
    """sqrt(det <A alpha^i, alpha^j>), the invariant density of the LR flow."""
    al = np.asarray(alphas, dtype=float)
    if al.ndim == 3:
        al = vee(al)
    al = al.reshape(-1, A.m)
    det = float(np.linalg.det(al @ A.mat @ al.T))
    if det < 0:
        raise MeasureError("Gram determinant is negative")
    return float(np.sqrt(det))


def lr_rhs(A: InertiaOperator, st: LrState) -> LrState:
    """Time derivative of an ``LrState`` (skew matrices or coordinates in, same out)."""
    x = np.asarray(st.x, dtype=float)
    al = np.asarray(st.alphas, dtype=float)
    as_matrix = x.ndim == 2
    if as_matrix:
        x, al = vee(x), vee(al)
    al = al.reshape(-1, A.m)
    sys = LrSystem(A, al.shape[0])
    d = sys.rhs(sys.pack(x, al))
    xd, ald = sys.unpack(d)
    if as_matrix:
        return LrState(hat(xd, A.n), hat(ald, A.n))
    return LrState(xd, ald)
