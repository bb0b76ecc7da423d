"""Veselova rigid body: three-dimensional form and the reduced sphere system.

In three dimensions the state is (Omega, gamma) with gamma the fixed
spatial direction seen from the body and the constraint (Omega, gamma) = 0.
In any dimension the reduction gives a system on the sphere S^{n-1} written
in redundant coordinates (q, p) of R^{2n}; q is the first spatial axis seen
from the body.  A = diag(A_1..A_n) are the parameters of the inertia
operator A_i A_j / det A.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ParameterError, SingularityError, StateError
from ..integrate import Trajectory, reparameterize
from ..liealg import cross3


def _positive_vector(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 1 or A.size < 3 or np.any(A <= 0):
        raise ParameterError("need n >= 3 positive parameters")
    return A


def _tensor(I) -> np.ndarray:
    I = np.asarray(I, dtype=float)
    if I.ndim == 1:
        I = np.diag(I)
    if I.shape != (3, 3) or not np.allclose(I, I.T) or np.linalg.eigvalsh(I)[0] <= 0:
        raise ParameterError("inertia must be a symmetric positive definite 3x3 tensor")
    return I


class Veselova3:
    """3D Veselova body; flat state [Omega, gamma]."""

    def __init__(self, inertia):
        self.I = _tensor(inertia)
        self.Iinv = np.linalg.inv(self.I)

    def multiplier(self, y: np.ndarray) -> float:
        Om, g = y[:3], y[3:]
        b = cross3(self.I @ Om, Om)
        Ig = self.Iinv @ g
        return -float(b @ Ig) / float(Ig @ g)

    def rhs(self, y: np.ndarray) -> np.ndarray:
        Om, g = y[:3], y[3:]
        b = cross3(self.I @ Om, Om)
        Ig = self.Iinv @ g
        lam = -float(b @ Ig) / float(Ig @ g)
        return np.concatenate([self.Iinv @ (b + lam * g), cross3(g, Om)])

    def energy(self, y: np.ndarray) -> float:
        Om = y[:3]
        return 0.5 * float(Om @ self.I @ Om)

    def constraint(self, y: np.ndarray) -> float:
        return float(y[:3] @ y[3:])

    def density(self, y: np.ndarray) -> float:
        """sqrt((I^{-1} gamma, gamma)); invariant in the (Omega, gamma) chart."""
        g = y[3:]
        return float(np.sqrt(g @ self.Iinv @ g))

    def density_unrooted(self, y: np.ndarray) -> float:
        """(I^{-1} gamma, gamma) without the square root (not invariant)."""
        g = y[3:]
        return float(g @ self.Iinv @ g)


def veselova3_rhs(inertia, Omega, gamma) -> tuple[np.ndarray, np.ndarray]:
    """I dOmega/dt = I Omega x Omega + lambda gamma, dgamma/dt = gamma x Omega.

    lambda = -(I Omega x Omega, I^{-1} gamma) / (I^{-1} gamma, gamma) keeps
    (Omega, gamma) = 0.
    """
    d = Veselova3(inertia).rhs(np.concatenate([Omega, gamma]))
    return d[:3], d[3:]


@dataclass
class SpherePotential:
    """Potential on S^{n-1} with integrable cases of the reduced system.

    V(q) = c1 (A^{-1} q, q) + c2 ((A^{-1} q, A^{-1} q) - (A^{-1} q, q)^2)
           + sum_i d_i / q_i^2 + (linear, q).
    """

    A: np.ndarray
    c1: float = 0.0
    c2: float = 0.0
    inverse_squares: np.ndarray | None = None
    linear: np.ndarray | None = None
    singular_tol: float = field(default=1e-8, repr=False)

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.Ainv = 1.0 / self.A
        if self.inverse_squares is not None:
            self.inverse_squares = np.asarray(self.inverse_squares, dtype=float)
        if self.linear is not None:
            self.linear = np.asarray(self.linear, dtype=float)

    def _check(self, q):
        if self.inverse_squares is not None and np.any(
                (self.inverse_squares != 0) & (np.abs(q) < self.singular_tol)):
            raise SingularityError("inverse-square potential is singular on a coordinate plane")

    def value(self, q: np.ndarray) -> float:
        self._check(q)
        Aq = self.Ainv * q
        v = self.c1 * float(Aq @ q) + self.c2 * (float(Aq @ Aq) - float(Aq @ q) ** 2)
        if self.inverse_squares is not None:
            on = self.inverse_squares != 0
            v += float(np.sum(self.inverse_squares[on] / q[on] ** 2))
        if self.linear is not None:
            v += float(self.linear @ q)
        return v

    def grad(self, q: np.ndarray) -> np.ndarray:
        self._check(q)
        Aq = self.Ainv * q
        g = 2.0 * self.c1 * Aq + self.c2 * (2.0 * self.Ainv * Aq - 4.0 * float(Aq @ q) * Aq)
        if self.inverse_squares is not None:
            on = self.inverse_squares != 0
            g[on] -= 2.0 * self.inverse_squares[on] / q[on] ** 3
        if self.linear is not None:
            g = g + self.linear
        return g


class ReducedVeselova:
    """Reduced n-dimensional Veselova system on T*S^{n-1}, flat state [q, p].

    dq/dt = (det A / (q, A q)) [A^{-1} p - ((p, A^{-1} q) / (q, q)) q]
    dp/dt = -det A ((p, A^{-1} p)(q, q) - (p, q)(q, A^{-1} p)) / ((q, A q)(q, q)^2) q
            - (grad V projected onto the tangent space)
    """

    def __init__(self, A, potential: SpherePotential | None = None):
        self.A = _positive_vector(A)
        self.n = self.A.size
        self.Ainv = 1.0 / self.A
        self.detA = float(np.prod(self.A))
        self.potential = potential

    def split(self, y):
        return y[: self.n], y[self.n:]

    def pack(self, q, p) -> np.ndarray:
        return np.concatenate([np.asarray(q, dtype=float), np.asarray(p, dtype=float)])

    def velocity(self, y: np.ndarray) -> np.ndarray:
        q, p = self.split(y)
        Aip = self.Ainv * p
        qq = float(q @ q)
        return (self.detA / float(q @ (self.A * q))) * (Aip - (float(Aip @ q) / qq) * q)

    def rhs(self, y: np.ndarray) -> np.ndarray:
        q, p = self.split(y)
        Aip = self.Ainv * p
        Aiq = self.Ainv * q
        qq = float(q @ q)
        qAq = float(q @ (self.A * q))
        c = self.detA / qAq
        qdot = c * (Aip - (float(p @ Aiq) / qq) * q)
        pdot = -c * (float(p @ Aip) * qq - float(p @ q) * float(q @ Aip)) / qq**2 * q
        if self.potential is not None:
            g = self.potential.grad(q)
            pdot = pdot - (g - (float(g @ q) / qq) * q)
        return np.concatenate([qdot, pdot])

    def momenta(self, q: np.ndarray, qdot: np.ndarray) -> np.ndarray:
        """p = (1/det A) [(q, A q) A qdot - (qdot, A q) A q]."""
        Aq = self.A * q
        return (float(q @ Aq) * (self.A * qdot) - float(qdot @ Aq) * Aq) / self.detA

    def state_from_velocity(self, q, qdot) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        return self.pack(q, self.momenta(q, np.asarray(qdot, dtype=float)))

    def lagrangian(self, q: np.ndarray, qdot: np.ndarray) -> float:
        """(1/2 det A) [(A qdot, qdot)(A q, q) - (A q, qdot)^2]."""
        Aq = self.A * q
        return (float(qdot @ (self.A * qdot)) * float(q @ Aq) - float(Aq @ qdot) ** 2) / (2.0 * self.detA)

    def kinetic(self, y: np.ndarray) -> float:
        q, _ = self.split(y)
        return self.lagrangian(q, self.velocity(y))

    def energy(self, y: np.ndarray) -> float:
        e = self.kinetic(y)
        if self.potential is not None:
            e += self.potential.value(y[: self.n])
        return e

    def hamiltonian_form(self, y: np.ndarray) -> float:
        """(1/2) det A (p, A^{-1} p) / (q, A q), equal to the kinetic energy when p is tangent."""
        q, p = self.split(y)
        return 0.5 * self.detA * float(p @ (self.Ainv * p)) / float(q @ (self.A * q))

    def sphere_constraints(self, y: np.ndarray) -> np.ndarray:
        q, p = self.split(y)
        return np.array([float(q @ q) - 1.0, float(q @ p)])

    def divergence(self, y: np.ndarray) -> float:
        """Closed-form divergence -(n-2) det A (p, A^{-1} q) / ((q, q)(q, A q))."""
        q, p = self.split(y)
        return -(self.n - 2) * self.detA * float(p @ (self.Ainv * q)) / (float(q @ q) * float(q @ (self.A * q)))

    def density(self, y: np.ndarray, exponent: float | None = None) -> float:
        return reduced_measure_density(self.A, y[: self.n], exponent)

    def chaplygin_rate(self, y: np.ndarray) -> float:
        """dtau/dt = sqrt(det A / (A q, q))."""
        q = y[: self.n]
        return float(np.sqrt(self.detA / float(q @ (self.A * q))))

    def reparameterized_lagrangian(self, q: np.ndarray, dq: np.ndarray) -> float:
        """L* = (1/2)(q, A q)^{-1} [(A dq, dq)(A q, q) - (A q, dq)^2], dq = dq/dtau."""
        Aq = self.A * q
        qAq = float(q @ Aq)
        return 0.5 * (float(dq @ (self.A * dq)) * qAq - float(Aq @ dq) ** 2) / qAq

    def tau_velocity(self, y: np.ndarray) -> np.ndarray:
        return self.velocity(y) / self.chaplygin_rate(y)

    def normalize(self, y: np.ndarray) -> np.ndarray:
        """Project back to |q| = 1, (q, p) = 0."""
        q, p = self.split(y)
        q = q / np.linalg.norm(q)
        return self.pack(q, p - float(p @ q) * q)

    def random_state(self, rng: np.random.Generator, energy: float | None = None) -> np.ndarray:
        q = rng.standard_normal(self.n)
        q /= np.linalg.norm(q)
        v = rng.standard_normal(self.n)
        v -= float(v @ q) * q
        y = self.state_from_velocity(q, v)
        if energy is not None:
            kin = energy - (self.potential.value(q) if self.potential is not None else 0.0)
            if kin <= 0:
                raise StateError("energy level below the potential at the sampled point")
            y = self.state_from_velocity(q, v * np.sqrt(kin / self.lagrangian(q, v)))
        return y


def reduced_veselova_rhs(A, q, p) -> tuple[np.ndarray, np.ndarray]:
    """Time derivatives (dq/dt, dp/dt) of the reduced system without potential."""
    sys = ReducedVeselova(A)
    d = sys.rhs(sys.pack(q, p))
    return d[: sys.n], d[sys.n:]


def reduced_potential_rhs(A, q, p, potential: SpherePotential) -> tuple[np.ndarray, np.ndarray]:
    """Time derivatives of the reduced system with a potential on the sphere."""
    sys = ReducedVeselova(A, potential)
    d = sys.rhs(sys.pack(q, p))
    return d[: sys.n], d[sys.n:]


def reduced_measure_density(A, q, exponent: float | None = None) -> float:
    """(A q, q)^{-(n-2)/2}, the invariant density of the reduced system on R^{2n}.

    ``exponent`` overrides -(n-2)/2 (used for negative controls).
    """
    A = np.asarray(A, dtype=float)
    if exponent is None:
        exponent = -(A.size - 2) / 2.0
    return float(q @ (A * q)) ** exponent


def chaplygin_reparameterize(traj: Trajectory, A, n_samples: int | None = None,
                             method: str = "spline") -> Trajectory:
    """Resample a reduced trajectory in the time tau, dtau = sqrt(det A/(A q, q)) dt.

    Adds the channel ``"L*"`` holding the reparameterized Lagrangian at each
    resampled state, which is constant along solutions.
    """
    sys = ReducedVeselova(A)
    out = reparameterize(traj, sys.chaplygin_rate, n_samples=n_samples, method=method)
    out.channels["L*"] = np.array([
        sys.reparameterized_lagrangian(y[: sys.n], sys.tau_velocity(y)) for y in out.states])
    return out


def lagrange_momenta(sys: ReducedVeselova, y: np.ndarray) -> np.ndarray:
    """N(q) (q_i p_j - q_j p_i), 1 <= i < j <= n-1, with N the Chaplygin rate.

    First integrals when A_1 = ... = A_{n-1} and the potential depends on q_n only.
    """
    q, p = sys.split(y)
    N = sys.chaplygin_rate(y)
    k = sys.n - 1
    return np.array([N * (q[i] * p[j] - q[j] * p[i]) for i in range(k) for j in range(i + 1, k)])


class Veselova3Potential:
    """3D Veselova body in a potential v(gamma); flat state [M, gamma, s].

    M = I Omega is the body angular momentum and s the arc length of the
    curve gamma(t), integrated alongside.  With ``jacobi_level=c`` the
    vector field of the Jacobi Hamiltonian T / (c - v) is used instead; on
    the energy level T + v = c both fields are proportional.
    """

    def __init__(self, inertia, potential: SpherePotential, jacobi_level: float | None = None):
        self.I = _tensor(inertia)
        self.Iinv = np.linalg.inv(self.I)
        self.potential = potential
        self.c = jacobi_level

    def kinetic(self, y: np.ndarray) -> float:
        M = y[:3]
        return 0.5 * float(M @ self.Iinv @ M)

    def energy(self, y: np.ndarray) -> float:
        return self.kinetic(y) + self.potential.value(y[3:6])

    def jacobi_energy(self, y: np.ndarray) -> float:
        return self.kinetic(y) / (self.c - self.potential.value(y[3:6]))

    def _parts(self, y):
        M, g = y[:3], y[3:6]
        Om = self.Iinv @ M
        grad = self.potential.grad(g)
        if self.c is None:
            torque = cross3(g, grad)
        else:
            gap = self.c - self.potential.value(g)
            if gap <= 0:
                raise StateError("state is outside the Jacobi region v < c")
            Om = Om / gap
            torque = cross3(g, grad) * (self.kinetic(y) / gap**2)
        b = cross3(M, Om) + torque
        Ig = self.Iinv @ g
        lam = -float(b @ Ig) / float(Ig @ g)
        return Om, g, b, lam

    def multiplier(self, y: np.ndarray) -> float:
        return self._parts(y)[3]

    def rhs(self, y: np.ndarray) -> np.ndarray:
        Om, g, b, lam = self._parts(y)
        gdot = cross3(g, Om)
        return np.concatenate([b + lam * g, gdot, [np.linalg.norm(gdot)]])

    def state_on_level(self, gamma, direction, level: float) -> np.ndarray:
        """Phase point with (Omega, gamma) = 0 and T + v = ``level``."""
        g = np.asarray(gamma, dtype=float)
        g = g / np.linalg.norm(g)
        d = np.asarray(direction, dtype=float)
        d = d - float(d @ g) * g
        kin = level - self.potential.value(g)
        if kin <= 0:
            raise StateError("level is below the potential at gamma")
        Om = d * np.sqrt(2.0 * kin / float(d @ self.I @ d))
        return np.concatenate([self.I @ Om, g, [0.0]])
