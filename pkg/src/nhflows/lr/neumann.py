"""Neumann system on S^{n-1} and its time-change relation to the Veselova system.

Along a reduced Veselova trajectory of kinetic energy h, the new time
tau_1 with dtau_1 = sqrt(2 h det A / (A q, q)) dt turns the sphere motion
into a Neumann trajectory with potential (1/2)(A^{-1} q, q) lying on the
level F_0 = 0 of the integral

    F_0 = (A q', q')(A q, q) - (A q, q')^2 - (A q, q).
"""
from __future__ import annotations

import numpy as np

from ..errors import ParameterError, RateError, StateError
from ..integrate import Trajectory, reparameterize
from .veselova import ReducedVeselova, _positive_vector

ENERGY_TOL = 1e-8


class Neumann:
    """Neumann system; flat state [q, dq/dtau]."""

    def __init__(self, A):
        self.A = _positive_vector(A)
        self.n = self.A.size
        self.Ainv = 1.0 / self.A

    def multiplier(self, y: np.ndarray) -> float:
        q, v = y[: self.n], y[self.n:]
        return (float(q @ (self.Ainv * q)) - float(v @ v)) / float(q @ q)

    def rhs(self, y: np.ndarray) -> np.ndarray:
        """q'' = -A^{-1} q + lambda q, lambda = (A^{-1} q, q) - (q', q')."""
        q, v = y[: self.n], y[self.n:]
        lam = (float(q @ (self.Ainv * q)) - float(v @ v)) / float(q @ q)
        return np.concatenate([v, -self.Ainv * q + lam * q])

    def energy(self, y: np.ndarray) -> float:
        q, v = y[: self.n], y[self.n:]
        return 0.5 * float(v @ v) + 0.5 * float(q @ (self.Ainv * q))

    def f0(self, y: np.ndarray) -> float:
        return f0_integral(self.A, y[: self.n], y[self.n:])

    def sphere_constraints(self, y: np.ndarray) -> np.ndarray:
        q, v = y[: self.n], y[self.n:]
        return np.array([float(q @ q) - 1.0, float(q @ v)])


def neumann_rhs(A, q, dq) -> tuple[np.ndarray, np.ndarray]:
    sys = Neumann(A)
    d = sys.rhs(np.concatenate([q, dq]))
    return d[: sys.n], d[sys.n:]


def f0_integral(A, q, dq) -> float:
    """(A q', q')(A q, q) - (A q, q')^2 - (A q, q)."""
    A = np.asarray(A, dtype=float)
    Aq = A * q
    qAq = float(q @ Aq)
    return float(dq @ (A * dq)) * qAq - float(Aq @ dq) ** 2 - qAq


def neumann_rate(A, q, h: float) -> float:
    """dtau_1/dt = sqrt(2 h det A / (A q, q))."""
    A = np.asarray(A, dtype=float)
    if h <= 0:
        raise RateError("energy must be positive")
    return float(np.sqrt(2.0 * h * float(np.prod(A)) / float(q @ (A * q))))


def veselova_to_neumann(traj: Trajectory, A, h: float | None = None,
                        n_samples: int | None = None, method: str = "spline") -> Trajectory:
    """Map a reduced Veselova trajectory (states [q, p] in t) to Neumann form.

    Returns a trajectory on a uniform tau_1 grid with states [q, dq/dtau_1]
    and the channel ``"F0"``.  ``h`` defaults to the kinetic energy of the
    first state; a given ``h`` must match it to 1e-8 (relative).
    """
    ves = ReducedVeselova(A)
    h0 = ves.kinetic(traj.states[0])
    if h is None:
        h = h0
    elif abs(h - h0) > ENERGY_TOL * max(1.0, abs(h0)):
        raise StateError(f"trajectory energy {h0:.12g} does not match h = {h:.12g}")

    def rate(y):
        return neumann_rate(ves.A, y[: ves.n], h)

    resampled = reparameterize(traj, rate, n_samples=n_samples, method=method, time_name="tau1")
    states = np.array([np.concatenate([y[: ves.n], ves.velocity(y) / rate(y)]) for y in resampled.states])
    out = Trajectory(resampled.times, states, dict(resampled.channels), time_name="tau1")
    out.channels["F0"] = np.array([f0_integral(ves.A, y[: ves.n], y[ves.n:]) for y in states])
    return out


def neumann_to_veselova(traj: Trajectory, A, h: float, n_samples: int | None = None,
                        method: str = "spline") -> Trajectory:
    """Inverse map: Neumann states [q, dq/dtau_1] on F_0 = 0 to Veselova [q, p] in t.

    ``h`` is the kinetic energy assigned to the Veselova trajectory; any
    positive value gives a solution.
    """
    if h <= 0:
        raise ParameterError("energy must be positive")
    ves = ReducedVeselova(A)

    def inverse_rate(y):
        return 1.0 / neumann_rate(ves.A, y[: ves.n], h)

    resampled = reparameterize(traj, inverse_rate, n_samples=n_samples, method=method, time_name="t")
    states = []
    for y in resampled.states:
        q = y[: ves.n]
        qdot = neumann_rate(ves.A, q, h) * y[ves.n:]
        states.append(ves.state_from_velocity(q, qdot))
    return Trajectory(resampled.times, np.array(states), {"tau1": resampled.channels["t"]}, time_name="t")
