"""Nonholonomic Maupertuis principle for the potential-perturbed 3D Veselova body.

On the level T + v = c the constrained flows of h = T + v and of the
Jacobi Hamiltonian h^J = T / (c - v) have the same phase curves, and the
constraint multipliers are related by lambda = mu (c - v).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from ..errors import StateError
from ..integrate import Trajectory, integrate
from .veselova import SpherePotential, Veselova3Potential


@dataclass
class MaupertuisReport:
    max_distance: float
    max_multiplier_residual: float
    arc_length: float
    min_gap: float


def jacobi_time(traj_h: Trajectory, potential: SpherePotential, c: float) -> float:
    """Time needed by the Jacobi flow to cover ``traj_h``: integral of (c - v) dt."""
    gaps = np.array([c - potential.value(y[3:6]) for y in traj_h.states])
    if gaps.min() <= 0:
        raise StateError("trajectory leaves the region v < c")
    t = traj_h.times
    return float(np.sum(0.5 * (gaps[1:] + gaps[:-1]) * np.diff(t)))


def maupertuis_check(inertia, potential: SpherePotential, c: float,
                     traj_h: Trajectory, traj_hJ: Trajectory, n_samples: int = 2000) -> MaupertuisReport:
    """Compare the two flows after matching arc length of gamma.

    Both trajectories carry states [M, gamma, s] with s the arc length of
    gamma(t).  They are resampled on a common grid of s and compared in
    sup norm over (M, gamma).  The multiplier relation is checked pointwise
    along ``traj_h``.
    """
    h_sys = Veselova3Potential(inertia, potential)
    j_sys = Veselova3Potential(inertia, potential, jacobi_level=c)
    s_end = min(traj_h.states[-1, 6], traj_hJ.states[-1, 6])
    grid = np.linspace(0.0, s_end, n_samples)
    a = CubicSpline(traj_h.states[:, 6], traj_h.states[:, :6], axis=0)(grid)
    b = CubicSpline(traj_hJ.states[:, 6], traj_hJ.states[:, :6], axis=0)(grid)
    dist = float(np.max(np.abs(a - b)))
    resid = 0.0
    gap_min = np.inf
    for y in traj_h.states:
        gap = c - potential.value(y[3:6])
        gap_min = min(gap_min, gap)
        resid = max(resid, abs(h_sys.multiplier(y) - j_sys.multiplier(y) * gap))
    return MaupertuisReport(dist, resid, float(s_end), float(gap_min))


def run_maupertuis(inertia, potential: SpherePotential, c: float, gamma0, direction,
                   t_final: float, dt: float) -> tuple[Trajectory, Trajectory, MaupertuisReport]:
    """Integrate both flows from the same phase point on T + v = c and compare them."""
    h_sys = Veselova3Potential(inertia, potential)
    j_sys = Veselova3Potential(inertia, potential, jacobi_level=c)
    y0 = h_sys.state_on_level(gamma0, direction, c)
    traj_h = integrate(h_sys.rhs, y0, t_final, dt)
    tj = jacobi_time(traj_h, potential, c)
    steps = int(np.ceil(1.02 * tj / dt))
    traj_j = integrate(j_sys.rhs, y0, steps * dt, dt)
    return traj_h, traj_j, maupertuis_check(inertia, potential, c, traj_h, traj_j)
