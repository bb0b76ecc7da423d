"""Geodesics on the ellipsoid Q(0) and the maps tying them to the sphere systems.

The confocal family is Q(alpha): sum_k X_k^2 / (alpha - A_k) = -1; Q(0) is
the ellipsoid (A^{-1} X, X) = 1.  Geodesics use the natural parameter s.

* Knoerrer map: q = A^{-1} X / |A^{-1} X| with
  dtau_1 = sqrt((X', A^{-1} X') / (X, A^{-2} X)) ds sends geodesics to
  Neumann trajectories on F_0 = 0.  (With the ratio the other way round
  F_0 = 0 fails unless the two factors happen to coincide.)
* Moser Lax matrix L = P (A - X (x) X) P, P = Id - g (x) g / (g, g), with
  g = dX/ds, is constant in spectrum along geodesics.  Its eigenvectors
  are the normals of the confocal quadrics through X plus g itself.
* ``reconstruct_frame`` builds from a reduced Veselova trajectory the
  moving frame e_1 = q, e_2..e_{n-1} = normals, e_n = g, which satisfies
  the Poisson equations de_i/dt = -omega e_i with omega = q ^ dq/dt.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NonGenericDataError, ParameterError, StateError
from ..integrate import Trajectory, reparameterize
from ..liealg import outer_wedge
from .neumann import Neumann, f0_integral
from .veselova import ReducedVeselova, _positive_vector


class QuadricGeodesic:
    """Geodesic flow on (A^{-1} X, X) = 1; flat state [X, dX/ds]."""

    def __init__(self, A):
        self.A = _positive_vector(A)
        self.n = self.A.size
        self.Ainv = 1.0 / self.A

    def rhs(self, y: np.ndarray) -> np.ndarray:
        """X'' = mu A^{-1} X with mu = -(X', A^{-1} X') / (X, A^{-2} X)."""
        X, V = y[: self.n], y[self.n:]
        N = self.Ainv * X
        mu = -float(V @ (self.Ainv * V)) / float(N @ N)
        return np.concatenate([V, mu * N])

    def constraints(self, y: np.ndarray) -> np.ndarray:
        X, V = y[: self.n], y[self.n:]
        return np.array([float(X @ (self.Ainv * X)) - 1.0, float(V @ (self.Ainv * X))])

    def speed(self, y: np.ndarray) -> float:
        V = y[self.n:]
        return float(np.sqrt(V @ V))

    def joachimsthal(self, y: np.ndarray) -> float:
        """(X, A^{-2} X)(X', A^{-1} X'), constant along geodesics."""
        X, V = y[: self.n], y[self.n:]
        N = self.Ainv * X
        return float(N @ N) * float(V @ (self.Ainv * V))

    def random_state(self, rng: np.random.Generator) -> np.ndarray:
        X = rng.standard_normal(self.n)
        X /= np.sqrt(float(X @ (self.Ainv * X)))
        N = self.Ainv * X
        V = rng.standard_normal(self.n)
        V -= float(V @ N) / float(N @ N) * N
        return np.concatenate([X, V / np.linalg.norm(V)])

    def knorrer_rate(self, y: np.ndarray) -> float:
        """dtau_1/ds = sqrt((X', A^{-1} X') / (X, A^{-2} X))."""
        X, V = y[: self.n], y[self.n:]
        N = self.Ainv * X
        return float(np.sqrt(float(V @ (self.Ainv * V)) / float(N @ N)))

    def neumann_point(self, y: np.ndarray) -> np.ndarray:
        """Image [q, dq/dtau_1] of a geodesic state under the Knoerrer map."""
        X, V = y[: self.n], y[self.n:]
        N = self.Ainv * X
        r = np.linalg.norm(N)
        q = N / r
        W = self.Ainv * V
        dq_ds = W / r - q * float(q @ W) / r
        return np.concatenate([q, dq_ds / self.knorrer_rate(y)])


def quadric_geodesic_rhs(A, X, dX) -> tuple[np.ndarray, np.ndarray]:
    sys = QuadricGeodesic(A)
    d = sys.rhs(np.concatenate([X, dX]))
    return d[: sys.n], d[sys.n:]


def on_confocal_quadric(A, X, alpha: float) -> float:
    """Residual of sum_k X_k^2 / (alpha - A_k) + 1."""
    A = np.asarray(A, dtype=float)
    return float(np.sum(np.asarray(X) ** 2 / (alpha - A))) + 1.0


@dataclass
class KnorrerResult:
    trajectory: Trajectory
    max_neumann_residual: float
    max_f0: float


def neumann_residual(A, y: np.ndarray, dy: np.ndarray) -> float:
    """|q'' + A^{-1} q - lambda q| with lambda = (A^{-1} q, q) - (q', q')."""
    return float(np.linalg.norm(dy[len(A):] - Neumann(A).rhs(y)[len(A):]))


def knorrer_map(traj: Trajectory, A, n_samples: int | None = None, fd_step: float = 1e-5) -> KnorrerResult:
    """Map a geodesic trajectory (states [X, dX/ds] in s) to the Neumann system.

    The image is resampled on a uniform tau_1 grid.  The Neumann residual
    is evaluated at every geodesic sample; q'' is obtained by a central
    difference of the image velocity along the geodesic flow.
    """
    geo = QuadricGeodesic(A)
    n = geo.n
    resid = []
    f0 = []
    for y in traj.states:
        img = geo.neumann_point(y)
        v = geo.rhs(y)
        up = geo.neumann_point(y + fd_step * v)
        down = geo.neumann_point(y - fd_step * v)
        ddq = (up[n:] - down[n:]) / (2.0 * fd_step) / geo.knorrer_rate(y)
        dimg = np.concatenate([img[n:], ddq])
        resid.append(neumann_residual(geo.A, img, dimg))
        f0.append(abs(f0_integral(geo.A, img[:n], img[n:])))
    image = reparameterize(traj, geo.knorrer_rate, n_samples=n_samples, method="spline", time_name="tau1")
    states = np.array([geo.neumann_point(y) for y in image.states])
    out = Trajectory(image.times, states, {"s": image.channels["t"]}, time_name="tau1")
    out.channels["F0"] = np.array([f0_integral(geo.A, y[:n], y[n:]) for y in states])
    return KnorrerResult(out, float(max(resid)), float(max(f0)))


def moser_lax(A, X, gamma) -> tuple[np.ndarray, np.ndarray]:
    """L = P (A - X (x) X) P with P = Id - gamma (x) gamma / (gamma, gamma).

    Returns the matrix and its eigenvalues in ascending order.
    """
    A = np.diag(np.asarray(A, dtype=float))
    X = np.asarray(X, dtype=float)
    g = np.asarray(gamma, dtype=float)
    if not np.any(g):
        raise ParameterError("tangent vector gamma must be nonzero")
    P = np.eye(len(X)) - np.outer(g, g) / float(g @ g)
    L = P @ (A - np.outer(X, X)) @ P
    return L, np.linalg.eigvalsh(L)


def moser_lax_partner(A, X, gamma) -> np.ndarray:
    """B = A^{-1} X (x) A^{-1} gamma - A^{-1} gamma (x) A^{-1} X."""
    Ainv = 1.0 / np.asarray(A, dtype=float)
    return np.outer(Ainv * X, Ainv * gamma) - np.outer(Ainv * gamma, Ainv * X)


@dataclass
class FrameResult:
    times: np.ndarray
    frames: np.ndarray          # (N, n, n) rows e_1..e_n, i.e. g(t)
    omegas: np.ndarray          # (N, n, n) omega = q ^ dq/dt
    eigenvalues: np.ndarray     # (N, n) Lax spectrum
    kinematic_residual: float
    constraint_residual: float
    orthogonality_residual: float
    eigenvalue_drift: float


def frame_at(ves: ReducedVeselova, y: np.ndarray, gap_tol: float = 1e-8):
    """Frame (rows e_1..e_n), omega and Lax spectrum at one reduced state."""
    n = ves.n
    A = ves.A
    q = y[:n]
    qdot = ves.velocity(y)
    Aq = A * q
    qAq = float(q @ Aq)
    X = Aq / np.sqrt(qAq)
    dX = Aq * (-float(q @ (A * qdot)) / qAq**1.5) + (A * qdot) / np.sqrt(qAq)
    speed = np.linalg.norm(dX)
    if speed <= 0:
        raise StateError("zero velocity: the tangent direction is undefined")
    g = dX / speed
    L, _ = moser_lax(A, X, g)
    # q and gamma span the kernel; L acts on their orthogonal complement
    pw, pv = np.linalg.eigh(np.eye(n) - np.outer(q, q) - np.outer(g, g))
    basis = pv[:, pw > 0.5]
    M = basis.T @ L @ basis
    wn, vn = np.linalg.eigh(0.5 * (M + M.T))
    normals = basis @ vn
    if n > 3 and np.min(np.diff(wn)) < gap_tol:
        raise NonGenericDataError("Lax eigenvalues collide")
    if n > 2 and np.min(np.abs(wn)) < gap_tol:
        raise NonGenericDataError("a normal eigenvalue collides with zero")
    frame = np.vstack([q, normals.T, g])
    omega = outer_wedge(q, qdot)
    return frame, omega, np.concatenate([[0.0, 0.0], wn])


def reconstruct_frame(traj: Trajectory, A, gauge: np.ndarray | None = None) -> FrameResult:
    """Moving frame along a reduced Veselova trajectory (states [q, p] in t).

    Eigenvector signs are fixed by continuity, and initially so that the
    frame is positively oriented.  ``gauge`` is an optional constant
    rotation in SO(n-1) applied to e_2..e_n.  The kinematic residual
    compares g^{-1} dg/dt (five-point differences in t) with omega.
    """
    ves = ReducedVeselova(A)
    n = ves.n
    frames, omegas, eigs = [], [], []
    prev = None
    for y in traj.states:
        frame, omega, w = frame_at(ves, y)
        if prev is None:
            if np.linalg.det(frame) < 0:
                frame[n - 2] *= -1.0
        else:
            for i in range(1, n - 1):
                if frame[i] @ prev[i] < 0:
                    frame[i] *= -1.0
        prev = frame
        frames.append(frame)
        omegas.append(omega)
        eigs.append(w)
    frames = np.array(frames)
    if gauge is not None:
        G = np.eye(n)
        G[1:, 1:] = np.asarray(gauge, dtype=float)
        frames = np.einsum("ij,tjk->tik", G, frames)
    omegas = np.array(omegas)
    eigs = np.array(eigs)
    t = traj.times
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-9):
        raise StateError("reconstruction needs uniformly sampled times")
    # five-point central difference; g = frame, g^{-1} dg/dt = g^T dg/dt
    dg = (frames[:-4] - 8.0 * frames[1:-3] + 8.0 * frames[3:-1] - frames[4:]) / (12.0 * dt[0])
    kin = np.einsum("tji,tjk->tik", frames[2:-2], dg) - omegas[2:-2]
    kin_res = float(np.max(np.linalg.norm(kin, axis=(1, 2))))
    cons = 0.0
    for fr, om in zip(frames, omegas):
        for i in range(1, n):
            for j in range(i + 1, n):
                cons = max(cons, abs(float(fr[i] @ om @ fr[j])))
    ortho = float(np.max(np.linalg.norm(np.einsum("tij,tkj->tik", frames, frames) - np.eye(n), axis=(1, 2))))
    drift = float(np.max(np.abs(eigs - eigs[0])))
    return FrameResult(t, frames, omegas, eigs, kin_res, cons, ortho, drift)
