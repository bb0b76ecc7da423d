"""L+R systems: left-invariant plus right-invariant metric on SO(n).

With B = I + Gamma, where Gamma is a symmetric operator transported by the
motion, the equations are

    B d(omega)/dt = ad_omega^T I omega = [I omega, omega],
    dGamma/dt = Gamma ad_omega + ad_omega^T Gamma = [Gamma, ad_omega],

and sqrt(det B) is an invariant density in the chart (omega, Gamma_ij, i <= j).
The rolling Chaplygin sphere and the body on a spherical support are
written in the usual vector form on so(3) = R^3.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, DegenerateMetricError, MeasureError, ParameterError, StateError
from .integrate import rk4_step
from .liealg import cross3, so, so3_operator
from .lr.general import LrSystem, lr_measure_density
from .operators import Distribution, InertiaOperator

COND_LIMIT = 1e14


def _solve_metric(B: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(B, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateMetricError("I + Gamma is singular") from exc


class LplusRSystem:
    """Flat state [omega (m), upper triangle of Gamma (m(m+1)/2)]."""

    def __init__(self, I: InertiaOperator):
        self.Iop = I
        self.n = I.n
        self.m = I.m
        self.alg = so(self.n)
        self.iu = np.triu_indices(self.m)

    def pack(self, omega, Gamma) -> np.ndarray:
        Gamma = np.asarray(Gamma, dtype=float)
        if not np.allclose(Gamma, Gamma.T, atol=1e-12 * max(1.0, np.abs(Gamma).max())):
            raise ParameterError("Gamma must be symmetric")
        return np.concatenate([np.asarray(omega, dtype=float), Gamma[self.iu]])

    def unpack(self, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        G = np.zeros((self.m, self.m))
        G[self.iu] = y[self.m:]
        G = G + np.triu(G, 1).T
        return y[: self.m], G

    def B(self, y: np.ndarray) -> np.ndarray:
        return self.Iop.mat + self.unpack(y)[1]

    def rhs(self, y: np.ndarray) -> np.ndarray:
        w, G = self.unpack(y)
        B = self.Iop.mat + G
        ad = self.alg.ad(w)
        Iw = self.Iop.mat @ w
        wdot = _solve_metric(B, ad.T @ Iw)
        Gdot = G @ ad - ad @ G
        return np.concatenate([wdot, Gdot[self.iu]])

    def energy(self, y: np.ndarray) -> float:
        w, G = self.unpack(y)
        return 0.5 * float(w @ (self.Iop.mat + G) @ w)

    def momentum_norm(self, y: np.ndarray) -> float:
        w, G = self.unpack(y)
        Bw = (self.Iop.mat + G) @ w
        return float(Bw @ Bw)

    def gamma_spectrum(self, y: np.ndarray) -> np.ndarray:
        return np.linalg.eigvalsh(self.unpack(y)[1])

    def density(self, y: np.ndarray) -> float:
        return lplusr_measure(self.Iop, self.unpack(y)[1])


def lplusr_rhs(I: InertiaOperator, omega, Gamma) -> tuple[np.ndarray, np.ndarray]:
    """(d omega/dt, d Gamma/dt) for the L+R system; omega in wedge coordinates."""
    sys = LplusRSystem(I)
    B = I.mat + np.asarray(Gamma, dtype=float)
    if np.linalg.cond(B) > COND_LIMIT:
        raise ConditioningError("I + Gamma is too badly conditioned")
    d = sys.rhs(sys.pack(omega, Gamma))
    return sys.unpack(d)


def lplusr_measure(I: InertiaOperator, Gamma) -> float:
    """sqrt(det(I + Gamma))."""
    det = float(np.linalg.det(I.mat + np.asarray(Gamma, dtype=float)))
    if det <= 0:
        raise MeasureError("I + Gamma is not positive definite")
    return float(np.sqrt(det))


def _tensor(J) -> np.ndarray:
    J = np.asarray(J, dtype=float)
    if J.ndim == 1:
        J = np.diag(J)
    if J.shape != (3, 3) or not np.allclose(J, J.T) or np.linalg.eigvalsh(J)[0] <= 0:
        raise ParameterError("inertia must be a symmetric positive definite 3x3 tensor")
    return J


def chaplygin_inertia(J, m: float, a: float) -> np.ndarray:
    """Operator J + m a^2 Id of the rolling ball about its contact-free centre."""
    return _tensor(J) + m * a * a * np.eye(3)


class ChaplyginSphere:
    """Rolling Chaplygin sphere; flat state [Omega, alpha, beta, gamma].

    ``inertia`` is I = J + m a^2 Id and K = I Omega - m a^2 (Omega, gamma) gamma
    satisfies dK/dt = K x Omega, which resolves to
    I dOmega/dt = I Omega x Omega + (m a^2 / (1 - m a^2 (gamma, I^{-1} gamma)))
                  (I Omega x Omega, I^{-1} gamma) gamma.
    """

    def __init__(self, inertia, m: float, a: float):
        if m < 0 or a <= 0:
            raise ParameterError("need m >= 0 and a > 0")
        self.I = _tensor(inertia)
        self.Iinv = np.linalg.inv(self.I)
        self.k = m * a * a
        if self.k >= np.linalg.eigvalsh(self.I)[0]:
            raise ParameterError("m a^2 must be below the smallest eigenvalue of I")

    def rhs(self, y: np.ndarray) -> np.ndarray:
        Om, al, be, g = y[:3], y[3:6], y[6:9], y[9:]
        b = cross3(self.I @ Om, Om)
        Ig = self.Iinv @ g
        coef = self.k / (1.0 - self.k * float(g @ Ig)) * float(b @ Ig)
        Omdot = self.Iinv @ (b + coef * g)
        return np.concatenate([Omdot, cross3(al, Om), cross3(be, Om), cross3(g, Om)])

    def K(self, y: np.ndarray) -> np.ndarray:
        Om, g = y[:3], y[9:]
        return self.I @ Om - self.k * float(Om @ g) * g

    def B(self, y: np.ndarray) -> np.ndarray:
        g = y[9:]
        return self.I - self.k * np.outer(g, g)

    def energy(self, y: np.ndarray) -> float:
        Om = y[:3]
        return 0.5 * float(Om @ self.K(y))

    def density(self, y: np.ndarray) -> float:
        """sqrt(det(I - m a^2 gamma (x) gamma))."""
        return float(np.sqrt(np.linalg.det(self.B(y))))

    def integrals(self, y: np.ndarray) -> dict[str, float]:
        K = self.K(y)
        al, be, g = y[3:6], y[6:9], y[9:]
        return {"energy": self.energy(y), "K.K": float(K @ K), "K.alpha": float(K @ al),
                "K.beta": float(K @ be), "K.gamma": float(K @ g)}


def chaplygin_sphere_rhs(inertia, m: float, a: float, Omega, alpha, beta, gamma):
    d = ChaplyginSphere(inertia, m, a).rhs(np.concatenate([Omega, alpha, beta, gamma]))
    return d[:3], d[3:6], d[6:9], d[9:]


def frame_products(y: np.ndarray) -> np.ndarray:
    """The six products (alpha, alpha), (beta, beta), (gamma, gamma), (alpha, beta), (alpha, gamma), (beta, gamma)."""
    al, be, g = y[3:6], y[6:9], y[9:12]
    return np.array([al @ al, be @ be, g @ g, al @ be, al @ g, be @ g])


class SphericalSupport:
    """Body rolling on a spherical support; flat state [Omega, alpha, beta, gamma].

    Gamma = a alpha (x) alpha + b beta (x) beta + c gamma (x) gamma in the body
    frame, K = (I + Gamma) Omega, dK/dt = K x Omega and the frame vectors
    obey the Poisson equations.
    """

    def __init__(self, inertia, a: float, b: float, c: float):
        self.I = _tensor(inertia)
        self.coef = np.array([a, b, c], dtype=float)

    def Gamma(self, y: np.ndarray) -> np.ndarray:
        F = y[3:12].reshape(3, 3)
        return F.T @ (self.coef[:, None] * F)

    def B(self, y: np.ndarray) -> np.ndarray:
        return self.I + self.Gamma(y)

    def rhs(self, y: np.ndarray) -> np.ndarray:
        Om = y[:3]
        F = y[3:12].reshape(3, 3)
        B = self.I + F.T @ (self.coef[:, None] * F)
        Omdot = _solve_metric(B, cross3(self.I @ Om, Om))
        Fdot = cross3(F, Om)
        return np.concatenate([Omdot, Fdot.ravel()])

    def K(self, y: np.ndarray) -> np.ndarray:
        return self.B(y) @ y[:3]

    def energy(self, y: np.ndarray) -> float:
        return 0.5 * float(y[:3] @ self.K(y))

    def density(self, y: np.ndarray) -> float:
        det = float(np.linalg.det(self.B(y)))
        if det <= 0:
            raise MeasureError("I + Gamma is not positive definite")
        return float(np.sqrt(det))

    def density_expanded(self, y: np.ndarray) -> float:
        """Expansion of sqrt(det(I + Gamma)) in the frame invariants."""
        al, be, g = y[3:6], y[6:9], y[9:12]
        a, b, c = self.coef
        I = self.I
        Iinv = np.linalg.inv(I)
        detI = float(np.linalg.det(I))
        s = (1.0 + a * (al @ Iinv @ al) + b * (be @ Iinv @ be) + c * (g @ Iinv @ g)
             + b * c / detI * (al @ I @ al) + a * c / detI * (be @ I @ be)
             + a * b / detI * (g @ I @ g) + a * b * c / detI)
        return float(np.sqrt(detI * s))

    def integrals(self, y: np.ndarray) -> dict[str, float]:
        K = self.K(y)
        al, be, g = y[3:6], y[6:9], y[9:12]
        return {"energy": self.energy(y), "K.K": float(K @ K), "K.alpha": float(K @ al),
                "K.beta": float(K @ be), "K.gamma": float(K @ g)}


def support_gamma_from_balls(D, rho, gammas, J=None):
    """Body operator and Gamma for balls with radii rho_k and coefficients D_k.

    Returns (I, Gamma) with I = J - sum_k (D_k / rho_k^2) Id and
    Gamma = sum_k (D_k / rho_k^2) gamma^k (x) gamma^k.  ``J`` defaults to zero,
    in which case only the scalar correction is returned as I.
    """
    D = np.atleast_1d(np.asarray(D, dtype=float))
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    G = np.atleast_2d(np.asarray(gammas, dtype=float))
    if np.any(rho <= 0) or np.any(D <= 0):
        raise ParameterError("coefficients and radii must be positive")
    if G.ndim != 2 or G.shape[1] != 3 or not np.allclose(np.linalg.norm(G, axis=1), 1.0, atol=1e-10):
        raise ParameterError("ball directions must be unit 3-vectors")
    if not (D.size == rho.size == G.shape[0]):
        raise ParameterError("need one coefficient, radius and direction per ball")
    w = D / rho**2
    Gamma = np.einsum("k,ki,kj->ij", w, G, G)
    base = np.zeros((3, 3)) if J is None else _tensor(J)
    return base - w.sum() * np.eye(3), Gamma


@dataclass
class LimitSweepReport:
    eps: np.ndarray
    deviations: np.ndarray
    slope: float
    density_spread: np.ndarray
    steps: np.ndarray


def limit_system(I: InertiaOperator, dist: Distribution, eps: float, omega0: np.ndarray):
    """L+R system with Gamma = eps sum alpha^i (x) alpha^i started at g = identity."""
    sys = LplusRSystem(I)
    Gamma = eps * dist.vectors.T @ dist.vectors
    return sys, sys.pack(omega0, Gamma)


def lr_limit_sweep(I: InertiaOperator, dist: Distribution, eps_list, horizon: float,
                   dt0: float = 1e-3, omega0: np.ndarray | None = None, seed: int = 0,
                   samples: int = 20) -> LimitSweepReport:
    """Distance between L+R flows with Gamma = eps sum alpha (x) alpha and the LR flow.

    Both start at g = identity from the same admissible omega.  For each eps
    the sup-norm distance of omega over [0, horizon] is recorded (RK4 with
    dt = min(dt0, 0.1 / sqrt(eps))), together with the relative spread of
    sqrt(det B) / sqrt(eps^rho) divided by the LR density along the L+R run.
    """
    rng = np.random.default_rng(seed)
    A = I.inverse()
    lr = LrSystem(A, dist.rho)
    if omega0 is None:
        omega0 = dist.d_projector @ rng.standard_normal(I.m)
    omega0 = np.asarray(omega0, dtype=float)
    if np.linalg.norm(dist.vectors @ omega0) > 1e-12:
        raise StateError("initial omega violates the constraints")
    eps_list = np.asarray(eps_list, dtype=float)
    devs, spreads, steps = [], [], []
    for eps in eps_list:
        dt = min(dt0, 0.1 / np.sqrt(eps))
        nsteps = int(np.ceil(horizon / dt))
        dt = horizon / nsteps
        record = max(1, nsteps // samples)
        sys, y = limit_system(I, dist, eps, omega0)
        ylr = lr.initial_state(dist, omega0)
        dev = 0.0
        ratios = []
        for k in range(1, nsteps + 1):
            y = rk4_step(sys.rhs, y, dt)
            ylr = rk4_step(lr.rhs, ylr, dt)
            w_lr = A.mat @ ylr[: I.m]
            dev = max(dev, float(np.max(np.abs(y[: I.m] - w_lr))))
            if k % record == 0:
                _, G = sys.unpack(y)
                # transported constraints recovered from the L+R state
                wG, vG = np.linalg.eigh(G / eps)
                al = vG[:, wG > 0.5].T
                ratios.append(sys.density(y) / np.sqrt(eps**dist.rho) / lr_measure_density(A, al))
        ratios = np.array(ratios)
        devs.append(dev)
        spreads.append(float(np.ptp(ratios) / np.mean(ratios)))
        steps.append(dt)
    slope = float(np.polyfit(np.log(eps_list), np.log(devs), 1)[0])
    return LimitSweepReport(eps_list, np.array(devs), slope, np.array(spreads), np.array(steps))


def so3_lplusr_from_vectors(J, Gamma3) -> tuple[InertiaOperator, np.ndarray]:
    """Wedge-basis (I, Gamma) from 3x3 vector-form tensors."""
    return InertiaOperator(3, so3_operator(_tensor(J))), so3_operator(np.asarray(Gamma3, dtype=float))

