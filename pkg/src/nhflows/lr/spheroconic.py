"""Spheroconic coordinates on S^{n-1} and the separated quadratures.

For distinct I_1..I_n the coordinates lambda_1..lambda_{n-1} of q are the
roots of sum_i q_i^2 / (I_i - lambda) = 0, and inversely

    q_i^2 = prod_k (I_i - lambda_k) / prod_{j != i} (I_i - I_j).

With I_i = 1/A_i the reduced Veselova motion in the time tau satisfies

    sum_j lambda_j^{k-1} lambda_j' / (2 sqrt R(lambda_j)) = delta_{k,n-1} sqrt(2h),
    R(lambda) = -prod_i (lambda - I_i) * lambda * prod_{m=2}^{n-1} (lambda - c_m),

with h the value of L* and constants c_m fixed by the initial data.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from ..errors import BoundaryError, BranchError, FitError, ParameterError
from ..integrate import Trajectory
from .veselova import ReducedVeselova

ROOT_TOL = 1e-13


def _distinct(I) -> np.ndarray:
    I = np.asarray(I, dtype=float)
    if I.ndim != 1 or I.size < 2:
        raise ParameterError("need at least two parameters")
    if np.min(np.diff(np.sort(I))) <= 0:
        raise ParameterError("parameters must be distinct")
    return I


def spheroconic_coords(q, I) -> np.ndarray:
    """Roots lambda_1 < ... < lambda_{n-1} of sum q_i^2 / (I_i - lambda)."""
    I = _distinct(I)
    q = np.asarray(q, dtype=float)
    q = q / np.linalg.norm(q)
    if np.any(np.abs(q) < 1e-12):
        raise BoundaryError("q lies on a coordinate hyperplane")
    order = np.argsort(I)
    Is, q2 = I[order], q[order] ** 2

    def f(lam):
        return float(np.sum(q2 / (Is - lam)))

    roots = []
    for a, b in zip(Is[:-1], Is[1:]):
        eps = 1e-15 * max(1.0, abs(a), abs(b))
        lo, hi = a + eps, b - eps
        while f(lo) > 0:
            eps *= 0.1
            lo = a + eps
            if eps < 1e-300:
                raise BoundaryError("root coincides with a parameter")
        roots.append(brentq(f, lo, hi, xtol=ROOT_TOL, rtol=4 * np.finfo(float).eps, maxiter=500))
    return np.array(roots)


def spheroconic_to_q2(lam, I) -> np.ndarray:
    """Squares q_i^2 = prod_k (I_i - lambda_k) / prod_{j != i} (I_i - I_j)."""
    I = _distinct(I)
    lam = np.asarray(lam, dtype=float)
    out = np.empty(I.size)
    for i in range(I.size):
        others = np.delete(I, i)
        out[i] = np.prod(I[i] - lam) / np.prod(I[i] - others)
    return out


def spheroconic_rates(q, dq, I, lam=None) -> np.ndarray:
    """Derivatives of the spheroconic coordinates along the velocity dq."""
    I = np.asarray(I, dtype=float)
    if lam is None:
        lam = spheroconic_coords(q, I)
    out = np.empty(lam.size)
    for k, l in enumerate(lam):
        d = I - l
        out[k] = -float(np.sum(2.0 * q * dq / d)) / float(np.sum(q**2 / d**2))
    return out


def stackel_lagrangian(lam, dlam, I) -> float:
    """L* in spheroconic coordinates.

    L* = -(1/8) sum_k prod_{s != k}(lambda_k - lambda_s) / (prod_i(lambda_k - I_i) lambda_k) lambda_k'^2;
    the overall minus sign makes it positive (checked against the
    Cartesian form for several n).
    """
    lam = np.asarray(lam, dtype=float)
    dlam = np.asarray(dlam, dtype=float)
    total = 0.0
    for k in range(lam.size):
        num = np.prod(lam[k] - np.delete(lam, k))
        den = float(np.prod(lam[k] - np.asarray(I))) * lam[k]
        total += num / den * dlam[k] ** 2
    return -total / 8.0


def _vandermonde_weights(lam: np.ndarray, h: float) -> np.ndarray:
    # solution s of sum_j lambda_j^{k-1} s_j = delta_{k,n-1} sqrt(2h)
    return np.array([np.sqrt(2.0 * h) / np.prod(l - np.delete(lam, j)) for j, l in enumerate(lam)])


def fit_constants(lam, dlam, I, h: float) -> tuple[np.ndarray, float]:
    """Constants c_2..c_{n-1} from one phase point; returns (c, fit residual).

    Each coordinate gives R(lambda_j) = (lambda_j' / (2 s_j))^2, which is
    linear in the coefficients of the monic polynomial prod (lambda - c_m).
    With n-1 equations for n-2 unknowns the least-squares residual measures
    the consistency of the quadratures.
    """
    lam = np.asarray(lam, dtype=float)
    dlam = np.asarray(dlam, dtype=float)
    I = np.asarray(I, dtype=float)
    s = _vandermonde_weights(lam, h)
    R = (dlam / (2.0 * s)) ** 2
    C = np.array([-R[j] / (float(np.prod(l - I)) * l) for j, l in enumerate(lam)])
    deg = lam.size - 1
    if deg == 0:
        return np.array([]), float(abs(C[0] - 1.0))
    V = np.vander(lam, deg + 1)  # columns lambda^deg .. lambda^0
    rhs = C - V[:, 0]
    coef, *_ = np.linalg.lstsq(V[:, 1:], rhs, rcond=None)
    if np.linalg.cond(V[:, 1:]) > 1e12:
        raise FitError("constants are ill determined at this point")
    resid = float(np.max(np.abs(V[:, 1:] @ coef - rhs)))
    c = np.sort(np.roots(np.concatenate([[1.0], coef])).real)
    return c, resid


def radicand(lam, I, c) -> np.ndarray:
    """R(lambda) = -prod (lambda - I_i) * lambda * prod (lambda - c_m)."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    out = np.empty(lam.size)
    for j, l in enumerate(lam):
        out[j] = -float(np.prod(l - np.asarray(I))) * l * float(np.prod(l - np.asarray(c)))
    return out


@dataclass
class QuadratureReport:
    constants: np.ndarray
    fit_residual: float
    max_residual: float
    max_constant_drift: float
    samples_used: int
    samples_excluded: int


def quadrature_residual(traj: Trajectory, A, h: float | None = None, window: int = 5) -> QuadratureReport:
    """Check the separated quadratures along a trajectory in the time tau.

    ``traj`` holds reduced Veselova states [q, p] sampled in tau (see
    ``chaplygin_reparameterize``).  The constants are fitted at the first
    usable sample and refitted at every sample to measure their drift.
    Samples within ``window`` samples of a turning point (sign change of
    some lambda_j') are excluded.  The branch of sqrt(R(lambda_j)) is the
    one consistent with the sign of lambda_j'.
    """
    ves = ReducedVeselova(A)
    I = 1.0 / ves.A
    if h is None:
        y0 = traj.states[0]
        h = ves.reparameterized_lagrangian(y0[: ves.n], ves.tau_velocity(y0))
    lams, dlams = [], []
    for y in traj.states:
        q = y[: ves.n]
        lam = spheroconic_coords(q, I)
        lams.append(lam)
        dlams.append(spheroconic_rates(q, ves.tau_velocity(y), I, lam))
    lams, dlams = np.array(lams), np.array(dlams)
    bad = np.zeros(len(lams), dtype=bool)
    for j in range(lams.shape[1]):
        flips = np.nonzero(np.diff(np.sign(dlams[:, j])) != 0)[0]
        for f in flips:
            bad[max(0, f - window + 1): f + window + 1] = True
    good = np.nonzero(~bad)[0]
    if good.size == 0:
        raise BranchError("every sample is close to a turning point")
    i0 = good[0]
    c0, fit0 = fit_constants(lams[i0], dlams[i0], I, h)
    worst = 0.0
    drift = 0.0
    for i in good:
        lam, dlam = lams[i], dlams[i]
        s = _vandermonde_weights(lam, h)
        R = radicand(lam, I, c0)
        root = np.sign(dlam * s) * np.sqrt(np.abs(R))
        root = np.where(R < 0, np.nan, root)
        terms = dlam / (2.0 * root)
        for k in range(lam.size):
            target = np.sqrt(2.0 * h) if k == lam.size - 1 else 0.0
            val = float(np.sum(lam**k * terms)) - target
            worst = max(worst, abs(val)) if np.isfinite(val) else np.inf
        c, _ = fit_constants(lam, dlam, I, h)
        if c.size:
            drift = max(drift, float(np.max(np.abs(c - c0))))
    return QuadratureReport(c0, fit0, worst, drift, int(good.size), int(bad.sum()))
