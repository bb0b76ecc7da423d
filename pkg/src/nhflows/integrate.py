"""Time stepping, invariant monitoring and trajectory post-processing.

Vector fields are callables ``f(y) -> dy/dt`` on flat float arrays.  The
default scheme is classical fixed-step RK4; ``integrate_adaptive`` wraps an
embedded Dormand-Prince pair from scipy for long or stiff-ish runs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .errors import DegenerateOrbitError, IntegrityError, NumericError, RateError

Field = Callable[[np.ndarray], np.ndarray]

FD_STEP = 1e-5
INTEGRITY_FACTOR = 10.0


@dataclass
class Monitor:
    """A scalar invariant tracked during integration.

    Drift is measured against the value at the initial state, relative to
    ``max(|f0|, scale)`` when ``relative`` is set and absolute otherwise.
    ``target`` replaces the initial value as reference when given (used for
    constraints, which must stay at zero).
    """

    name: str
    fn: Callable[[np.ndarray], float]
    tol: float
    relative: bool = True
    scale: float = 1.0
    target: float | None = None

    def reference(self, y0: np.ndarray) -> float:
        return float(self.fn(y0)) if self.target is None else self.target

    def drift(self, value: float, ref: float) -> float:
        d = abs(value - ref)
        if self.relative:
            d /= max(abs(ref), self.scale)
        return d


@dataclass
class Trajectory:
    """Sampled solution: ``times`` (N,), ``states`` (N, d) and named channels."""

    times: np.ndarray
    states: np.ndarray
    channels: dict[str, np.ndarray] = field(default_factory=dict)
    time_name: str = "t"

    def __len__(self) -> int:
        return self.times.size

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def max_drift(self, name: str) -> float:
        return float(np.max(self.channels[name + ".drift"]))


def rk4_step(f: Field, y: np.ndarray, dt: float) -> np.ndarray:
    """One classical Runge-Kutta step; raises ``NumericError`` on NaN/inf."""
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    y_new = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(y_new)):
        raise NumericError("non-finite state produced by RK4 step")
    return y_new


def _evaluate_monitors(monitors, refs, y, t, store):
    for mon, ref in zip(monitors, refs):
        v = float(mon.fn(y))
        d = mon.drift(v, ref)
        if d > INTEGRITY_FACTOR * mon.tol:
            raise IntegrityError(f"monitor {mon.name!r} drifted by {d:.3e} at t={t:.6g} (tolerance {mon.tol:.1e})")
        store[mon.name].append(v)
        store[mon.name + ".drift"].append(d)


def integrate(
    f: Field,
    y0: np.ndarray,
    t_final: float,
    dt: float,
    monitors: Sequence[Monitor] = (),
    projection: Callable[[np.ndarray], np.ndarray] | None = None,
    stride: int = 100,
    record_every: int = 1,
) -> Trajectory:
    """Fixed-step RK4 from t=0 to ``t_final``.

    The state is recorded every ``record_every`` steps (and at the end);
    monitors are evaluated at recorded states, and a drift above ten times a
    monitor's tolerance aborts with ``IntegrityError``.  ``projection`` is
    applied every ``stride`` steps when given.
    """
    if dt <= 0 or t_final < 0:
        raise ValueError("need dt > 0 and t_final >= 0")
    y = np.array(y0, dtype=float)
    nsteps = int(round(t_final / dt))
    if abs(nsteps * dt - t_final) > 1e-9 * max(1.0, t_final):
        raise ValueError("t_final must be an integer multiple of dt")
    refs = [mon.reference(y) for mon in monitors]
    store: dict[str, list] = {}
    for mon in monitors:
        store[mon.name] = []
        store[mon.name + ".drift"] = []
    times = [0.0]
    states = [y.copy()]
    _evaluate_monitors(monitors, refs, y, 0.0, store)
    for k in range(1, nsteps + 1):
        y = rk4_step(f, y, dt)
        if projection is not None and k % stride == 0:
            y = projection(y)
        if k % record_every == 0 or k == nsteps:
            t = k * dt
            times.append(t)
            states.append(y.copy())
            _evaluate_monitors(monitors, refs, y, t, store)
    channels = {name: np.array(vals) for name, vals in store.items()}
    return Trajectory(np.array(times), np.array(states), channels)


def integrate_adaptive(
    f: Field,
    y0: np.ndarray,
    t_final: float,
    t_eval: np.ndarray | None = None,
    rtol: float = 1e-11,
    atol: float = 1e-13,
    method: str = "DOP853",
) -> Trajectory:
    """Embedded-pair integration (scipy ``solve_ivp``) sampled at ``t_eval``."""
    sol = solve_ivp(lambda t, y: f(y), (0.0, t_final), np.asarray(y0, dtype=float),
                    method=method, rtol=rtol, atol=atol, t_eval=t_eval)
    if not sol.success:
        raise NumericError(sol.message)
    if not np.all(np.isfinite(sol.y)):
        raise NumericError("non-finite state in adaptive integration")
    return Trajectory(sol.t, sol.y.T.copy(), {"nfev": np.array([sol.nfev])})


def with_monitors(traj: Trajectory, monitors: Sequence[Monitor]) -> Trajectory:
    """Evaluate monitors on an existing trajectory (values and drifts)."""
    refs = [mon.reference(traj.states[0]) for mon in monitors]
    for mon, ref in zip(monitors, refs):
        vals = np.array([mon.fn(y) for y in traj.states])
        traj.channels[mon.name] = vals
        traj.channels[mon.name + ".drift"] = np.array([mon.drift(v, ref) for v in vals])
    return traj


def divergence_estimate(f: Field, y: np.ndarray, h: float = FD_STEP) -> float:
    """Trace of the Jacobian of ``f`` at ``y`` by central differences."""
    y = np.asarray(y, dtype=float)
    total = 0.0
    for i in range(y.size):
        e = np.zeros_like(y)
        e[i] = h
        total += (f(y + e)[i] - f(y - e)[i]) / (2.0 * h)
    return total


def log_density_rate(f: Field, density: Callable[[np.ndarray], float], y: np.ndarray,
                     h: float = FD_STEP) -> float:
    """d/dt ln(density) along ``f`` by a central difference along the flow."""
    v = f(y)
    scale = h / max(1.0, float(np.linalg.norm(v)))
    up = density(y + scale * v)
    down = density(y - scale * v)
    return (np.log(up) - np.log(down)) / (2.0 * scale)


def liouville_residual(f: Field, density: Callable[[np.ndarray], float], states,
                       h: float = FD_STEP) -> np.ndarray:
    """Pointwise |d/dt ln(density) + div f| at each of ``states``.

    Vanishes identically exactly when ``density`` is an invariant measure
    density of ``f`` in the coordinates of the state vector.
    """
    states = np.atleast_2d(states)
    return np.array([abs(log_density_rate(f, density, y, h) + divergence_estimate(f, y, h)) for y in states])


def reparameterize(traj: Trajectory, rate: Callable[[np.ndarray], float], n_samples: int | None = None,
                   method: str = "trapezoid", time_name: str = "tau") -> Trajectory:
    """Resample a trajectory on a uniform grid of the new time tau.

    ``dtau/dt = rate(state)`` is integrated cumulatively (trapezoid rule, or
    the antiderivative of a cubic spline through the rate samples for
    ``method="spline"``) and the states are resampled by cubic
    interpolation onto a uniform tau grid.  The original time is kept as the
    channel ``"t"``.
    """
    r = np.array([rate(y) for y in traj.states])
    if np.any(~np.isfinite(r)) or np.any(r <= 0):
        raise RateError("reparameterization rate must be finite and positive")
    t = traj.times
    if method == "trapezoid":
        tau = np.concatenate([[0.0], np.cumsum(0.5 * (r[1:] + r[:-1]) * np.diff(t))])
    elif method == "spline":
        tau = CubicSpline(t, r).antiderivative()(t)
        tau -= tau[0]
    else:
        raise ValueError(f"unknown method {method!r}")
    n = n_samples or t.size
    grid = np.linspace(0.0, tau[-1], n)
    states = CubicSpline(tau, traj.states, axis=0)(grid)
    t_of_tau = CubicSpline(tau, t)(grid)
    return Trajectory(grid, states, {"t": t_of_tau}, time_name=time_name)


def rotation_number(times: np.ndarray, u: np.ndarray, v: np.ndarray,
                    min_radius: float = 1e-8) -> tuple[float, float]:
    """Mean angular frequency of the planar curve (u(t), v(t)).

    The phase atan2(v, u) is unwrapped and fitted by least squares against
    time; returns the slope and its standard error.  Samples must be dense
    enough that the phase advances by less than pi between neighbours.
    """
    times = np.asarray(times, dtype=float)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    radius = np.hypot(u, v)
    if radius.min() < min_radius * max(radius.max(), 1.0):
        raise DegenerateOrbitError("orbit passes through the origin")
    phase = np.unwrap(np.arctan2(v, u))
    X = np.column_stack([times, np.ones_like(times)])
    coef, res, _, _ = np.linalg.lstsq(X, phase, rcond=None)
    dof = max(times.size - 2, 1)
    resid = phase - X @ coef
    sigma2 = float(resid @ resid) / dof
    cov = sigma2 * np.linalg.inv(X.T @ X)
    return float(coef[0]), float(np.sqrt(cov[0, 0]))
