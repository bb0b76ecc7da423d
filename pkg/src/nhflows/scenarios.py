"""Named verification scenarios.

Each scenario builds a system from its parameters, integrates it and
returns a list of checks (measured value, tolerance, comparison) grouped in
categories:

* ``conservation``: first-integral drift over the conservation horizon
* ``constraint``: constraint residuals over the same run, no projection
* ``measure``: Liouville residuals of invariant densities
* ``runtime``: wall-clock budgets
* ``property``: everything else (correspondences, oracles, rates)

The aggregate scenarios ``conservation_suite``, ``constraint_suite`` and
``measure_suite`` rerun (or reuse from the in-process cache) their member
scenarios and collect the checks of one category.
"""
from __future__ import annotations

import copy
import json
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from .config import resolve_config
from .eps import (
    EpsSystem,
    cartan_integral,
    cartan_suslov_system,
    chain_split_rhs,
    eps_rhs,
    eps_rhs_decomposed,
    fk_frequencies,
    restricted_field,
    split_integrals,
    suslov_fk_system,
)
from .errors import ConfigError
from .integrate import (
    Monitor,
    Trajectory,
    divergence_estimate,
    integrate,
    integrate_adaptive,
    liouville_residual,
    rotation_number,
)
from .liealg import SO3_VECTOR_TO_WEDGE, so, wedge_pairs, wedge_position
from .lplusr import (
    ChaplyginSphere,
    LplusRSystem,
    SphericalSupport,
    chaplygin_inertia,
    frame_products,
    lr_limit_sweep,
    so3_lplusr_from_vectors,
    support_gamma_from_balls,
)
from .lr import (
    LrSystem,
    Neumann,
    QuadricGeodesic,
    ReducedVeselova,
    SpherePotential,
    Veselova3,
    chaplygin_reparameterize,
    knorrer_map,
    lagrange_momenta,
    moser_lax,
    neumann_to_veselova,
    quadrature_residual,
    reconstruct_frame,
    run_maupertuis,
    spheroconic_coords,
    spheroconic_to_q2,
    veselova_to_neumann,
)
from .operators import (
    Distribution,
    chain_operator,
    physical_inertia,
    so3_inertia,
    standard_chain,
    suslov_distribution,
    veselova_distribution,
    veselova_inertia,
)

CONSERVATION_TOL = 1e-8
CONSTRAINT_TOL = 1e-9
LIOUVILLE_TOL = 1e-6
RUNTIME_BUDGET = 30.0
LIOUVILLE_SAMPLES = 20


@dataclass
class Check:
    """One verdict line: ``measured`` compared with ``tolerance``.

    ``comparison`` is ``"<="``, ``"<"``, ``">="`` or ``"in"`` (closed
    interval given as a pair).
    """

    name: str
    measured: float
    tolerance: float | tuple[float, float]
    comparison: str = "<="
    category: str = "property"

    @property
    def passed(self) -> bool:
        v = self.measured
        if v is None or not np.isfinite(v):
            return False
        if self.comparison == "<=":
            return v <= self.tolerance
        if self.comparison == "<":
            return v < self.tolerance
        if self.comparison == ">=":
            return v >= self.tolerance
        if self.comparison == "in":
            lo, hi = self.tolerance
            return lo <= v <= hi
        raise ValueError(f"unknown comparison {self.comparison!r}")

    def as_dict(self) -> dict:
        v = self.measured
        tol = list(self.tolerance) if isinstance(self.tolerance, tuple) else self.tolerance
        return {"name": self.name, "category": self.category, "measured": _json_float(v),
                "comparison": self.comparison, "tolerance": tol, "pass": bool(self.passed)}


def _json_float(v):
    if v is None:
        return None
    v = float(v)
    return v if np.isfinite(v) else repr(v)


@dataclass
class Series:
    """A trajectory to be written as CSV with named state columns."""

    traj: Trajectory
    labels: list[str]


@dataclass
class ScenarioResult:
    scenario: str
    checks: list[Check] = field(default_factory=list)
    series: dict[str, Series] = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def by_category(self, *categories: str) -> list[Check]:
        return [c for c in self.checks if c.category in categories]


@dataclass
class Context:
    params: dict
    integrator: dict
    seed: int

    @property
    def rng(self) -> np.random.Generator:
        # a fresh generator per request keeps every scenario reproducible
        return np.random.default_rng(self.seed)


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    verifies: str
    defaults: dict
    required: tuple[str, ...]
    run: Callable[[Context], ScenarioResult]


REGISTRY: dict[str, Scenario] = {}


def scenario(name: str, description: str, verifies: str, defaults: dict, required: tuple[str, ...] = ()):
    def deco(fn):
        if name in REGISTRY:
            raise ValueError(f"scenario {name!r} registered twice")
        REGISTRY[name] = Scenario(name, description, verifies, defaults, tuple(required), fn)
        return fn
    return deco


def list_scenarios() -> list[tuple[str, str, str]]:
    return [(s.name, s.description, s.verifies) for s in REGISTRY.values()]


_CACHE: dict[str, ScenarioResult] = {}


def cache_key(cfg: dict) -> str:
    return json.dumps({k: cfg[k] for k in ("scenario", "params", "integrator", "seed")}, sort_keys=True)


def clear_cache() -> None:
    _CACHE.clear()


def run_scenario(name: str, raw: dict | None = None, strict_required: bool = False) -> tuple[dict, ScenarioResult]:
    """Resolve the config for ``name`` and run it (results are cached in-process)."""
    if name not in REGISTRY:
        raise ConfigError(f"scenario: unknown scenario {name!r}")
    sc = REGISTRY[name]
    raw = copy.deepcopy(raw) if raw else {}
    if raw.get("scenario") not in (None, name):
        raise ConfigError(f"scenario: config names {raw['scenario']!r} but {name!r} was requested")
    cfg = resolve_config(raw, sc.defaults, sc.required, strict_required)
    cfg["scenario"] = name
    key = cache_key(cfg)
    if key not in _CACHE:
        ctx = Context(cfg["params"], cfg["integrator"], cfg["seed"])
        _CACHE[key] = sc.run(ctx)
    return cfg, _CACHE[key]


# ---------------------------------------------------------------- helpers

def _vec(params: dict, key: str, size: int | None = None, positive: bool = False) -> np.ndarray:
    v = np.asarray(params[key], dtype=float)
    if v.ndim != 1:
        raise ConfigError(f"params.{key}: expected a flat list of numbers")
    if size is not None and v.size != size:
        raise ConfigError(f"params.{key}: expected {size} entries, got {v.size}")
    if positive and np.any(v <= 0):
        raise ConfigError(f"params.{key}: entries must be positive")
    return v


def _conserve(ctx: Context, f, y0, monitors, projection=None):
    """Conservation run over the integrator horizon; returns (trajectory, seconds)."""
    ig = ctx.integrator
    t0 = time.perf_counter()
    traj = integrate(f, y0, ig["t_final"], ig["dt"], monitors,
                     projection=projection if ig["projection"] else None,
                     stride=ig["stride"], record_every=ig["record_every"])
    return traj, time.perf_counter() - t0


def _monitor_checks(traj: Trajectory, monitors, prefix: str = "") -> list[Check]:
    out = []
    for mon in monitors:
        cat = "constraint" if mon.target is not None else "conservation"
        out.append(Check(f"{prefix}{mon.name}_drift", traj.max_drift(mon.name), mon.tol, "<=", cat))
    return out


def _runtime_check(seconds: float, prefix: str = "", budget: float = RUNTIME_BUDGET) -> Check:
    return Check(f"{prefix}runtime_seconds", seconds, budget, "<=", "runtime")


def _subsample(states: np.ndarray, k: int = LIOUVILLE_SAMPLES) -> np.ndarray:
    idx = np.unique(np.linspace(0, len(states) - 1, k).round().astype(int))
    return states[idx]


def _liouville(ctx: Context, f, density, states) -> float:
    return float(np.max(liouville_residual(f, density, _subsample(states), ctx.integrator["fd_step"])))


def _constraint_monitor(name: str, fn, tol: float = CONSTRAINT_TOL) -> Monitor:
    return Monitor(name, lambda y: float(np.max(np.abs(fn(y)))), tol, relative=False, target=0.0)


def _wedge_labels(prefix: str, n: int) -> list[str]:
    return [f"{prefix}{i + 1}{j + 1}" for i, j in wedge_pairs(n)]


def _vec_labels(prefix: str, n: int) -> list[str]:
    return [f"{prefix}{i + 1}" for i in range(n)]


def _euler_top(I: np.ndarray):
    Iinv = 1.0 / I

    def f(w):
        return Iinv * np.cross(I * w, w)

    return f


# ---------------------------------------------------------------- eps

@scenario("suslov", "Suslov-type rigid body on so(n) with constraints omega_ij = 0, i, j > r",
          "energy and constraint preservation; constant solutions for the symmetric pair r = 1",
          {"n": 4, "r": 1, "I": [4.0, 3.0, 2.0, 1.0]}, required=("n", "r", "I"))
def _suslov(ctx: Context) -> ScenarioResult:
    p = ctx.params
    n, r = p["n"], p["r"]
    I = _vec(p, "I", n, positive=True)
    sys = EpsSystem(physical_inertia(I, invert=True), suslov_distribution(n, r))
    x0 = sys.random_admissible(ctx.rng)
    mons = [Monitor("energy", sys.energy, CONSERVATION_TOL)]
    if sys.dist.rho:
        mons.append(_constraint_monitor("constraints", sys.constraints))
    traj, secs = _conserve(ctx, sys.rhs, x0, mons)
    res = ScenarioResult("suslov")
    res.checks += _monitor_checks(traj, mons)
    res.checks.append(_runtime_check(secs))
    if r == 1:
        dev = float(np.max(np.abs(traj.states - x0)))
        res.checks.append(Check("constant_solution_deviation", dev, 1e-12))
    res.series["trajectory"] = Series(traj, _wedge_labels("x", n))
    return res


def _fk_phases(sys: EpsSystem, traj: Trajectory):
    """Amplitude-normalized angle pairs (x_1k, x_2k) for k = 3..n."""
    n = sys.n
    A = sys.A.mat
    i12 = wedge_position(1, 2, n)
    s = A[i12, i12]
    out = []
    for k in range(3, n + 1):
        a, b = wedge_position(1, k, n), wedge_position(2, k, n)
        b1, b2 = A[a, a] - s, A[b, b] - s
        out.append((np.sqrt(b1) * traj.states[:, a], np.sqrt(b2) * traj.states[:, b]))
    return out


@scenario("suslov_fk", "integrable Suslov problem with r = 2 and its rotation frequencies",
          "split first integrals and the closed-form rotation frequencies",
          {"I": [4.0, 3.0, 2.0, 1.0], "x12": 1.0, "transverse": 0.3,
           "fk_time": 10000.0, "fk_sample": 0.1}, required=("I",))
def _suslov_fk(ctx: Context) -> ScenarioResult:
    p = ctx.params
    I = _vec(p, "I", positive=True)
    sys = suslov_fk_system(I)
    n = sys.n
    x0 = p["transverse"] * sys.random_admissible(ctx.rng)
    x0[wedge_position(1, 2, n)] = p["x12"]
    names = ["H", "F"] + [f"F{k}" for k in range(1, n - 1)]
    mons = [Monitor(nm, (lambda x, k=k: split_integrals(sys, x)[k]), CONSERVATION_TOL)
            for k, nm in enumerate(names)]
    mons.append(_constraint_monitor("constraints", sys.constraints))
    traj, secs = _conserve(ctx, sys.rhs, x0, mons)
    res = ScenarioResult("suslov_fk")
    res.checks += _monitor_checks(traj, mons)
    res.checks.append(_runtime_check(secs))

    # standard measure on d for the decomposed form
    B = sys.dist.d_basis

    def fd(z):
        return B @ eps_rhs_decomposed(sys, B.T @ z)

    div = max(abs(divergence_estimate(fd, B @ y, ctx.integrator["fd_step"])) for y in _subsample(traj.states))
    res.checks.append(Check("decomposed_divergence", div, 1e-8, "<=", "measure"))

    # rotation numbers over a long run
    t0 = time.perf_counter()
    grid = np.arange(0.0, p["fk_time"] + 0.5 * p["fk_sample"], p["fk_sample"])
    long = integrate_adaptive(sys.rhs, x0, grid[-1], t_eval=grid)
    slopes = [rotation_number(long.times, u, v)[0] for u, v in _fk_phases(sys, long)]
    secs_fk = time.perf_counter() - t0
    omega = fk_frequencies(I)
    errs = [abs((slopes[k] / slopes[-1]) / (omega[k] / omega[-1]) - 1.0) for k in range(len(slopes) - 1)]
    res.checks.append(Check("frequency_ratio_rel_error", max(errs) if errs else 0.0, 1e-3))
    res.checks.append(Check("frequency_runtime_seconds", secs_fk, 60.0, "<=", "runtime"))
    res.info["fk_frequencies"] = [float(w) for w in omega]
    res.info["measured_rotation_rates"] = [float(s) for s in slopes]
    res.series["trajectory"] = Series(traj, _wedge_labels("x", n))
    return res


@scenario("eps_so4_cartan", "so(4) body with one constraint vector in the Cartan subalgebra",
          "standard measure on the constraint space and the Casimir-combination integral",
          {"I": [1.0, 2.0, 3.0, 4.5], "a": [1.0, 0.7]}, required=("I", "a"))
def _eps_cartan(ctx: Context) -> ScenarioResult:
    p = ctx.params
    I = _vec(p, "I", 4, positive=True)
    a1, a2 = _vec(p, "a", 2)
    sys = cartan_suslov_system(I, a1, a2)
    a = sys.dist.vectors[0]
    x0 = sys.random_admissible(ctx.rng)
    mons = [Monitor("H", sys.energy, CONSERVATION_TOL),
            Monitor("F1", lambda x: cartan_integral(sys, x), CONSERVATION_TOL),
            _constraint_monitor("constraints", sys.constraints)]
    traj, secs = _conserve(ctx, sys.rhs, x0, mons)
    res = ScenarioResult("eps_so4_cartan")
    res.checks += _monitor_checks(traj, mons)
    res.checks.append(_runtime_check(secs))
    res.checks.append(Check("bracket_a_Aa", float(np.linalg.norm(so(4).bracket(a, sys.A.mat @ a))), 1e-12))
    B, f = restricted_field(sys)
    div = max(abs(divergence_estimate(f, B @ y, ctx.integrator["fd_step"])) for y in _subsample(traj.states))
    res.checks.append(Check("restricted_divergence", div, 1e-8, "<=", "measure"))
    res.series["trajectory"] = Series(traj, _wedge_labels("x", 4))
    return res


@scenario("eps_chain", "operator adapted to a chain of subalgebras so(k0) < ... < so(n)",
          "chain splitting of the constrained flow into linear equations",
          {"n": 4, "k0": 2, "A0": [[2.0]], "s": [3.0, 5.0], "constraints": [[2, 3], [3, 4]],
           "samples": 100}, required=("n", "k0", "A0", "s"))
def _eps_chain(ctx: Context) -> ScenarioResult:
    p = ctx.params
    n, k0 = p["n"], p["k0"]
    A = chain_operator(np.asarray(p["A0"], dtype=float), p["s"], standard_chain(n, k0))
    m = A.m
    rows = []
    for pair in p["constraints"]:
        if len(pair) != 2:
            raise ConfigError("params.constraints: expected pairs [i, j]")
        e = np.zeros(m)
        e[wedge_position(int(pair[0]), int(pair[1]), n)] = 1.0
        rows.append(e)
    sys = EpsSystem(A, Distribution(n, np.array(rows).reshape(len(rows), m)))
    rng = ctx.rng
    dev = 0.0
    for _ in range(p["samples"]):
        x = sys.random_admissible(rng)
        dev = max(dev, float(np.max(np.abs(chain_split_rhs(sys, x) - eps_rhs(sys, x)))))
    res = ScenarioResult("eps_chain")
    res.checks.append(Check("chain_vs_general_sup_deviation", dev, 1e-10))
    x0 = sys.random_admissible(rng)
    P0 = A.chain.g0 @ A.chain.g0.T
    mons = [Monitor("energy", sys.energy, CONSERVATION_TOL),
            _constraint_monitor("constraints", sys.constraints)]
    commutative = A.chain.g0.shape[1] == 1
    if commutative:
        x00 = P0 @ x0
        mons.insert(1, Monitor("x0", lambda x: float(np.linalg.norm(P0 @ x - x00)), CONSERVATION_TOL,
                               relative=False, target=0.0))
    traj, secs = _conserve(ctx, sys.rhs, x0, mons)
    checks = _monitor_checks(traj, mons)
    if commutative:
        # x0 is a first integral when g0 is commutative
        for c in checks:
            if c.name == "x0_drift":
                c.category = "conservation"
    res.checks += checks
    res.checks.append(_runtime_check(secs))
    res.info["operator_spectrum"] = [float(v) for v in np.sort(A.eigenvalues())]
    res.series["trajectory"] = Series(traj, _wedge_labels("x", n))
    return res


# ---------------------------------------------------------------- lr

def _random_veselova3_state(rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal(3)
    g /= np.linalg.norm(g)
    Om = rng.standard_normal(3)
    Om -= float(Om @ g) * g
    return np.concatenate([Om, g])


@scenario("veselova3", "three-dimensional Veselova body (Omega, gamma)",
          "energy, constraint (Omega, gamma) = 0 and the invariant density (both candidate forms reported)",
          {"I": [1.0, 1.5, 2.2]}, required=("I",))
def _veselova3(ctx: Context) -> ScenarioResult:
    I = _vec(ctx.params, "I", 3, positive=True)
    sys = Veselova3(np.diag(I))
    rng = ctx.rng
    y0 = _random_veselova3_state(rng)
    mons = [Monitor("energy", sys.energy, CONSERVATION_TOL),
            Monitor("gamma.gamma", lambda y: float(y[3:] @ y[3:]), CONSERVATION_TOL),
            _constraint_monitor("constraint", sys.constraint)]
    traj, secs = _conserve(ctx, sys.rhs, y0, mons)
    res = ScenarioResult("veselova3")
    res.checks += _monitor_checks(traj, mons)
    res.checks.append(_runtime_check(secs))
    r_sqrt = _liouville(ctx, sys.rhs, sys.density, traj.states)
    r_plain = _liouville(ctx, sys.rhs, sys.density_unrooted, traj.states)
    res.info["density_residual_sqrt"] = r_sqrt
    res.info["density_residual_unrooted"] = r_plain
    res.info["density_resolved"] = "sqrt((I^-1 gamma, gamma))" if r_sqrt <= r_plain else "(I^-1 gamma, gamma)"
    res.checks.append(Check("density_liouville", min(r_sqrt, r_plain), LIOUVILLE_TOL, "<=", "measure"))
    # the general LR field on so(3) reproduces the vector form
    P = SO3_VECTOR_TO_WEDGE
    lr = LrSystem(so3_inertia(I).inverse(), 1)
    worst = 0.0
    for y in _subsample(traj.states, 10):
        Om, g = y[:3], y[3:]
        d = sys.rhs(y)
        dl = lr.rhs(lr.pack(P @ (I * Om), (P @ g)[None, :]))
        worst = max(worst, float(np.max(np.abs(dl - np.concatenate([P @ (I * d[:3]), P @ d[3:]])))))
    res.checks.append(Check("lr_form_agreement", worst, 1e-12))
    res.series["trajectory"] = Series(traj, _vec_labels("Omega", 3) + _vec_labels("gamma", 3))
    return res


@scenario("veselova_n", "n-dimensional Veselova problem: LR flow on so(n) and its reduction to the sphere",
          "LR first integrals and density; reduced density (Aq, q)^(-(n-2)/2); geodesic energy after the time change",
          {"A": [1.0, 2.0, 3.0, 4.0], "energy": 0.5, "exponent_shift": 0.5, "lstar_t_final": 20.0},
          required=("A",))
def _veselova_n(ctx: Context) -> ScenarioResult:
    p = ctx.params
    A = _vec(p, "A", positive=True)
    n = A.size
    if n < 3:
        raise ConfigError("params.A: need at least three entries")
    rng = ctx.rng
    res = ScenarioResult("veselova_n")

    # LR flow on so(n)
    dist = veselova_distribution(n)
    Iop = veselova_inertia(A)
    lr = LrSystem(Iop.inverse(), dist.rho)
    y0 = lr.initial_state(dist, dist.d_projector @ rng.standard_normal(Iop.m))
    eye = np.eye(dist.rho)
    mons = [Monitor("lr_energy", lr.energy, CONSERVATION_TOL),
            Monitor("lr_alpha_products", lambda y: float(np.max(np.abs(lr.alpha_products(y) - eye))),
                    CONSERVATION_TOL, relative=False, target=0.0),
            _constraint_monitor("lr_constraints", lr.constraints)]
    traj, secs = _conserve(ctx, lr.rhs, y0, mons)
    checks = _monitor_checks(traj, mons)
    for c in checks:
        if c.name == "lr_alpha_products_drift":
            c.category = "conservation"
    res.checks += checks
    res.checks.append(_runtime_check(secs, "lr_"))
    res.checks.append(Check("lr_density_liouville", _liouville(ctx, lr.rhs, lr.density, traj.states),
                            LIOUVILLE_TOL, "<=", "measure"))
    labels = _wedge_labels("x", n) + [f"alpha{k + 1}_{lab}" for k in range(dist.rho) for lab in _wedge_labels("", n)]
    res.series["lr"] = Series(traj, labels)

    # reduced system on the sphere
    ves = ReducedVeselova(A)
    z0 = ves.random_state(rng, p["energy"])
    rmons = [Monitor("reduced_energy", ves.energy, CONSERVATION_TOL),
             _constraint_monitor("sphere_constraints", ves.sphere_constraints)]
    rtraj, rsecs = _conserve(ctx, ves.rhs, z0, rmons, projection=ves.normalize)
    res.checks += _monitor_checks(rtraj, rmons)
    res.checks.append(_runtime_check(rsecs, "reduced_"))
    exact = -(n - 2) / 2.0
    res.checks.append(Check("reduced_density_liouville",
                            _liouville(ctx, ves.rhs, ves.density, rtraj.states), LIOUVILLE_TOL, "<=", "measure"))
    wrong = exact + p["exponent_shift"]
    res.checks.append(Check("negative_control_liouville",
                            _liouville(ctx, ves.rhs, lambda y: ves.density(y, wrong), rtraj.states),
                            1e-2, ">=", "measure"))
    res.series["reduced"] = Series(rtraj, _vec_labels("q", n) + _vec_labels("p", n))

    # geodesic energy in the new time (densely sampled run)
    ig = ctx.integrator
    dense = integrate(ves.rhs, z0, p["lstar_t_final"], ig["dt"])
    tau = chaplygin_reparameterize(dense, A)
    L = tau.channels["L*"]
    res.checks.append(Check("lstar_relative_drift", float(np.max(np.abs(L - L[0])) / abs(L[0])), 1e-7))
    return res


def _neumann_pair(ctx: Context, A: np.ndarray, h: float, tau_final: float, rng) -> dict[str, float]:
    ves = ReducedVeselova(A)
    neu = Neumann(A)
    dt = ctx.integrator["dt"]
    z0 = ves.random_state(rng, h)
    # enough t to cover tau_1 in [0, tau_final]
    min_rate = np.sqrt(2.0 * h * ves.detA / A.max())
    t_end = dt * np.ceil(1.05 * tau_final / min_rate / dt)
    vt = integrate(ves.rhs, z0, t_end, dt)
    image = veselova_to_neumann(vt, A, h)
    keep = image.times <= tau_final + 1e-12
    grid = image.times[keep]
    direct = integrate_adaptive(neu.rhs, image.states[0], grid[-1], t_eval=grid)
    fwd = float(np.max(np.abs(direct.states - image.states[keep])))
    f0 = float(np.max(np.abs(image.channels["F0"][keep])))
    # inverse direction: Neumann data on F0 = 0 back to Veselova
    ngrid = np.linspace(0.0, tau_final, int(round(tau_final / dt)) + 1)
    ntraj = integrate_adaptive(neu.rhs, image.states[0], tau_final, t_eval=ngrid)
    back = neumann_to_veselova(ntraj, A, h)
    vdirect = integrate_adaptive(ves.rhs, back.states[0], back.times[-1], t_eval=back.times)
    inv = float(np.max(np.abs(vdirect.states - back.states)))
    return {"forward_deviation": fwd, "f0_image": f0, "inverse_deviation": inv,
            "f0_inverse_start": abs(neu.f0(ntraj.states[0])), "image": image}


@scenario("neumann_compare", "reduced Veselova trajectories against direct Neumann integration",
          "Veselova-Neumann correspondence with the time change dtau_1 = sqrt(2 h det A / (Aq, q)) dt",
          {"A": [[1.0, 2.0, 3.0], [1.0, 2.0, 3.0, 4.0]], "energy": 0.5, "tau_final": 10.0}, required=("A",))
def _neumann_compare(ctx: Context) -> ScenarioResult:
    p = ctx.params
    As = p["A"]
    if not As or not isinstance(As[0], list):
        As = [As]
    rng = ctx.rng
    res = ScenarioResult("neumann_compare")
    for Araw in As:
        A = np.asarray(Araw, dtype=float)
        if A.ndim != 1 or A.size < 3 or np.any(A <= 0):
            raise ConfigError("params.A: each entry must list at least three positive numbers")
        tag = f"n{A.size}_"
        out = _neumann_pair(ctx, A, p["energy"], p["tau_final"], rng)
        res.checks.append(Check(tag + "forward_sup_deviation", out["forward_deviation"], 1e-6))
        res.checks.append(Check(tag + "f0_on_image", out["f0_image"], 1e-8))
        res.checks.append(Check(tag + "inverse_sup_deviation", out["inverse_deviation"], 1e-6))
        res.series[tag + "image"] = Series(out["image"], _vec_labels("q", A.size) + _vec_labels("dq", A.size))
    return res


@scenario("knorrer", "geodesics on the ellipsoid (A^-1 X, X) = 1 mapped to the Neumann system",
          "Knoerrer map with F0 = 0, Joachimsthal integral and Moser Lax spectrum",
          {"A": [1.0, 2.0, 3.0], "s_final": 50.0, "record_every": 10}, required=("A",))
def _knorrer(ctx: Context) -> ScenarioResult:
    p = ctx.params
    A = _vec(p, "A", positive=True)
    geo = QuadricGeodesic(A)
    y0 = geo.random_state(ctx.rng)
    mons = [Monitor("speed", geo.speed, 1e-9),
            Monitor("joachimsthal", geo.joachimsthal, CONSERVATION_TOL),
            _constraint_monitor("quadric_constraints", geo.constraints)]
    traj = integrate(geo.rhs, y0, p["s_final"], ctx.integrator["dt"], mons, record_every=p["record_every"])
    res = ScenarioResult("knorrer")
    res.checks += _monitor_checks(traj, mons)
    km = knorrer_map(traj, A)
    res.checks.append(Check("neumann_residual", km.max_neumann_residual, 1e-6))
    res.checks.append(Check("f0_on_image", km.max_f0, 1e-7))
    q = km.trajectory.states[:, : A.size]
    res.checks.append(Check("unit_q", float(np.max(np.abs(np.linalg.norm(q, axis=1) - 1.0))), 1e-12))
    eig = np.array([moser_lax(A, y[: A.size], y[A.size:])[1] for y in traj.states])
    res.checks.append(Check("lax_eigenvalue_drift", float(np.max(np.abs(eig - eig[0]))), 1e-8))
    zeros = int(np.sum(np.abs(eig[0]) < 1e-8))
    res.checks.append(Check("lax_zero_eigenvalues", zeros, 2, ">="))
    res.series["geodesic"] = Series(traj, _vec_labels("X", A.size) + _vec_labels("dX", A.size))
    res.series["neumann_image"] = Series(km.trajectory, _vec_labels("q", A.size) + _vec_labels("dq", A.size))
    return res


def _gauge_rotation(k: int, angle: float) -> np.ndarray:
    """Product of plane rotations by ``angle`` in consecutive planes of R^k."""
    G = np.eye(k)
    for i in range(k - 1):
        R = np.eye(k)
        c, s = np.cos(angle * (i + 1)), np.sin(angle * (i + 1))
        R[i, i], R[i, i + 1], R[i + 1, i], R[i + 1, i + 1] = c, -s, s, c
        G = R @ G
    return G


@scenario("reconstruction", "moving frame of the n-dimensional Veselova body from reduced data",
          "Lax eigenvectors give the frame; orthogonality, constraints, kinematics and SO(n-1) gauge freedom",
          {"A": [1.0, 2.0, 3.0, 4.0], "energy": 0.5, "t_final": 10.0, "gauge_angle": 0.7}, required=("A",))
def _reconstruction(ctx: Context) -> ScenarioResult:
    p = ctx.params
    A = _vec(p, "A", positive=True)
    ves = ReducedVeselova(A)
    z0 = ves.random_state(ctx.rng, p["energy"])
    traj = integrate(ves.rhs, z0, p["t_final"], ctx.integrator["dt"])
    fr = reconstruct_frame(traj, A)
    G = _gauge_rotation(A.size - 1, p["gauge_angle"])
    fg = reconstruct_frame(traj, A, gauge=G)
    res = ScenarioResult("reconstruction")
    res.checks.append(Check("lax_eigenvalue_drift", fr.eigenvalue_drift, 1e-8))
    res.checks.append(Check("orthogonality_residual", fr.orthogonality_residual, 1e-10))
    res.checks.append(Check("veselova_constraint_residual", fr.constraint_residual, 1e-6))
    res.checks.append(Check("kinematic_residual", fr.kinematic_residual, 1e-5))
    gauge_diff = max(abs(fr.kinematic_residual - fg.kinematic_residual),
                     abs(fr.constraint_residual - fg.constraint_residual),
                     abs(fr.orthogonality_residual - fg.orthogonality_residual),
                     float(np.max(np.abs(fr.frames[:, 0] - fg.frames[:, 0]))))
    res.checks.append(Check("gauge_invariance", gauge_diff, 1e-9))
    res.series["reduced"] = Series(traj, _vec_labels("q", A.size) + _vec_labels("p", A.size))
    return res


@scenario("spheroconic", "spheroconic coordinates and separated quadratures of the Veselova geodesics",
          "coordinate round trip, interlacing and constancy of the separation constants",
          {"A": [1.0, 2.0, 3.0], "energy": 0.5, "t_final": 20.0, "round_trip_samples": 200},
          required=("A",))
def _spheroconic(ctx: Context) -> ScenarioResult:
    p = ctx.params
    A = _vec(p, "A", positive=True)
    I = 1.0 / A
    n = A.size
    rng = ctx.rng
    rt = 0.0
    inter = True
    Is = np.sort(I)
    for _ in range(p["round_trip_samples"]):
        q = rng.standard_normal(n)
        q /= np.linalg.norm(q)
        lam = spheroconic_coords(q, I)
        rt = max(rt, float(np.max(np.abs(spheroconic_to_q2(lam, I) - q**2))))
        inter = inter and bool(np.all((Is[:-1] < lam) & (lam < Is[1:])))
    res = ScenarioResult("spheroconic")
    res.checks.append(Check("round_trip", rt, 1e-10))
    res.checks.append(Check("interlacing_violations", 0.0 if inter else 1.0, 0.0))
    ves = ReducedVeselova(A)
    z0 = ves.random_state(rng, p["energy"])
    traj = integrate(ves.rhs, z0, p["t_final"], ctx.integrator["dt"])
    tau = chaplygin_reparameterize(traj, A)
    rep = quadrature_residual(tau, A)
    res.checks.append(Check("quadrature_residual", rep.max_residual, 1e-5))
    res.checks.append(Check("constant_drift", rep.max_constant_drift, 1e-5))
    res.info["constants"] = [float(c) for c in rep.constants]
    res.info["samples_used"] = rep.samples_used
    res.info["samples_excluded"] = rep.samples_excluded
    res.series["tau"] = Series(tau, _vec_labels("q", n) + _vec_labels("p", n))
    return res


@scenario("maupertuis", "3D Veselova body in a potential: Hamiltonian h against Jacobi h^J on {h = c}",
          "nonholonomic Maupertuis principle: same curves and lambda = mu (c - v)",
          {"A": [1.0, 2.0, 3.0], "alpha1": 1.0, "c": 2.0, "t_final": 20.0}, required=("A", "c"))
def _maupertuis(ctx: Context) -> ScenarioResult:
    p = ctx.params
    A = _vec(p, "A", 3, positive=True)
    pot = SpherePotential(A, c1=p["alpha1"])
    rng = ctx.rng
    g0 = rng.standard_normal(3)
    d0 = rng.standard_normal(3)
    _, _, rep = run_maupertuis(np.diag(1.0 / A), pot, p["c"], g0, d0, p["t_final"], ctx.integrator["dt"])
    res = ScenarioResult("maupertuis")
    res.checks.append(Check("geometric_distance", rep.max_distance, 1e-6))
    res.checks.append(Check("multiplier_ratio_residual", rep.max_multiplier_residual, 1e-7))
    res.info["arc_length"] = rep.arc_length
    res.info["min_gap"] = rep.min_gap
    return res


@scenario("lagrange_top", "reduced Veselova system with A_1 = ... = A_{n-1} and potential g q_n",
          "energy and the momenta N(q)(q_i p_j - q_j p_i), i < j < n",
          {"A": [1.0, 1.0, 1.0, 1.7], "g": 0.8, "energy": 1.5}, required=("A",))
def _lagrange_top(ctx: Context) -> ScenarioResult:
    p = ctx.params
    A = _vec(p, "A", positive=True)
    n = A.size
    if not np.allclose(A[:-1], A[0]):
        raise ConfigError("params.A: the first n-1 entries must coincide")
    lin = np.zeros(n)
    lin[-1] = p["g"]
    ves = ReducedVeselova(A, SpherePotential(A, linear=lin))
    z0 = ves.random_state(ctx.rng, p["energy"])
    k = (n - 1) * (n - 2) // 2
    mons = [Monitor("energy", ves.energy, CONSERVATION_TOL)]
    mons += [Monitor(f"momentum{j + 1}", (lambda y, j=j: lagrange_momenta(ves, y)[j]), CONSERVATION_TOL)
             for j in range(k)]
    mons.append(_constraint_monitor("sphere_constraints", ves.sphere_constraints))
    traj, secs = _conserve(ctx, ves.rhs, z0, mons, projection=ves.normalize)
    res = ScenarioResult("lagrange_top")
    res.checks += _monitor_checks(traj, mons)
    res.checks.append(_runtime_check(secs))
    res.series["trajectory"] = Series(traj, _vec_labels("q", n) + _vec_labels("p", n))
    return res


# ---------------------------------------------------------------- lplusr

@scenario("lplusr_generic", "L+R flow on so(n) with a random positive Gamma",
          "energy, momentum norm, Gamma spectrum and the density sqrt(det(I + Gamma))",
          {"I": [1.0, 2.0, 3.0, 4.0], "gamma_scale": 1.0}, required=("I",))
def _lplusr_generic(ctx: Context) -> ScenarioResult:
    p = ctx.params
    Ivec = _vec(p, "I", positive=True)
    Iop = physical_inertia(Ivec)
    sys = LplusRSystem(Iop)
    rng = ctx.rng
    Q, _ = np.linalg.qr(rng.standard_normal((Iop.m, Iop.m)))
    Gamma = p["gamma_scale"] * Q @ np.diag(rng.uniform(0.5, 1.5, Iop.m)) @ Q.T
    Gamma = 0.5 * (Gamma + Gamma.T)
    y0 = sys.pack(rng.standard_normal(Iop.m), Gamma)
    spec0 = sys.gamma_spectrum(y0)
    mons = [Monitor("energy", sys.energy, CONSERVATION_TOL),
            Monitor("momentum_norm", sys.momentum_norm, CONSERVATION_TOL),
            Monitor("gamma_spectrum", lambda y: float(np.max(np.abs(sys.gamma_spectrum(y) - spec0))),
                    1e-9, relative=False, target=0.0)]
    traj, secs = _conserve(ctx, sys.rhs, y0, mons)
    res = ScenarioResult("lplusr_generic")
    checks = _monitor_checks(traj, mons)
    for c in checks:
        c.category = "conservation"
    res.checks += checks
    res.checks.append(_runtime_check(secs))
    res.checks.append(Check("density_liouville", _liouville(ctx, sys.rhs, sys.density, traj.states),
                            LIOUVILLE_TOL, "<=", "measure"))
    # Gamma = 0 gives the free Euler-Poincare flow dx/dt = [x, A x]
    w = rng.standard_normal(Iop.m)
    d = sys.rhs(sys.pack(w, np.zeros((Iop.m, Iop.m))))[: Iop.m]
    x = Iop.mat @ w
    ep = so(Iop.n).bracket(x, Iop.inverse_mat @ x)
    res.checks.append(Check("free_flow_reduction", float(np.max(np.abs(Iop.mat @ d - ep))), 1e-12))
    labels = _wedge_labels("omega", Iop.n) + [f"Gamma{i + 1}_{j + 1}" for i, j in zip(*sys.iu)]
    res.series["trajectory"] = Series(traj, labels)
    return res


def _frame_monitors(integrals: Callable, names) -> list[Monitor]:
    return [Monitor(nm, (lambda y, nm=nm: integrals(y)[nm]), CONSERVATION_TOL) for nm in names]


def _frame_product_monitor() -> Monitor:
    target = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
    return Monitor("frame_products", lambda y: float(np.max(np.abs(frame_products(y) - target))),
                   1e-9, relative=False, target=0.0)


_FRAME_LABELS = (_vec_labels("Omega", 3) + _vec_labels("alpha", 3) + _vec_labels("beta", 3)
                 + _vec_labels("gamma", 3))


@scenario("chaplygin_sphere", "rolling Chaplygin sphere in vector form",
          "integrals of K = I Omega - m a^2 (Omega, gamma) gamma and the Chaplygin density",
          {"J": [1.0, 1.3, 1.7], "m": 1.0, "a": 0.5}, required=("J", "m", "a"))
def _chaplygin_sphere(ctx: Context) -> ScenarioResult:
    p = ctx.params
    J = _vec(p, "J", 3, positive=True)
    inertia = chaplygin_inertia(np.diag(J), p["m"], p["a"])
    sys = ChaplyginSphere(inertia, p["m"], p["a"])
    rng = ctx.rng
    R, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    if np.linalg.det(R) < 0:
        R[2] *= -1.0
    y0 = np.concatenate([rng.standard_normal(3), R.ravel()])
    mons = _frame_monitors(sys.integrals, ["energy", "K.K", "K.alpha", "K.beta", "K.gamma"])
    mons.append(_frame_product_monitor())
    traj, secs = _conserve(ctx, sys.rhs, y0, mons)
    res = ScenarioResult("chaplygin_sphere")
    checks = _monitor_checks(traj, mons)
    for c in checks:
        c.category = "conservation"
    res.checks += checks
    res.checks.append(_runtime_check(secs))
    res.checks.append(Check("density_liouville", _liouville(ctx, sys.rhs, sys.density, traj.states),
                            LIOUVILLE_TOL, "<=", "measure"))
    # the two forms of the equations and the general L+R oracle
    P = SO3_VECTOR_TO_WEDGE
    kres = 0.0
    lres = 0.0
    for y in _subsample(traj.states, 10):
        d = sys.rhs(y)
        Om, g = y[:3], y[9:]
        K = sys.K(y)
        dK = inertia @ d[:3] - sys.k * (float(d[:3] @ g) + float(Om @ d[9:])) * g - sys.k * float(Om @ g) * d[9:]
        kres = max(kres, float(np.max(np.abs(dK - np.cross(K, Om)))))
        Iop, G = so3_lplusr_from_vectors(inertia, -sys.k * np.outer(g, g))
        lp = LplusRSystem(Iop)
        dl = lp.rhs(lp.pack(P @ Om, G))[:3]
        lres = max(lres, float(np.max(np.abs(dl - P @ d[:3]))))
    res.checks.append(Check("K_equation_residual", kres, 1e-12))
    res.checks.append(Check("lplusr_oracle", lres, 1e-12))
    res.series["trajectory"] = Series(traj, _FRAME_LABELS)
    return res


@scenario("spherical_support", "ball on a spherical support built from N peripheral balls",
          "integrals (K, K), (K, alpha), (K, beta), (K, gamma), energy and the density sqrt(det(I + Gamma))",
          {"J": [3.0, 3.5, 4.0], "D": [0.2, 0.3, 0.25, 0.15], "rho": [1.0, 1.0, 1.0, 1.0],
           "gammas": [[0.0, 0.6, 0.8], [0.8, 0.0, 0.6], [0.6, 0.8, 0.0], [0.48, 0.6, 0.64]]},
          required=("J", "D", "rho", "gammas"))
def _spherical_support(ctx: Context) -> ScenarioResult:
    p = ctx.params
    J = _vec(p, "J", 3, positive=True)
    inertia, Gs = support_gamma_from_balls(p["D"], p["rho"], p["gammas"], np.diag(J))
    coef, vecs = np.linalg.eigh(Gs)
    if coef.min() <= 1e-8:
        raise ConfigError("params.gammas: the support operator Gamma is degenerate")
    sys = SphericalSupport(inertia, *coef)
    rng = ctx.rng
    y0 = np.concatenate([rng.standard_normal(3), vecs.T.ravel()])
    mons = _frame_monitors(sys.integrals, ["energy", "K.K", "K.alpha", "K.beta", "K.gamma"])
    mons.append(_frame_product_monitor())
    traj, secs = _conserve(ctx, sys.rhs, y0, mons)
    res = ScenarioResult("spherical_support")
    checks = _monitor_checks(traj, mons)
    for c in checks:
        c.category = "conservation"
    res.checks += checks
    res.checks.append(_runtime_check(secs))
    res.checks.append(Check("density_liouville", _liouville(ctx, sys.rhs, sys.density, traj.states),
                            LIOUVILLE_TOL, "<=", "measure"))
    expd = max(abs(sys.density(y) - sys.density_expanded(y)) / sys.density(y) for y in _subsample(traj.states))
    res.checks.append(Check("expanded_density_match", expd, 1e-10))
    gam0 = sys.Gamma(y0)
    res.checks.append(Check("gamma_from_balls", float(np.max(np.abs(gam0 - Gs))), 1e-12))
    res.info["support_coefficients"] = [float(c) for c in coef]
    res.series["trajectory"] = Series(traj, _FRAME_LABELS)
    return res


@scenario("lplusr_limit", "L+R flows with Gamma = eps alpha (x) alpha against the 3D Veselova LR flow",
          "convergence of L+R flows and of their scaled density to the LR system as eps grows",
          {"J": [1.0, 1.5, 2.2], "eps": [10.0, 100.0, 1000.0, 10000.0], "horizon": 5.0, "dt0": 1e-3},
          required=("J", "eps"))
def _lplusr_limit(ctx: Context) -> ScenarioResult:
    p = ctx.params
    J = _vec(p, "J", 3, positive=True)
    eps = _vec(p, "eps", positive=True)
    if eps.size < 2 or np.any(np.diff(eps) <= 0):
        raise ConfigError("params.eps: need at least two increasing values")
    Iop = so3_inertia(J)
    dist = veselova_distribution(3)
    t0 = time.perf_counter()
    rep = lr_limit_sweep(Iop, dist, eps, p["horizon"], dt0=p["dt0"], seed=ctx.seed)
    secs = time.perf_counter() - t0
    res = ScenarioResult("lplusr_limit")
    ratios = rep.deviations[1:] / rep.deviations[:-1]
    res.checks.append(Check("max_successive_deviation_ratio", float(np.max(ratios)), 1.0, "<"))
    res.checks.append(Check("loglog_slope", rep.slope, (-1.2, -0.8), "in"))
    res.checks.append(Check("density_spread_at_largest_eps", float(rep.density_spread[-1]), 1e-3))
    res.checks.append(_runtime_check(secs, budget=60.0))
    # the LR reference coincides with the vector-form Veselova body
    P = SO3_VECTOR_TO_WEDGE
    ves = Veselova3(np.diag(J))
    lr = LrSystem(Iop.inverse(), 1)
    rng = ctx.rng
    worst = 0.0
    for _ in range(10):
        y = _random_veselova3_state(rng)
        d = ves.rhs(y)
        dl = lr.rhs(lr.pack(P @ (J * y[:3]), (P @ y[3:])[None, :]))
        worst = max(worst, float(np.max(np.abs(dl - np.concatenate([P @ (J * d[:3]), P @ d[3:]])))))
    res.checks.append(Check("lr_reference_vs_veselova3", worst, 1e-12))
    res.info["eps"] = [float(e) for e in rep.eps]
    res.info["deviations"] = [float(d) for d in rep.deviations]
    res.info["density_spread"] = [float(d) for d in rep.density_spread]
    res.info["steps"] = [float(d) for d in rep.steps]
    return res


# ---------------------------------------------------------------- engine

@scenario("engine_order", "step halving of RK4 on the free Euler top",
          "fourth-order convergence of the fixed-step engine",
          {"I": [1.0, 2.0, 3.0], "omega": [1.0, 0.5, -0.3], "t_final": 10.0, "dt": 0.1},
          required=("I", "omega"))
def _engine_order(ctx: Context) -> ScenarioResult:
    p = ctx.params
    I = _vec(p, "I", 3, positive=True)
    w0 = _vec(p, "omega", 3)
    f = _euler_top(I)
    T, dt = p["t_final"], p["dt"]
    ref = integrate_adaptive(f, w0, T, t_eval=np.array([T]), rtol=1e-13, atol=1e-15).states[-1]
    errs = [float(np.linalg.norm(integrate(f, w0, T, h).final - ref)) for h in (dt, dt / 2, dt / 4)]
    res = ScenarioResult("engine_order")
    res.checks.append(Check("error_reduction_factor", errs[0] / errs[1], (12.0, 20.0), "in"))
    res.info["errors"] = errs
    res.info["second_halving_factor"] = errs[1] / errs[2]
    return res


# ---------------------------------------------------------------- suites

CONSERVATION_MEMBERS = ["suslov", "suslov_fk", "eps_so4_cartan", "eps_chain", "veselova3", "veselova_n",
                        "lagrange_top", "lplusr_generic", "chaplygin_sphere", "spherical_support"]
MEASURE_MEMBERS = ["veselova3", "veselova_n", "lplusr_generic", "chaplygin_sphere", "spherical_support",
                   "suslov_fk", "eps_so4_cartan"]


def _suite(ctx: Context, name: str, categories: tuple[str, ...]) -> ScenarioResult:
    res = ScenarioResult(name)
    for member in ctx.params["members"]:
        if member not in REGISTRY or member.endswith("_suite"):
            raise ConfigError(f"params.members: {member!r} is not a member scenario")
        _, sub = run_scenario(member, {"integrator": ctx.integrator, "seed": ctx.seed})
        for c in sub.by_category(*categories):
            res.checks.append(Check(f"{member}/{c.name}", c.measured, c.tolerance, c.comparison, c.category))
        for key, s in sub.series.items():
            res.series[f"{member}_{key}"] = s
    return res


@scenario("conservation_suite", "first-integral drift of every conservation scenario",
          "all declared first integrals over t in [0, 100] with RK4, dt = 1e-3",
          {"members": list(CONSERVATION_MEMBERS)})
def _conservation_suite(ctx: Context) -> ScenarioResult:
    return _suite(ctx, "conservation_suite", ("conservation", "runtime"))


@scenario("constraint_suite", "constraint residuals of every conservation scenario",
          "constraints stay satisfied without projection for the multiplier-eliminated fields",
          {"members": list(CONSERVATION_MEMBERS)})
def _constraint_suite(ctx: Context) -> ScenarioResult:
    return _suite(ctx, "constraint_suite", ("constraint",))


@scenario("measure_suite", "Liouville residuals of every invariant density, with a negative control",
          "invariant measures of LR, reduced Veselova, L+R, Chaplygin sphere and spherical support flows",
          {"members": list(MEASURE_MEMBERS)})
def _measure_suite(ctx: Context) -> ScenarioResult:
    return _suite(ctx, "measure_suite", ("measure",))


def report_dict(cfg: dict, result: ScenarioResult, artifacts: list[str], created: str | None = None) -> dict:
    return {
        "schema": 1,
        "scenario": result.scenario,
        "pass": bool(result.passed),
        "checks": [c.as_dict() for c in result.checks],
        "info": result.info,
        "artifacts": artifacts,
        "provenance": {"config": cfg, "seed": cfg["seed"], "version": __version__, "created": created},
    }
