"""Benchmark runs, error norms against the exact solution, and convergence studies.

Errors are measured against the P1 interpolant of the exact solution (the
exact nodal values), so interpolation error does not pollute scheme error.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

import numpy as np

from . import benchmark as bm
from .assembly import AssembledSystem, Mesh1D, Mode, assemble_system, build_weights
from .contact import KKT_TOL, EnergyLedger, Layout, kkt_residual, momentum
from .integrators import (
    ConfigurationError,
    Scheme,
    SchemeParams,
    initial_state,
    integrate,
)

SCHEME_NAMES = (
    "crank_nicolson",
    "newmark",
    "backward_euler",
    "paoli_schatzman",
    "hybrid",
    "semidiscrete_cn",
)
OUTPUTS = frozenset({"trajectory", "energy", "errors"})
DISSIPATION_TOL = 1e-12


@dataclass(frozen=True)
class ScenarioConfig:
    scheme: str = "crank_nicolson"
    mod: Mode = Mode.MOD3
    m: int = 6
    dt: float = 0.01
    T: float = 4.0
    beta: float = 0.25
    gamma: float = 0.5
    e: float = 1.0
    outputs: frozenset = field(default=OUTPUTS)

    def __post_init__(self):
        if self.scheme not in SCHEME_NAMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        object.__setattr__(self, "mod", Mode.parse(self.mod))
        if self.mod is Mode.CUSTOM:
            raise ValueError("scenarios support mod 1, 2 or 3")
        if int(self.m) != self.m or self.m < 3:
            raise ValueError("m must be an integer >= 3")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.T >= 0:
            raise ValueError("T must be nonnegative")
        unknown = set(self.outputs) - OUTPUTS
        if unknown:
            raise ValueError(f"unknown outputs {sorted(unknown)}")
        object.__setattr__(self, "outputs", frozenset(self.outputs))

    @property
    def nsteps(self) -> int:
        n = int(round(self.T / self.dt))
        if abs(n * self.dt - self.T) > 1e-9 * max(1.0, self.T):
            raise ValueError(f"T = {self.T} is not a multiple of dt = {self.dt}")
        return n

    def params(self) -> SchemeParams:
        if self.scheme == "crank_nicolson":
            return SchemeParams.crank_nicolson(self.dt)
        return SchemeParams(Scheme(self.scheme), self.dt, self.beta, self.gamma, self.e)

    def with_(self, **changes) -> ScenarioConfig:
        return replace(self, **changes)


@dataclass(frozen=True)
class Trajectory:
    """Time series at nodes ``0..m`` (Dirichlet node included)."""

    mesh: Mesh1D
    layout: Layout
    t: np.ndarray
    U: np.ndarray
    V: np.ndarray
    lam: np.ndarray
    gap: np.ndarray
    flux: np.ndarray
    states: tuple = field(repr=False, compare=False, default=())

    @classmethod
    def from_states(cls, mesh: Mesh1D, states) -> Trajectory:
        U = np.array([s.full_displacement() for s in states])
        return cls(
            mesh,
            states[0].layout,
            np.array([s.t for s in states]),
            U,
            np.array([s.full_velocity() for s in states]),
            np.array([s.lam for s in states]),
            np.array([s.gap for s in states]),
            (U[:, 1] - U[:, 0]) / mesh.h,
            tuple(states),
        )

    @property
    def u0(self) -> np.ndarray:
        return self.U[:, 0]

    @property
    def u1(self) -> np.ndarray:
        return self.U[:, 1]


@dataclass(frozen=True)
class ErrorReport:
    linf_l2_displacement: float
    l2_contact_displacement: float
    l2_multiplier: float
    energy_drift: float


def l2_norm_field(mesh: Mesh1D, nodal_values) -> float:
    """Exact L2(0, L) norm of the P1 interpolant of nodal values.

    Accepts values at nodes ``0..m``, or ``0..m-1`` with the Dirichlet zero
    appended.
    """
    v = np.asarray(nodal_values, dtype=float)
    if v.shape[-1] == mesh.m:
        v = np.concatenate([v, np.zeros(v.shape[:-1] + (1,))], axis=-1)
    if v.shape[-1] != mesh.m + 1:
        raise ValueError(f"expected {mesh.m + 1} nodal values")
    a, b = v[..., :-1], v[..., 1:]
    return np.sqrt(mesh.h / 3 * np.sum(a * a + a * b + b * b, axis=-1))[()]


def exact_nodal(mesh: Mesh1D, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return bm.exact_displacement(mesh.nodes[None, :], t[:, None])


def linf_l2_error(traj: Trajectory) -> float:
    diff = traj.U - exact_nodal(traj.mesh, traj.t)
    return float(np.max(l2_norm_field(traj.mesh, diff)))


def _time_l2(values, dt: float) -> float:
    return float(np.sqrt(dt * np.sum(np.square(values))))


def multiplier_l2_error(traj: Trajectory, dt: float) -> float:
    return _time_l2(traj.lam - bm.exact_multiplier(traj.t), dt)


def contact_l2_error(traj: Trajectory, dt: float) -> float:
    return _time_l2(traj.u0 - bm.exact_displacement(0.0, traj.t), dt)


def convergence_order(errors: Iterable) -> float:
    """Least-squares slope of log(error) against log(step)."""
    pts = np.array(list(errors), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ValueError("need at least three (step, error) pairs")
    if np.any(pts <= 0):
        raise ValueError("steps and errors must be positive")
    slope, _ = np.polyfit(np.log(pts[:, 0]), np.log(pts[:, 1]), 1)
    return float(slope)


def benchmark_system(m: int, mod) -> AssembledSystem:
    mesh = Mesh1D(m)
    return assemble_system(mesh, build_weights(mod, m))


def benchmark_initial_state(sys: AssembledSystem, layout: Layout):
    x = sys.mesh.nodes[:-1]
    return initial_state(sys, bm.initial_displacement(x), bm.initial_velocity(x), layout)


def check_states(sys: AssembledSystem, params: SchemeParams, states, ledger=None):
    """Raise AssertionError on a complementarity or dissipation violation."""
    for s in states:
        tol = KKT_TOL * (1.0 + np.max(np.abs(s.U)))
        r = kkt_residual(s.gap, s.lam)
        if r > tol:
            raise AssertionError(f"KKT residual {r:.3e} at t = {s.t}")
    if params.scheme is Scheme.HYBRID:
        ledger = ledger or EnergyLedger.from_states(sys, states)
        worst = ledger.dE.max(initial=-np.inf)
        if worst > DISSIPATION_TOL:
            raise AssertionError(f"hybrid energy increased by {worst:.3e}")


def run_scenario(config: ScenarioConfig, check: bool = True):
    """Run the benchmark; returns ``(trajectory, ledger, report)``."""
    params = config.params()
    layout = params.layout
    if layout is Layout.REDUCED and config.mod is Mode.MOD1:
        raise ConfigurationError(f"{config.scheme} needs a redistributed mass (mod 2 or 3)")
    sys = benchmark_system(config.m, config.mod)
    states = integrate(sys, params, benchmark_initial_state(sys, layout), config.nsteps)
    ledger = EnergyLedger.from_states(sys, states)
    if check:
        check_states(sys, params, states, ledger)
    traj = Trajectory.from_states(sys.mesh, states)
    report = ErrorReport(
        linf_l2_error(traj),
        contact_l2_error(traj, config.dt),
        multiplier_l2_error(traj, config.dt),
        float(np.max(np.abs(ledger.E - ledger.E[0]))),
    )
    return traj, ledger, report


def _workers() -> int:
    env = os.environ.get("CONTACT_BAR_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def parallel_map(fn, items):
    """Order-preserving map over independent runs."""
    items = list(items)
    workers = min(_workers(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _report_only(config: ScenarioConfig) -> ErrorReport:
    return run_scenario(config)[2]


def compare_mods(base: Optional[ScenarioConfig] = None, mods=(Mode.MOD1, Mode.MOD2, Mode.MOD3)):
    base = base or ScenarioConfig()
    configs = [base.with_(mod=mod) for mod in mods]
    return dict(zip([c.mod for c in configs], parallel_map(_report_only, configs)))


def _cn_momentum_series(args):
    m, mod, dt, T = args
    sys = benchmark_system(m, mod)
    params = SchemeParams(Scheme.SEMIDISCRETE_CN, dt)
    states = integrate(sys, params, benchmark_initial_state(sys, Layout.REDUCED), int(round(T / dt)))
    return np.array([np.concatenate([s.U, momentum(sys, s.V)]) for s in states])


def temporal_order_study(
    m: int = 6,
    mod=Mode.MOD3,
    dts=(1 / 100, 1 / 200, 1 / 400, 1 / 800),
    dt_ref: float = 1 / 12800,
    T: float = 4.0,
):
    """Semi-discrete Crank-Nicolson error ``max_n |(U, P)^n - reference|``.

    Returns ``(pairs, slope)`` where pairs are ``(dt, error)``.
    """
    runs = parallel_map(_cn_momentum_series, [(m, mod, dt, T) for dt in (*dts, dt_ref)])
    ref = runs[-1]
    pairs = []
    for dt, series in zip(dts, runs[:-1]):
        stride = int(round(dt / dt_ref))
        if abs(stride * dt_ref - dt) > 1e-12:
            raise ValueError("dt must be a multiple of dt_ref")
        err = np.max(np.linalg.norm(series - ref[::stride], axis=1))
        pairs.append((dt, float(err)))
    return pairs, convergence_order(pairs)


def spatial_refinement_study(ms=(6, 12, 24), dt: float = 1 / 800, scheme="hybrid", mod=Mode.MOD3, T: float = 4.0):
    configs = [ScenarioConfig(scheme=scheme, mod=mod, m=m, dt=dt, T=T) for m in ms]
    reports = parallel_map(_report_only, configs)
    return [(m, r.linf_l2_displacement) for m, r in zip(ms, reports)]
