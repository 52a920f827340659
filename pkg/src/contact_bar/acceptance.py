"""Acceptance criteria, runnable from ``contact-bar validate`` and pytest.

Each check returns a :class:`Result`; tolerances are fixed here.
"""

from __future__ import annotations

import math
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from . import benchmark as bm
from .assembly import Mesh1D, Mode, assemble_mass, assemble_stiffness, assemble_system, build_weights
from .contact import EnergyLedger, Layout, energy_increment, kkt_residual
from .experiments import (
    ScenarioConfig,
    benchmark_initial_state,
    benchmark_system,
    compare_mods,
    run_scenario,
    spatial_refinement_study,
    temporal_order_study,
)
from .integrators import Scheme, SchemeParams, initial_state, integrate

RNG_SEED = 20160501

# Regression values of the CN / dx = 1/6 / dt = 1/100 / T = 4 comparison,
# produced by this implementation and frozen after the ranking was verified.
CN_REGRESSION = {
    Mode.MOD1: (0.16511448958875682, 3.581398602348428),
    Mode.MOD2: (0.10056588761136896, 0.25325919626937543),
    Mode.MOD3: (0.03957718193388295, 0.23308637253215883),
}
REGRESSION_RTOL = 1e-9


@dataclass
class Result:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} [{self.number:2d}] {self.name}: {self.detail}"


def _characteristic_distance(x, t):
    """Distance of ``(x, t)`` to the nearest kink line of the exact solution."""
    tau = np.mod(t, bm.PERIOD)
    s = tau - np.floor(tau)
    lines = [
        np.abs(x - s),
        np.abs(x - (1 - s)) / 1.0,
        np.abs(x - 0.5),
        np.abs(s - 0.5),
        np.abs(s),
        np.abs(1 - s),
        np.abs(x),
        np.abs(1 - x),
    ]
    # kinks of the form x = s or x = 1 - s have normal (1, -1)/sqrt(2)
    lines[0] = lines[0] / math.sqrt(2)
    lines[1] = lines[1] / math.sqrt(2)
    return np.min(lines, axis=0)


def check_oracle() -> Result:
    rng = np.random.default_rng(RNG_SEED)
    problems = []
    # dyadic samples make t + 3 and t mod 3 exact in floating point
    x = rng.integers(0, 1025, 4000) / 1024
    t = rng.integers(0, 12 * 1024, 4000) / 1024
    if not np.array_equal(bm.exact_displacement(x, t), bm.exact_displacement(x, t + 3.0)):
        problems.append("periodicity")

    x = rng.uniform(0, 1, 40000)
    t = rng.uniform(0, 6, 40000)
    keep = _characteristic_distance(x, t) > 1e-3
    x, t = x[keep][:10000], t[keep][:10000]
    d = 1e-4
    u = bm.exact_displacement
    utt = (u(x, t + d) - 2 * u(x, t) + u(x, t - d)) / d**2
    uxx = (u(x + d, t) - 2 * u(x, t) + u(x - d, t)) / d**2
    pde = float(np.max(np.abs(utt - uxx)))
    if not (x.size == 10000 and pde <= 1e-6):
        problems.append(f"pde residual {pde:.2e} on {x.size} points")

    ts = np.linspace(0, 9, 9001)
    gap = bm.exact_displacement(0.0, ts)
    lam = bm.exact_multiplier(ts)
    if np.any(gap < 0) or np.any(lam > 0) or np.any(gap * lam != 0):
        problems.append("signorini")

    # midpoint rule, 10^4 panels; sample times keep kinks on panel edges
    xm = (np.arange(10000) + 0.5) / 10000
    energies = []
    for tk in np.arange(0, 6, 1 / 16):
        e = np.mean(bm.exact_velocity(xm, tk) ** 2 + bm.exact_strain(xm, tk) ** 2)
        energies.append(e)
    drift = float(np.max(np.abs(np.array(energies) - 0.25)))
    if bm.exact_energy() != 0.25 or drift > 1e-6:
        problems.append(f"energy drift {drift:.2e}")
    return Result(1, "oracle self-consistency", not problems,
                  "; ".join(problems) or f"pde residual {pde:.1e}, energy drift {drift:.1e}")


def _quadrature_matrices(m, w, panels=10000):
    """Dense M, S by composite midpoint rule, ``panels`` panels per element."""
    h = 1.0 / m
    xi = (np.arange(panels) + 0.5) / panels
    M = np.zeros((m + 1, m + 1))
    S = np.zeros((m + 1, m + 1))
    for j in range(m):
        phi = np.stack([1 - xi, xi])
        dphi = np.array([-1.0, 1.0]) / h
        idx = [j, j + 1]
        for a in range(2):
            for b in range(2):
                M[idx[a], idx[b]] += w[j] * h * np.mean(phi[a] * phi[b])
                S[idx[a], idx[b]] += h * dphi[a] * dphi[b]
    return M[:m, :m], S[:m, :m]


def check_assembly() -> Result:
    worst = 0.0
    mass_ok = True
    for m in (3, 4, 6):
        mesh = Mesh1D(m)
        for mode in (Mode.MOD1, Mode.MOD2, Mode.MOD3):
            wp = build_weights(mode, m)
            Mq, Sq = _quadrature_matrices(m, wp.w)
            worst = max(
                worst,
                np.max(np.abs(assemble_mass(mesh, wp).todense() - Mq)),
                np.max(np.abs(assemble_stiffness(mesh).todense() - Sq)),
            )
            if mode is not Mode.MOD1:
                mass_ok &= mesh.h * math.fsum(wp.w) == mesh.L
    ok = worst <= 1e-8 and mass_ok
    return Result(2, "assembly vs quadrature", ok,
                  f"max entry error {worst:.1e}, mass conserved: {mass_ok}")


def _applicable_runs(m=6, dt=0.01, T=4.0):
    for scheme in ("crank_nicolson", "backward_euler", "paoli_schatzman", "hybrid", "semidiscrete_cn"):
        for mod in (Mode.MOD1, Mode.MOD2, Mode.MOD3):
            if scheme in ("hybrid", "semidiscrete_cn") and mod is Mode.MOD1:
                continue
            yield ScenarioConfig(scheme=scheme, mod=mod, m=m, dt=dt, T=T)


def check_complementarity() -> Result:
    worst = 0.0
    count = 0
    for config in _applicable_runs():
        traj, _, _ = run_scenario(config, check=False)
        for g, lam in zip(traj.gap, traj.lam):
            worst = max(worst, kkt_residual(g, lam))
        count += 1
    return Result(3, "complementarity", worst <= 1e-10,
                  f"max KKT residual {worst:.1e} over {count} runs")


def random_hybrid_run(rng, nsteps=200):
    m = int(rng.integers(4, 13))
    mode = Mode.MOD2 if rng.random() < 0.5 else Mode.MOD3
    f_const = float(rng.normal())
    sys = assemble_system(Mesh1D(m), build_weights(mode, m), f=lambda x, t: f_const + 0 * x)
    U0 = rng.normal(scale=0.5, size=m)
    V0 = rng.normal(scale=0.5, size=m)
    dt = float(10 ** rng.uniform(-3, -1))
    params = SchemeParams(Scheme.HYBRID, dt)
    states = integrate(sys, params, initial_state(sys, U0, V0, Layout.REDUCED), nsteps)
    return sys, states


def hybrid_dissipation_stats(sys, states):
    """(max direct dE, max |direct - closed| / energy scale)."""
    worst_de = -np.inf
    worst_gap = 0.0
    for a, b in zip(states[:-1], states[1:]):
        direct, closed = energy_increment(sys, a, b)
        worst_de = max(worst_de, direct, closed)
        ledger = EnergyLedger.from_states(sys, [a, b])
        scale = max(1.0, abs(ledger.E[0]), abs(ledger.E[1]))
        worst_gap = max(worst_gap, abs(direct - closed) / scale)
    return worst_de, worst_gap


def check_hybrid_dissipation() -> Result:
    rng = np.random.default_rng(RNG_SEED)
    sys = benchmark_system(6, Mode.MOD3)
    states = integrate(sys, SchemeParams(Scheme.HYBRID, 0.01),
                       benchmark_initial_state(sys, Layout.REDUCED), 400)
    worst_de, worst_gap = hybrid_dissipation_stats(sys, states)
    for _ in range(100):
        de, gap = hybrid_dissipation_stats(*random_hybrid_run(rng))
        worst_de = max(worst_de, de)
        worst_gap = max(worst_gap, gap)
    ok = worst_de <= 1e-12 and worst_gap <= 1e-10
    return Result(4, "hybrid dissipation", ok,
                  f"max dE {worst_de:.1e}, closed-form mismatch {worst_gap:.1e}")


def contact_free_setup(mode=Mode.MOD3, m=6):
    """Bar under unit load, perturbed around its static state ``(1 - x^2)/2``.

    The contact node stays near 1/2, far from the obstacle.
    """
    sys = assemble_system(Mesh1D(m), build_weights(mode, m), f=lambda x, t: 1.0 + 0 * x)
    x = sys.mesh.nodes[:-1]
    U0 = (1 - x**2) / 2 + 0.05 * np.cos(np.pi * x / 2) * np.cos(3 * np.pi * x / 2)
    V0 = 0.1 * np.sin(np.pi * (1 - x))
    return sys, U0, V0


def check_linear_conservation() -> Result:
    details = []
    ok = True
    runs = [
        (Mode.MOD1, SchemeParams.crank_nicolson(0.01)),
        (Mode.MOD3, SchemeParams.crank_nicolson(0.01)),
        (Mode.MOD3, SchemeParams(Scheme.HYBRID, 0.01)),
    ]
    for mode, params in runs:
        sys, U0, V0 = contact_free_setup(mode)
        states = integrate(sys, params, initial_state(sys, U0, V0, params.layout), 1000)
        E = EnergyLedger.from_states(sys, states).E
        rel = float(np.max(np.abs(E - E[0])) / abs(E[0]))
        gap = min(s.u0 for s in states)
        ok &= rel <= 1e-10 and gap > 0
        details.append(f"{params.scheme.value}/{mode.value} drift {rel:.1e}")
    for setup in ("contact-free", "benchmark"):
        if setup == "benchmark":
            sys = benchmark_system(6, Mode.MOD3)
            s0 = benchmark_initial_state(sys, Layout.FULL)
        else:
            sys, U0, V0 = contact_free_setup(Mode.MOD3)
            s0 = initial_state(sys, U0, V0, Layout.FULL)
        states = integrate(sys, SchemeParams(Scheme.BACKWARD_EULER, 0.01), s0, 1000)
        rise = float(EnergyLedger.from_states(sys, states).dE.max())
        ok &= rise <= 0.0
        details.append(f"backward_euler/{setup} max dE {rise:.1e}")
    return Result(5, "linear conservation", ok, ", ".join(details))


def check_temporal_order() -> Result:
    pairs, slope = temporal_order_study()
    return Result(6, "temporal order", slope >= 0.9,
                  f"slope {slope:.3f}; errors " + ", ".join(f"{e:.2e}" for _, e in pairs))


def check_ranking() -> Result:
    reports = compare_mods(ScenarioConfig(scheme="crank_nicolson", m=6, dt=0.01, T=4.0))
    disp = [reports[m].linf_l2_displacement for m in (Mode.MOD3, Mode.MOD2, Mode.MOD1)]
    mult = [reports[m].l2_multiplier for m in (Mode.MOD3, Mode.MOD2, Mode.MOD1)]
    ordered = disp[0] < disp[1] < disp[2] and mult[0] < mult[1] < mult[2]
    locked = all(
        math.isclose(reports[mod].linf_l2_displacement, d, rel_tol=REGRESSION_RTOL)
        and math.isclose(reports[mod].l2_multiplier, lm, rel_tol=REGRESSION_RTOL)
        for mod, (d, lm) in CN_REGRESSION.items()
    )
    return Result(7, "redistribution ranking", ordered and locked,
                  "displacement mod3/2/1 " + "/".join(f"{v:.4f}" for v in disp)
                  + ", multiplier " + "/".join(f"{v:.3f}" for v in mult)
                  + ("" if locked else ", regression values moved"))


def check_plateau() -> Result:
    ok = True
    details = []
    for scheme in ("crank_nicolson", "hybrid"):
        traj, _, _ = run_scenario(ScenarioConfig(scheme=scheme, mod=Mode.MOD3, m=6, dt=0.01, T=4.0))
        sel = (traj.t > 1.2) & (traj.t < 1.8)
        mean = float(traj.lam[sel].mean())
        u0 = float(traj.u0[sel].max())
        ok &= abs(mean + 0.5) <= 0.1 and u0 <= 1e-3
        details.append(f"{scheme}: mean lambda {mean:.4f}, max u0 {u0:.1e}")
    return Result(8, "contact plateau", ok, "; ".join(details))


def check_spatial_refinement() -> Result:
    rows = spatial_refinement_study(ms=(6, 12, 24), dt=1 / 800)
    errs = [e for _, e in rows]
    ok = all(a > b for a, b in zip(errs, errs[1:]))
    return Result(9, "spatial refinement", ok, "errors " + ", ".join(f"{e:.4f}" for e in errs))


def check_determinism() -> Result:
    from .cli import main

    with tempfile.TemporaryDirectory() as tmp:
        paths = [os.path.join(tmp, f"run{i}.csv") for i in range(2)]
        codes = [main(["simulate", "--out", p, "scheme=crank_nicolson", "mod=3"]) for p in paths]
        blobs = [open(p, "rb").read() for p in paths]
    ok = codes == [0, 0] and blobs[0] == blobs[1] and len(blobs[0]) > 0
    return Result(10, "determinism", ok, f"exit codes {codes}, identical CSVs: {blobs[0] == blobs[1]}")


CHECKS = (
    check_oracle,
    check_assembly,
    check_complementarity,
    check_hybrid_dissipation,
    check_linear_conservation,
    check_temporal_order,
    check_ranking,
    check_plateau,
    check_spatial_refinement,
    check_determinism,
)


def run_all():
    return [check() for check in CHECKS]
