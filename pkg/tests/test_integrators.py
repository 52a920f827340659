import numpy as np
import pytest
from scipy.linalg import eigh, expm

from contact_bar.assembly import Mesh1D, Mode, assemble_system, build_weights
from contact_bar.contact import EnergyLedger, Layout, discrete_energy
from contact_bar.experiments import benchmark_initial_state, benchmark_system
from contact_bar.integrators import (
    ConfigurationError,
    Scheme,
    SchemeParams,
    backward_euler_step,
    bootstrap_first_step,
    hybrid_step,
    initial_acceleration,
    initial_state,
    integrate,
    newmark_step,
    paoli_schatzman_step,
)
from contact_bar.acceptance import contact_free_setup


def linear_flow(sys, U0, V0, t):
    """Exact contact-free semi-discrete solution via the matrix exponential.

    A massless contact node follows ``u0 = u1``, which folds into the
    stiffness of node 1 (``S_11 - 1/h``).
    """
    M, S, F = sys.M.todense(), sys.S.todense(), sys.Ffull
    cut = 1 if sys.reduced else 0
    if cut:
        M, S, F = M[1:, 1:], S[1:, 1:].copy(), F[1:]
        S[0, 0] -= 1 / sys.h
    n = M.shape[0]
    Ust = np.linalg.solve(S, F)
    G = np.block([[np.zeros((n, n)), np.eye(n)], [-np.linalg.solve(M, S), np.zeros((n, n))]])
    z = expm(G * t) @ np.concatenate([U0[cut:] - Ust, V0[cut:]])
    U, V = z[:n] + Ust, z[n:]
    if cut:
        U, V = np.concatenate([[U[0]], U]), np.concatenate([[V[0]], V])
    return U, V


def test_initial_acceleration_dense():
    sys = benchmark_system(6, Mode.MOD1)
    x = sys.mesh.nodes[:-1]
    U = (1 - x) / 2
    A = initial_acceleration(sys, U, np.zeros(6), 0.0, Layout.FULL)
    dense = np.linalg.solve(sys.M.todense(), -sys.S.todense() @ U)
    np.testing.assert_allclose(A, dense, atol=1e-13)
    # the stiffness residual lives on the contact row
    np.testing.assert_allclose(sys.S.matvec(U), [0.5, 0, 0, 0, 0, 0], atol=1e-14)


def test_initial_state_projects_massless_node():
    sys = benchmark_system(6, Mode.MOD3)
    s = benchmark_initial_state(sys, Layout.FULL)
    assert s.U[0] == s.U[1] == pytest.approx(5 / 12)
    assert s.lam == 0.0
    x = sys.mesh.nodes[:-1]
    U = -(x + 0.1)
    s = initial_state(sys, U, np.zeros(6), Layout.FULL)
    assert s.U[0] == 0.0 and s.lam < 0


def test_backward_euler_mode_damping():
    """On one eigenmode, the energy excess shrinks by 1/(1 + w^2 dt^2) per step."""
    sys, _, _ = contact_free_setup(Mode.MOD1)
    w2, vecs = eigh(sys.S.todense(), sys.M.todense())
    mode = vecs[:, 0] / np.abs(vecs[:, 0]).max()
    Ust = sys.S.solve(sys.Ffull)
    dt = 0.05
    state = initial_state(sys, Ust + 0.05 * mode, np.zeros(sys.m), Layout.FULL)
    E_static = discrete_energy(sys, state.evolve(U=Ust, V=0 * Ust))
    excess = [discrete_energy(sys, state) - E_static]
    params = SchemeParams(Scheme.BACKWARD_EULER, dt)
    for _ in range(5):
        state = backward_euler_step(sys, params, state)
        excess.append(discrete_energy(sys, state) - E_static)
    ratios = np.array(excess[2:]) / np.array(excess[1:-1])
    np.testing.assert_allclose(ratios, 1 / (1 + w2[0] * dt**2), rtol=1e-10)


@pytest.mark.parametrize("mode", [Mode.MOD1, Mode.MOD3])
def test_newmark_cn_second_order_vs_expm(mode):
    sys, U0, V0 = contact_free_setup(mode)
    s0 = initial_state(sys, U0, V0, Layout.FULL)
    T = 1.0
    errs = []
    for dt in (0.02, 0.01, 0.005):
        states = integrate(sys, SchemeParams.crank_nicolson(dt), s0, int(round(T / dt)))
        U, _ = linear_flow(sys, s0.U, s0.V, T)
        errs.append(np.abs(states[-1].U - U).max())
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 1.9)


def test_paoli_schatzman_matches_newmark_without_contact():
    """The Newmark recurrence written in two-step form is Paoli-Schatzman."""
    sys, U0, V0 = contact_free_setup(Mode.MOD1)
    dt = 0.01
    params = SchemeParams(Scheme.PAOLI_SCHATZMAN, dt)
    nm = integrate(sys, SchemeParams.crank_nicolson(dt), initial_state(sys, U0, V0, Layout.FULL), 200)
    prev, cur = nm[0], nm[1]
    for n in range(2, 201):
        _, nxt = paoli_schatzman_step(sys, params, prev, cur)
        np.testing.assert_allclose(nxt.U, nm[n].U, atol=1e-10)
        prev, cur = cur, nxt


def test_paoli_schatzman_kernel_projection_runs_on_mod3():
    sys = benchmark_system(6, Mode.MOD3)
    states = integrate(sys, SchemeParams(Scheme.PAOLI_SCHATZMAN, 0.01),
                       benchmark_initial_state(sys, Layout.FULL), 400)
    E = EnergyLedger.from_states(sys, states).E
    assert E.max() <= 2 * E[0]
    lam = np.array([s.lam for s in states])
    t = np.array([s.t for s in states])
    assert lam[(t > 1.2) & (t < 1.8)].mean() == pytest.approx(-0.5, abs=0.15)


def test_newmark_cn_full_equals_semidiscrete_cn_reduced():
    sys = benchmark_system(6, Mode.MOD3)
    full = integrate(sys, SchemeParams.crank_nicolson(0.01), benchmark_initial_state(sys, Layout.FULL), 400)
    red = integrate(sys, SchemeParams(Scheme.SEMIDISCRETE_CN, 0.01),
                    benchmark_initial_state(sys, Layout.REDUCED), 400)
    for a, b in zip(full, red):
        np.testing.assert_allclose(a.full_displacement(), b.full_displacement(), atol=1e-10)


def test_bootstrap_local_error_third_order():
    sys, U0, V0 = contact_free_setup(Mode.MOD1)
    s0 = initial_state(sys, U0, V0, Layout.FULL)
    errs = []
    for dt in (0.04, 0.02, 0.01):
        s1 = bootstrap_first_step(sys, SchemeParams(Scheme.PAOLI_SCHATZMAN, dt), s0)
        U, _ = linear_flow(sys, s0.U, s0.V, dt)
        errs.append(np.abs(s1.U - U).max())
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 2.8)


def test_bootstrap_clips_penetration_for_massive_node():
    sys = benchmark_system(6, Mode.MOD1)
    x = sys.mesh.nodes[:-1]
    s0 = initial_state(sys, 0.001 * (1 - x), -np.ones(6), Layout.FULL)
    s1 = bootstrap_first_step(sys, SchemeParams(Scheme.PAOLI_SCHATZMAN, 0.01), s0)
    assert s1.U[0] == 0.0 and s1.lam < 0


def test_hybrid_equals_midpoint_without_contact():
    sys, U0, V0 = contact_free_setup(Mode.MOD3)
    s = initial_state(sys, U0, V0, Layout.REDUCED)
    a = integrate(sys, SchemeParams(Scheme.HYBRID, 0.01), s, 50)
    b = integrate(sys, SchemeParams(Scheme.SEMIDISCRETE_CN, 0.01), s, 50)
    np.testing.assert_allclose(a[-1].U, b[-1].U, atol=1e-13)


def test_dissipation_check_detects_nonconservative_contact_term():
    """Mutation check: the trapezoidal contact term of semi-discrete CN gains
    energy on the benchmark, which the hybrid switch prevents."""
    sys = benchmark_system(6, Mode.MOD3)
    s0 = benchmark_initial_state(sys, Layout.REDUCED)
    cn = integrate(sys, SchemeParams(Scheme.SEMIDISCRETE_CN, 0.01), s0, 400)
    hy = integrate(sys, SchemeParams(Scheme.HYBRID, 0.01), s0, 400)
    assert EnergyLedger.from_states(sys, cn).dE.max() > 1e-8
    assert EnergyLedger.from_states(sys, hy).dE.max() <= 1e-12


def test_hybrid_rejects_time_dependent_load():
    sys = assemble_system(Mesh1D(6), build_weights(Mode.MOD3, 6), f=lambda x, t: np.sin(t) + 0 * x,
                          time_dependent=True)
    s = initial_state(sys, np.ones(6), np.zeros(6), Layout.REDUCED)
    with pytest.raises(ConfigurationError):
        hybrid_step(sys, SchemeParams(Scheme.HYBRID, 0.01), s)


def test_time_dependent_load_is_resampled():
    """A time-dependent load must be evaluated at each step, not frozen at t = 0."""
    sys = assemble_system(Mesh1D(6), build_weights(Mode.MOD1, 6),
                          f=lambda x, t: (1.0 + np.cos(t)) + 0 * x, time_dependent=True)
    frozen = assemble_system(Mesh1D(6), build_weights(Mode.MOD1, 6), f=lambda x, t: 2.0 + 0 * x)
    x = sys.mesh.nodes[:-1]
    U0 = 1 - x**2
    a = integrate(sys, SchemeParams.crank_nicolson(0.1), initial_state(sys, U0, 0 * U0, Layout.FULL), 20)
    b = integrate(frozen, SchemeParams.crank_nicolson(0.1), initial_state(frozen, U0, 0 * U0, Layout.FULL), 20)
    assert np.abs(a[-1].U - b[-1].U).max() > 1e-3


def test_layout_and_parameter_errors():
    sys = benchmark_system(6, Mode.MOD1)
    with pytest.raises(ConfigurationError):
        initial_state(sys, np.ones(6), np.zeros(6), Layout.REDUCED)
    s = benchmark_initial_state(benchmark_system(6, Mode.MOD3), Layout.REDUCED)
    with pytest.raises(ConfigurationError):
        newmark_step(benchmark_system(6, Mode.MOD3), SchemeParams.crank_nicolson(0.01), s)
    with pytest.raises(ValueError):
        SchemeParams(Scheme.NEWMARK, -0.1)
    with pytest.raises(ValueError):
        SchemeParams(Scheme.PAOLI_SCHATZMAN, 0.1, e=1.5)
    with pytest.raises(ValueError):
        initial_state(sys, np.ones(5), np.zeros(6), Layout.FULL)


def test_stability_flag():
    assert SchemeParams.crank_nicolson(0.1).unconditionally_stable
    assert not SchemeParams(Scheme.NEWMARK, 0.1, beta=0.1, gamma=0.5).unconditionally_stable


def test_integrate_pins_times():
    sys = benchmark_system(6, Mode.MOD3)
    states = integrate(sys, SchemeParams(Scheme.HYBRID, 0.1), benchmark_initial_state(sys, Layout.REDUCED), 30)
    assert [s.t for s in states] == [n * 0.1 for n in range(31)]


def test_bootstrap_at_rest_is_identity():
    sys = benchmark_system(3, Mode.MOD1)
    U0 = np.array([0.3, 0.2, 0.1])
    s0 = initial_state(sys, U0, np.zeros(3), Layout.FULL)
    s0 = s0.evolve(A=np.zeros(3))
    s1 = bootstrap_first_step(sys, SchemeParams(Scheme.PAOLI_SCHATZMAN, 0.01), s0)
    np.testing.assert_array_equal(s1.U, U0)


def test_bootstrap_clipping_m3_by_hand():
    """u0 = 0 moving into the obstacle: M U1 = M U* + (dt^2/2) lam e0 with u0^1 = 0."""
    sys = benchmark_system(3, Mode.MOD1)
    dt = 0.01
    s0 = initial_state(sys, np.zeros(3), np.array([-1.0, 0.0, 0.0]), Layout.FULL)
    s1 = bootstrap_first_step(sys, SchemeParams(Scheme.PAOLI_SCHATZMAN, dt), s0)
    Ustar = s0.U + dt * s0.V + dt**2 / 2 * s0.A
    M = sys.M.todense()
    # bordered system [[M, c], [e0^T, 0]] [U; lam] = [M U*; 0], c = (dt^2/2) e0
    c = np.array([dt**2 / 2, 0, 0])
    B = np.zeros((4, 4))
    B[:3, :3] = M
    B[:3, 3] = c
    B[3, 0] = 1.0
    sol = np.linalg.solve(B, np.concatenate([M @ Ustar, [0.0]]))
    assert s1.U[0] == 0.0 and s1.lam < 0
    np.testing.assert_allclose(s1.U, sol[:3], atol=1e-14)
    assert s1.lam == pytest.approx(sol[3])
