"""Time-stepping schemes for the bar with unilateral contact at node 0.

Full-layout schemes (Newmark, backward Euler, Paoli-Schatzman) carry node 0
and an explicit multiplier; when node 0 is massless its row is a
quasi-static equilibrium ``(S U)_0 = F_0 - lam``. Reduced-layout schemes
(hybrid, semi-discrete Crank-Nicolson) work on nodes ``1..m-1`` with
``u0 = u1^+`` eliminated, where the only nonlinearity is a scalar positive
part and each step is resolved exactly with at most two linear solves.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .assembly import AssembledSystem
from .banded import SymTridiag
from .contact import (
    Layout,
    State,
    positive_part,
    reduced_multiplier,
    solve_contact_step,
)


class ConfigurationError(ValueError):
    """Scheme, layout and system do not fit together."""


class DegenerateBranchError(RuntimeError):
    """Neither sign branch of a positive-part step is consistent."""


class Scheme(str, Enum):
    NEWMARK = "newmark"
    BACKWARD_EULER = "backward_euler"
    PAOLI_SCHATZMAN = "paoli_schatzman"
    HYBRID = "hybrid"
    SEMIDISCRETE_CN = "semidiscrete_cn"


@dataclass(frozen=True)
class SchemeParams:
    scheme: Scheme
    dt: float
    beta: float = 0.25
    gamma: float = 0.5
    e: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0.0 <= self.e <= 1.0:
            raise ValueError("restitution e must lie in [0, 1]")
        if self.scheme in (Scheme.NEWMARK, Scheme.PAOLI_SCHATZMAN) and not self.beta > 0:
            raise ValueError("beta must be positive for implicit Newmark-type steps")

    @classmethod
    def crank_nicolson(cls, dt: float) -> SchemeParams:
        return cls(Scheme.NEWMARK, dt, 0.25, 0.5)

    @property
    def layout(self) -> Layout:
        if self.scheme in (Scheme.HYBRID, Scheme.SEMIDISCRETE_CN):
            return Layout.REDUCED
        return Layout.FULL

    @property
    def unconditionally_stable(self) -> bool:
        """Linear (contact-free) stability of the Newmark family."""
        if self.scheme is not Scheme.NEWMARK:
            return True
        return self.gamma >= 0.5 and self.beta >= 0.25 * (0.5 + self.gamma) ** 2


def _e0(n: int, scale: float = 1.0) -> np.ndarray:
    c = np.zeros(n)
    c[0] = scale
    return c


def _massless_contact(sys: AssembledSystem) -> bool:
    return bool(sys.weights.redistributed)


def _quasi_static_contact(sys: AssembledSystem, U: np.ndarray, F0: float):
    """Node-0 equilibrium ``(S U)_0 = F0 - lam`` with ``0 <= u0 _|_ lam <= 0``."""
    S = sys.S
    K = SymTridiag([S.diag[0]], [])
    x, lam = solve_contact_step(K, [F0 - S.off[0] * U[1]])
    return float(x[0]), lam


def initial_acceleration(sys: AssembledSystem, U, V, lam: float, layout: Layout, t: float = 0.0):
    U = np.asarray(U, dtype=float)
    if layout is Layout.REDUCED:
        r = sys.reduced_load(t) - sys.S_red.matvec(U)
        r[0] += positive_part(U[0]) / sys.h
        return sys.M_red.solve(r)
    r = sys.full_load(t) - sys.S.matvec(U)
    r[0] -= lam
    if _massless_contact(sys):
        # node 0 has no inertia; its acceleration is kinematic bookkeeping only
        A = np.zeros(sys.m)
        A[1:] = sys.M_red.solve(r[1:])
        return A
    return sys.M.solve(r)


def initial_state(sys: AssembledSystem, U0, V0, layout: Layout, lam0: float = 0.0, t: float = 0.0) -> State:
    """Build a consistent start state from nodal values at nodes ``0..m-1``.

    With a massless contact node, ``u0`` is replaced by the value the
    quasi-static node-0 equation allows (``u1^+`` when ``F0 = 0``).
    """
    U0 = np.asarray(U0, dtype=float).copy()
    V0 = np.asarray(V0, dtype=float).copy()
    if U0.shape != (sys.m,) or V0.shape != (sys.m,):
        raise ValueError(f"initial data must have length m = {sys.m}")
    if layout is Layout.REDUCED:
        if not sys.reduced:
            raise ConfigurationError("reduced layout needs a massless contact node (mod 2/3)")
        U, V = U0[1:], V0[1:]
        lam = reduced_multiplier(U[0], sys.h)
        A = initial_acceleration(sys, U, V, lam, layout, t)
        return State(t, U, V, A, lam, layout, positive_part(U[0]))
    lam = lam0
    if _massless_contact(sys):
        U0[0], lam = _quasi_static_contact(sys, U0, sys.full_load(t)[0])
    A = initial_acceleration(sys, U0, V0, lam, layout, t)
    return State(t, U0, V0, A, lam, layout, float(U0[0]))


def _require(state: State, layout: Layout, name: str):
    if state.layout is not layout:
        raise ConfigurationError(f"{name} needs a {layout.value} state")


def newmark_step(sys: AssembledSystem, params: SchemeParams, state: State) -> State:
    _require(state, Layout.FULL, "newmark_step")
    dt, beta, gamma = params.dt, params.beta, params.gamma
    c = beta * dt**2
    F = sys.full_load(state.t + dt)
    predictor = state.U + dt * state.V + (0.5 - beta) * dt**2 * state.A
    K = sys.M + sys.S.scaled(c)
    b = c * F + sys.M.matvec(predictor)
    U, lam = solve_contact_step(K, b, injection=_e0(sys.m, c))
    A = (U - predictor) / c
    V = state.V + dt * ((1 - gamma) * state.A + gamma * A)
    return State(state.t + dt, U, V, A, lam, Layout.FULL, float(U[0]))


def backward_euler_step(sys: AssembledSystem, params: SchemeParams, state: State) -> State:
    _require(state, Layout.FULL, "backward_euler_step")
    dt = params.dt
    c = dt**2
    F = sys.full_load(state.t + dt)
    K = sys.M + sys.S.scaled(c)
    b = c * F + sys.M.matvec(state.U + dt * state.V)
    U, lam = solve_contact_step(K, b, injection=_e0(sys.m, c))
    V = (U - state.U) / dt
    A = (V - state.V) / dt
    return State(state.t + dt, U, V, A, lam, Layout.FULL, float(U[0]))


def bootstrap_first_step(sys: AssembledSystem, params: SchemeParams, state0: State) -> State:
    """Second-order Taylor start-up for two-step schemes."""
    _require(state0, Layout.FULL, "bootstrap_first_step")
    dt = params.dt
    U = state0.U + dt * state0.V + 0.5 * dt**2 * state0.A
    V = state0.V + dt * state0.A
    lam = 0.0
    if _massless_contact(sys):
        U[0], lam = _quasi_static_contact(sys, U, sys.full_load(dt + state0.t)[0])
    elif U[0] < 0.0:
        # impulsive correction of the start-up acceleration
        U, lam = solve_contact_step(
            sys.M, sys.M.matvec(U), injection=_e0(sys.m, 0.5 * dt**2)
        )
    return State(state0.t + dt, U, V, state0.A, lam, Layout.FULL, float(U[0]))


def paoli_schatzman_step(sys: AssembledSystem, params: SchemeParams, prev: State, cur: State):
    """Advance ``(U^{n-1}, U^n) -> U^{n+1}``.

    Returns ``(cur_done, nxt)``: the multiplier ``lam^n``, the constrained
    average and the centred velocity belong to ``t_n`` and are stored on
    ``cur_done``; ``nxt`` is provisional until the following step.
    """
    _require(cur, Layout.FULL, "paoli_schatzman_step")
    dt, beta, e = params.dt, params.beta, params.e
    kernel = _massless_contact(sys)
    F = sys.full_load(cur.t)
    explicit = (1 - 2 * beta) * sys.S.matvec(cur.U) + beta * sys.S.matvec(prev.U)
    if kernel:
        # keep only the part of S U^n, S U^{n-1} orthogonal to ker M = span(e0)
        explicit[0] = 0.0
    K = sys.M + sys.S.scaled(beta * dt**2)
    b = sys.M.matvec(2 * cur.U - prev.U) - dt**2 * explicit + dt**2 * F
    # on ker M only beta * S U^{n+1} is left; scale the multiplier column to
    # match so lam stays the node-0 contact force
    scale = beta * dt**2 if kernel else dt**2
    alpha = 1.0 / (1.0 + e)
    offset = e * prev.U[0] / (1.0 + e)
    U, lam = solve_contact_step(
        K, b, injection=_e0(sys.m, scale), alpha=alpha, offset=offset
    )
    gap = alpha * U[0] + offset
    A_n = (U - 2 * cur.U + prev.U) / dt**2
    cur_done = cur.evolve(V=(U - prev.U) / (2 * dt), A=A_n, lam=lam, gap=float(gap))
    nxt = State(cur.t + dt, U, (U - cur.U) / dt, A_n, 0.0, Layout.FULL, float(U[0]))
    return cur_done, nxt


def _solve_positive_part(K: SymTridiag, b: np.ndarray, kappa: float, sigma: float) -> np.ndarray:
    """Solve ``K x = b + kappa (x[0] + sigma)^+ e0`` exactly.

    The map is monotone as long as ``K - kappa e0 e0^T`` is SPD, so exactly one
    of the two sign branches is consistent.
    """
    x = K.solve(b)
    if x[0] + sigma <= 0.0:
        return x
    rhs = b.copy()
    rhs[0] += kappa * sigma
    x = K.with_diag_update(0, -kappa).solve(rhs)
    tol = 1e-12 * (1.0 + abs(sigma) + np.max(np.abs(x)))
    if x[0] + sigma < -tol:
        raise DegenerateBranchError(
            f"positive-part step inconsistent in both branches (arg = {x[0] + sigma!r})"
        )
    return x


def _midpoint_system(sys: AssembledSystem, state: State, dt: float, F: np.ndarray):
    K = sys.M_red + sys.S_red.scaled(dt**2 / 4)
    b = (
        sys.M_red.matvec(state.U + dt * state.V)
        - dt**2 / 4 * sys.S_red.matvec(state.U)
        + dt**2 / 2 * F
    )
    return K, b


def _finish_reduced(sys, state: State, U: np.ndarray, dt: float) -> State:
    V = 2 * (U - state.U) / dt - state.V
    A = 2 * (V - state.V) / dt - state.A
    lam = reduced_multiplier(U[0], sys.h)
    return State(state.t + dt, U, V, A, lam, Layout.REDUCED, positive_part(U[0]))


def hybrid_step(sys: AssembledSystem, params: SchemeParams, state: State) -> State:
    """Midpoint linear part; contact term switches between midpoint (coming
    from ``u1 < 0``) and trapezoidal (coming from ``u1 > 0``) treatment."""
    _require(state, Layout.REDUCED, "hybrid_step")
    if sys.time_dependent:
        raise ConfigurationError("the hybrid scheme requires a time-independent load")
    dt, h = params.dt, sys.h
    K, b = _midpoint_system(sys, state, dt, sys.F)
    u1 = state.U[0]
    kappa = dt**2 / (4 * h)
    sigma = 0.0
    if u1 < 0.0:
        sigma = u1
    elif u1 > 0.0:
        b[0] += dt**2 / 2 * u1 / (2 * h)
    U = _solve_positive_part(K, b, kappa, sigma)
    return _finish_reduced(sys, state, U, dt)


def semidiscrete_cn_step(sys: AssembledSystem, params: SchemeParams, state: State) -> State:
    """Trapezoidal rule on the first-order reduced system."""
    _require(state, Layout.REDUCED, "semidiscrete_cn_step")
    dt, h = params.dt, sys.h
    F = 0.5 * (sys.reduced_load(state.t) + sys.reduced_load(state.t + dt))
    K, b = _midpoint_system(sys, state, dt, F)
    b[0] += dt**2 / 2 * positive_part(state.U[0]) / (2 * h)
    U = _solve_positive_part(K, b, dt**2 / (4 * h), 0.0)
    return _finish_reduced(sys, state, U, dt)


ONE_STEP = {
    Scheme.NEWMARK: newmark_step,
    Scheme.BACKWARD_EULER: backward_euler_step,
    Scheme.HYBRID: hybrid_step,
    Scheme.SEMIDISCRETE_CN: semidiscrete_cn_step,
}


def integrate(sys: AssembledSystem, params: SchemeParams, state0: State, nsteps: int) -> list:
    """Run ``nsteps`` steps from ``state0`` and return all ``nsteps + 1`` states."""
    states = [state0]
    if params.scheme is Scheme.PAOLI_SCHATZMAN:
        if nsteps == 0:
            return states
        states.append(_at(bootstrap_first_step(sys, params, state0), state0, params, 1))
        # one extra step so the last state gets its multiplier and velocity
        for n in range(1, nsteps + 1):
            done, nxt = paoli_schatzman_step(sys, params, states[-2], states[-1])
            states[-1] = done
            states.append(_at(nxt, state0, params, n + 1))
        states.pop()
        return states
    step = ONE_STEP[params.scheme]
    for n in range(1, nsteps + 1):
        states.append(_at(step(sys, params, states[-1]), state0, params, n))
    return states


def _at(state: State, state0: State, params: SchemeParams, n: int) -> State:
    # pin t_n = t_0 + n dt so oracle comparisons at kink times are not
    # thrown to the wrong side by accumulated rounding
    return state.evolve(t=state0.t + n * params.dt)
