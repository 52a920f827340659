"""State, energies and the single-node contact subproblem.

Sign convention: the multiplier ``lam`` enters the node-0 equation as
``-lam e0`` and satisfies ``0 <= u0 _|_ lam <= 0``, so ``lam`` is about -1/2
while the benchmark bar is in contact.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

import numpy as np

from .assembly import AssembledSystem
from .banded import LDLT, SymTridiag

KKT_TOL = 1e-10


class Layout(str, Enum):
    FULL = "full"  # nodes 0..m-1, explicit multiplier
    REDUCED = "reduced"  # nodes 1..m-1, u0 = u1^+


class ComplementarityError(RuntimeError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


@dataclass(frozen=True)
class State:
    """Nodal state at time ``t``.

    ``gap`` is the quantity the scheme constrains to be nonnegative (``u0``
    for one-step schemes, the restitution-weighted average for
    Paoli-Schatzman).
    """

    t: float
    U: np.ndarray
    V: np.ndarray
    A: np.ndarray
    lam: float
    layout: Layout
    gap: float

    @property
    def u1(self) -> float:
        return float(self.U[1] if self.layout is Layout.FULL else self.U[0])

    @property
    def u0(self) -> float:
        if self.layout is Layout.FULL:
            return float(self.U[0])
        return positive_part(self.U[0])

    def full_displacement(self) -> np.ndarray:
        """Displacement at nodes ``0..m`` (Dirichlet node appended)."""
        if self.layout is Layout.FULL:
            return np.concatenate([self.U, [0.0]])
        return np.concatenate([[self.u0], self.U, [0.0]])

    def full_velocity(self) -> np.ndarray:
        if self.layout is Layout.FULL:
            return np.concatenate([self.V, [0.0]])
        # the eliminated node moves like u1^+
        v0 = self.V[0] if self.U[0] > 0 else 0.0
        return np.concatenate([[v0], self.V, [0.0]])

    def evolve(self, **changes) -> State:
        return replace(self, **changes)


def reduced_multiplier(u1: float, h: float) -> float:
    """Stiffness flux ``(u1 - u0)/h`` with ``u0 = u1^+``; the node-0 multiplier."""
    return min(u1, 0.0) / h


def positive_part(s):
    return np.maximum(s, 0.0)[()] if np.ndim(s) else max(float(s), 0.0)


def kkt_residual(gap: float, lam: float) -> float:
    return max(abs(min(gap, 0.0)), abs(max(lam, 0.0)), abs(gap * lam))


def rhs_G(sys: AssembledSystem, U, P):
    """First-order right-hand side with momentum ``P = h Mstar U'``.

    Returns ``(Mstar^{-1} P / h, -Sstar U / h + F + u1^+ e1 / h)``.
    """
    if not sys.reduced:
        raise ValueError("rhs_G needs a reduced (massless contact node) system")
    h = sys.h
    U = np.asarray(U, dtype=float)
    dU = sys.Mstar.solve(np.asarray(P, dtype=float)) / h
    dP = -sys.Sstar.matvec(U) / h + sys.F
    dP[0] += positive_part(U[0]) / h
    return dU, dP


def momentum(sys: AssembledSystem, V) -> np.ndarray:
    return sys.h * sys.Mstar.matvec(V)


def discrete_energy(sys: AssembledSystem, state: State, F: Optional[np.ndarray] = None) -> float:
    U, V = state.U, state.V
    if state.layout is Layout.REDUCED:
        if not sys.reduced or U.size != sys.m - 1:
            raise ValueError("reduced state does not match the system")
        h = sys.h
        F = sys.F if F is None else F
        u1p = positive_part(U[0])
        return float(
            h / 2 * V @ sys.Mstar.matvec(V)
            + U @ sys.Sstar.matvec(U) / (2 * h)
            - u1p**2 / (2 * h)
            - U @ F
        )
    if U.size != sys.m:
        raise ValueError("full state does not match the system")
    F = sys.Ffull if F is None else F
    return float(0.5 * V @ sys.M.matvec(V) + 0.5 * U @ sys.S.matvec(U) - U @ F)


def hybrid_contact_force(u1_old: float, u1_new: float, h: float) -> float:
    """Contact term of the hybrid scheme (coefficient of e1)."""
    if u1_old < 0:
        return positive_part(u1_old + u1_new) / (2 * h)
    if u1_old > 0:
        return (u1_old + positive_part(u1_new)) / (2 * h)
    return positive_part(u1_new) / (2 * h)


def hybrid_contact_increment(u1_old: float, u1_new: float, h: float) -> float:
    """Energy change of one hybrid step; only the contact terms survive."""
    c = hybrid_contact_force(u1_old, u1_new, h)
    return (u1_new - u1_old) * c + (
        positive_part(u1_old) ** 2 - positive_part(u1_new) ** 2
    ) / (2 * h)


def energy_increment(sys: AssembledSystem, state_n: State, state_np1: State):
    """``(direct, closed_form)`` energy change between two hybrid states."""
    direct = discrete_energy(sys, state_np1) - discrete_energy(sys, state_n)
    closed = hybrid_contact_increment(state_n.u1, state_np1.u1, sys.h)
    return direct, closed


@dataclass(frozen=True)
class EnergyLedger:
    t: np.ndarray
    E: np.ndarray

    @property
    def dE(self) -> np.ndarray:
        """``E[n+1] - E[n]``; one entry per step."""
        return np.diff(self.E)

    @classmethod
    def from_states(cls, sys: AssembledSystem, states) -> EnergyLedger:
        t = np.array([s.t for s in states])
        E = np.array([discrete_energy(sys, s, _load_for(sys, s)) for s in states])
        return cls(t, E)


def _load_for(sys, state):
    if state.layout is Layout.REDUCED:
        return sys.reduced_load(state.t)
    return sys.full_load(state.t)


def solve_contact_step(
    K: SymTridiag,
    b,
    contact_row: int = 0,
    injection=None,
    alpha: float = 1.0,
    offset: float = 0.0,
    factor: Optional[LDLT] = None,
):
    """Solve ``K x + lam c = b`` with ``0 <= alpha x[row] + offset _|_ lam <= 0``.

    ``c`` defaults to the unit vector on ``contact_row``. With one constraint
    the active-set search has two branches: free (``lam = 0``) or
    closed gap. A free solution with a gap of exactly zero keeps ``lam = 0``.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    factor = factor if factor is not None else K.factor()
    b = np.asarray(b, dtype=float)
    x = factor.solve(b)
    gap = alpha * x[contact_row] + offset
    if gap >= 0.0:
        return x, 0.0
    if injection is None:
        c = np.zeros(K.n)
        c[contact_row] = 1.0
    else:
        c = np.asarray(injection, dtype=float)
    z = factor.solve(c)
    denom = alpha * z[contact_row]
    if not denom > 0.0:
        raise ComplementarityError(
            "multiplier column does not act on the contact unknown",
            {"gap": gap, "denominator": denom},
        )
    lam = gap / denom
    x = x - lam * z
    x[contact_row] = -offset / alpha
    if lam > 0.0:
        raise ComplementarityError(
            "no complementarity-feasible branch", {"gap": gap, "lam": lam}
        )
    return x, float(lam)
