"""P1 finite element assembly on a uniform mesh with weighted (redistributed) mass.

Node 0 sits at the contact end ``x = 0``; the Dirichlet node ``x = L`` is
eliminated, so full vectors carry nodes ``0..m-1``. Element ``j`` is the
interval ``[j h, (j+1) h]`` and carries the mass weight ``w[j]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .banded import SymTridiag

LoadFunction = Callable[[np.ndarray, float], np.ndarray]

_GAUSS_POINTS = np.array([-1.0, 1.0]) / np.sqrt(3.0)


class InvalidModeError(ValueError):
    """The weight profile does not allow eliminating the contact node."""


class Mode(str, Enum):
    MOD1 = "mod1"
    MOD2 = "mod2"
    MOD3 = "mod3"
    CUSTOM = "custom"

    @classmethod
    def parse(cls, value) -> Mode:
        if isinstance(value, Mode):
            return value
        text = str(value).strip().lower()
        if text in {"1", "2", "3"}:
            text = "mod" + text
        try:
            return cls(text)
        except ValueError:
            raise ValueError(f"unknown mod {value!r}") from None


@dataclass(frozen=True)
class Mesh1D:
    m: int
    L: float = 1.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError(f"need an integer m >= 2, got {self.m!r}")
        if not self.L > 0:
            raise ValueError("L must be positive")

    @property
    def h(self) -> float:
        return self.L / self.m

    @property
    def nodes(self) -> np.ndarray:
        """Coordinates of all nodes ``0..m`` including the Dirichlet node."""
        return np.arange(self.m + 1) * self.h


@dataclass(frozen=True)
class WeightProfile:
    mode: Mode
    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float).copy()
        if w.ndim != 1 or w.size < 2:
            raise ValueError("weights must be a 1-D vector of length m >= 2")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite and >= 0")
        # custom profiles may be singular; factorisation reports it
        if self.mode is not Mode.CUSTOM and np.any(w[1:] <= 0):
            raise ValueError("weights must be > 0 away from element 0")
        w.flags.writeable = False
        object.__setattr__(self, "w", w)

    @property
    def redistributed(self) -> bool:
        """True when the contact node carries no inertia."""
        return self.w[0] == 0.0


def build_weights(mode, m: int) -> WeightProfile:
    mode = Mode.parse(mode)
    if m < 3:
        raise ValueError(f"need m >= 3 elements, got {m}")
    if mode is Mode.MOD1:
        w = np.ones(m)
    elif mode is Mode.MOD2:
        w = np.full(m, m / (m - 1))
        w[0] = 0.0
    elif mode is Mode.MOD3:
        w = np.ones(m)
        w[0], w[1] = 0.0, 2.0
    else:
        raise ValueError("custom weights need explicit values; use custom_weights()")
    return WeightProfile(mode, w)


def custom_weights(w) -> WeightProfile:
    return WeightProfile(Mode.CUSTOM, w)


def assemble_mass(mesh: Mesh1D, wp: WeightProfile) -> SymTridiag:
    w = wp.w
    if w.size != mesh.m:
        raise ValueError(f"{w.size} weights for {mesh.m} elements")
    h = mesh.h
    diag = np.empty(mesh.m)
    diag[0] = h / 3 * w[0]
    diag[1:] = h / 3 * (w[:-1] + w[1:])
    off = h / 6 * w[:-1]
    return SymTridiag(diag, off)


def assemble_stiffness(mesh: Mesh1D) -> SymTridiag:
    h = mesh.h
    diag = np.full(mesh.m, 2 / h)
    diag[0] = 1 / h
    return SymTridiag(diag, np.full(mesh.m - 1, -1 / h))


def assemble_load(mesh: Mesh1D, wp: WeightProfile, f: LoadFunction, t: float = 0.0):
    """Weighted load ``f_i = int f w_h phi_i dx`` for nodes ``0..m-1``.

    Two-point Gauss per element. Returns the full vector (length m); the
    reduced load is ``full[1:]``.
    """
    h, m = mesh.h, mesh.m
    left = np.arange(m) * h
    # shape (m, 2): quadrature abscissae per element
    xi = (_GAUSS_POINTS + 1.0) / 2.0
    x = left[:, None] + h * xi[None, :]
    fx = np.asarray(f(x, t), dtype=float) * np.ones_like(x)
    weighted = fx * wp.w[:, None] * (h / 2)
    full = np.zeros(m + 1)
    full[:-1] += np.sum(weighted * (1.0 - xi), axis=1)
    full[1:] += np.sum(weighted * xi, axis=1)
    return full[:-1]


@dataclass(frozen=True)
class AssembledSystem:
    """Full (size m) and, when node 0 is massless, reduced (size m-1) matrices.

    ``Mstar = M/h`` and ``Sstar = h S`` on nodes ``1..m-1``, so that the
    reduced equation reads ``h Mstar U'' + Sstar U / h = F + u1^+ e1 / h``.
    ``M_red``/``S_red`` hold the same operators unscaled.
    """

    mesh: Mesh1D
    weights: WeightProfile
    M: SymTridiag
    S: SymTridiag
    Ffull: np.ndarray
    Mstar: Optional[SymTridiag] = None
    Sstar: Optional[SymTridiag] = None
    F: Optional[np.ndarray] = None
    load: Optional[LoadFunction] = field(default=None, compare=False)
    time_dependent: bool = False

    @property
    def h(self) -> float:
        return self.mesh.h

    @property
    def m(self) -> int:
        return self.mesh.m

    @property
    def reduced(self) -> bool:
        return self.Mstar is not None

    @property
    def M_red(self) -> SymTridiag:
        return self.M.restricted(1)

    @property
    def S_red(self) -> SymTridiag:
        return self.S.restricted(1)

    def full_load(self, t: float) -> np.ndarray:
        if self.time_dependent and self.load is not None:
            return assemble_load(self.mesh, self.weights, self.load, t)
        return self.Ffull

    def reduced_load(self, t: float) -> np.ndarray:
        return self.full_load(t)[1:]


def reduce_system(M: SymTridiag, S: SymTridiag, Ffull, h: float):
    """Eliminate the massless contact node; returns ``(Mstar, Sstar, F)``.

    Only valid when node 0 has zero mass (``w0 = 0``), where the node-0 row
    reduces to ``u0 = u1^+``.
    """
    if M.diag[0] != 0.0 or M.off[0] != 0.0:
        raise InvalidModeError(
            "contact node has mass (w0 != 0); elimination u0 = u1^+ does not apply"
        )
    Ffull = np.asarray(Ffull, dtype=float)
    return M.restricted(1).scaled(1 / h), S.restricted(1).scaled(h), Ffull[1:].copy()


def assemble_system(
    mesh: Mesh1D,
    wp: WeightProfile,
    f: Optional[LoadFunction] = None,
    time_dependent: bool = False,
) -> AssembledSystem:
    M = assemble_mass(mesh, wp)
    S = assemble_stiffness(mesh)
    if f is None:
        Ffull = np.zeros(mesh.m)
        time_dependent = False
    else:
        Ffull = assemble_load(mesh, wp, f, 0.0)
    Mstar = Sstar = F = None
    if wp.redistributed:
        Mstar, Sstar, F = reduce_system(M, S, Ffull, mesh.h)
    return AssembledSystem(
        mesh, wp, M, S, Ffull, Mstar, Sstar, F, load=f, time_dependent=time_dependent
    )
