"""Exact solution of the bar released from ``u0 = (1-x)/2`` against a rigid obstacle.

L = 1, f = 0, v0 = 0. The bar reaches the obstacle at t = 1, stays in contact
until t = 2, releases, and returns to its initial state at t = 3.

Each of the three phases is piecewise affine in ``(x, tau)`` with
``tau = t mod 3``, written below as the min or max of a few affine pieces
``a_x * x + a_t * tau + b``. Derivatives on kinks are taken from the active
pieces; on discontinuities of the velocity the average of both one-sided
limits is returned.
"""

from __future__ import annotations

import numpy as np

L = 1.0
PERIOD = 3.0
T_IMPACT = 1.0
T_RELEASE = 2.0
ENERGY = 0.25

_ACTIVE_TOL = 1e-13

# (op, pieces) per phase; pieces are rows (a_x, a_t, b)
_PHASES = (
    (np.minimum, np.array([[-0.5, 0.0, 0.5], [0.0, -0.5, 0.5]])),
    (
        np.maximum,
        np.array(
            [[-0.5, 0.0, 0.0], [0.5, 0.0, -0.5], [0.0, -0.5, 0.5], [0.0, 0.5, -1.0]]
        ),
    ),
    (np.minimum, np.array([[0.0, 0.5, -1.0], [-0.5, 0.0, 0.5]])),
)


def _check_domain(x, t):
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(x < 0.0) or np.any(x > L) or np.any(np.isnan(x)):
        raise ValueError("x must lie in [0, 1]")
    if np.any(t < 0.0) or np.any(np.isnan(t)):
        raise ValueError("t must be >= 0")
    return np.broadcast_arrays(x, t)


def _phase_index(tau, side):
    """Phase holding ``[tau, tau+)`` (side=+1) or ``(tau-, tau]`` (side=-1)."""
    if side > 0:
        k = np.floor(tau)
        return np.clip(k, 0, 2).astype(int), tau
    k = np.ceil(tau) - 1
    # tau = 0 seen from the left belongs to phase C of the previous period
    wrap = k < 0
    return np.where(wrap, 2, k).astype(int), np.where(wrap, tau + PERIOD, tau)


def _evaluate(x, tau, phase):
    u = np.empty_like(x)
    for k, (op, pieces) in enumerate(_PHASES):
        sel = phase == k
        if np.any(sel):
            vals = (
                pieces[:, 0] * x[sel][:, None]
                + pieces[:, 1] * tau[sel][:, None]
                + pieces[:, 2]
            )
            u[sel] = op.reduce(vals, axis=1)
    return u


def _one_sided(x, tau, phase, column, side):
    """One-sided derivative along ``column`` (0: x, 1: t) in direction ``side``."""
    out = np.empty_like(x)
    for k, (op, pieces) in enumerate(_PHASES):
        sel = phase == k
        if not np.any(sel):
            continue
        vals = (
            pieces[:, 0] * x[sel][:, None]
            + pieces[:, 1] * tau[sel][:, None]
            + pieces[:, 2]
        )
        extreme = op.reduce(vals, axis=1)[:, None]
        active = np.abs(vals - extreme) <= _ACTIVE_TOL
        slopes = np.broadcast_to(pieces[:, column], vals.shape)
        # a min moves forward along its smallest active slope, a max along its largest
        forward_min = (op is np.minimum) == (side > 0)
        if forward_min:
            out[sel] = np.where(active, slopes, np.inf).min(axis=1)
        else:
            out[sel] = np.where(active, slopes, -np.inf).max(axis=1)
    return out


def exact_displacement(x, t):
    x, t = _check_domain(x, t)
    tau = np.mod(t, PERIOD)
    phase, tau = _phase_index(tau, +1)
    u = _evaluate(x.astype(float).ravel(), tau.ravel(), phase.ravel())
    return u.reshape(x.shape)[()]


def _average_derivative(x, t, column):
    x, t = _check_domain(x, t)
    shape = x.shape
    x = x.astype(float).ravel()
    tau = np.mod(t, PERIOD).ravel()
    ph_r, tau_r = _phase_index(tau, +1)
    right = _one_sided(x, tau_r, ph_r, column, +1)
    if column == 1:
        ph_l, tau_l = _phase_index(tau, -1)
        left = _one_sided(x, tau_l, ph_l, column, -1)
        # no past at t = 0
        left = np.where(t.ravel() == 0.0, right, left)
    else:
        left = _one_sided(x, tau_r, ph_r, column, -1)
        left = np.where(x == 0.0, right, left)
        right = np.where(x == L, left, right)
    return (0.5 * (left + right)).reshape(shape)[()]


def exact_velocity(x, t):
    """u_t; average of one-sided limits on characteristic lines."""
    return _average_derivative(x, t, 1)


def exact_strain(x, t):
    """u_x; average of one-sided limits on characteristic lines."""
    return _average_derivative(x, t, 0)


def exact_multiplier(t):
    """Contact multiplier ``lambda = u_x(0, t)``: -1/2 while in contact, else 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise ValueError("t must be >= 0")
    tau = np.mod(t, PERIOD)
    return np.where((tau > T_IMPACT) & (tau < T_RELEASE), -0.5, 0.0)[()]


def exact_energy(t=None) -> float:
    """``int_0^1 (u_t^2 + u_x^2) dx``, constant in time."""
    if t is not None and np.any(np.asarray(t) < 0):
        raise ValueError("t must be >= 0")
    return ENERGY


def initial_displacement(x):
    return (1.0 - np.asarray(x, dtype=float)) / 2.0


def initial_velocity(x):
    return np.zeros_like(np.asarray(x, dtype=float))
