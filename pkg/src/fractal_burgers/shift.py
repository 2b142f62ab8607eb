"""Shift X(t) with  X' = f(u(X(t), t), S_eps(0)),  X(0) = 0.

The field value at the off-grid point X is taken from the monotone cubic
interpolant of the cell values.  The shift is advanced with the same two
stages as the field update, so the coupled system is one RK2 method.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from .entropy import EntropyPair, normalized_flux
from .errors import BoundaryProximityError
from .fractional_operator import Grid1D
from .profiles import ViscousProfile
from .solver import FluxSpec

__all__ = ["ShiftState", "interpolate_at", "shift_rhs", "advance", "speed_bound"]


@dataclass(frozen=True)
class ShiftState:
    t: float = 0.0
    X: float = 0.0
    Xdot_last: float = 0.0


def interpolate_at(u, grid: Grid1D, X: float) -> float:
    """Monotone cubic interpolant of cell values at X (local 6-point window, same values as the global one)."""
    x = grid.x
    i = int(np.clip(np.searchsorted(x, X), 1, grid.N - 1))
    lo, hi = max(i - 3, 0), min(i + 3, grid.N)
    if X <= x[0]:
        return float(u[0])
    if X >= x[-1]:
        return float(u[-1])
    return float(PchipInterpolator(x[lo:hi], u[lo:hi])(X))


def shift_rhs(u, X: float, profile: ViscousProfile, epsilon: float, flux: FluxSpec, pair: EntropyPair,
              grid: Grid1D) -> float:
    """f(u(X), S_eps(0)) where S_eps(0) is the pinned midpoint state."""
    if abs(X) > 0.75 * grid.L:
        raise BoundaryProximityError(f"shift X = {X:.6g} left the inner 3/4 of the domain (L = {grid.L})")
    return float(normalized_flux(flux, pair, interpolate_at(u, grid, X), profile.midpoint))


def advance(shift: ShiftState, stages, dt: float, rhs: Callable[[np.ndarray, float], float]) -> ShiftState:
    """Heun step on the field's stage states: rhs at (U1, X) and at (U2, X + dt k1)."""
    U1, U2 = stages
    k1 = rhs(U1, shift.X)
    k2 = rhs(U2, shift.X + dt * k1)
    return ShiftState(t=shift.t + dt, X=shift.X + 0.5 * dt * (k1 + k2), Xdot_last=k2)


def speed_bound(flux: FluxSpec, pair: EntropyPair, M: float, n: int = 201) -> float:
    """max |f| over [-M, M]^2, sampled."""
    g = np.linspace(-M, M, n)
    U, V = np.meshgrid(g, g, indexing="ij")
    return float(np.max(np.abs(normalized_flux(flux, pair, U, V))))
