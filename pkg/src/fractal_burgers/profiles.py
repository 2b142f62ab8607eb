"""Inviscid shocks and viscous shock layers.

The layer S1 solves  (A(S1) - sigma S1)' = D^{alpha/2} S1  with S1(-inf) = u_minus,
S1(+inf) = u_plus.  It is obtained by relaxing the time-dependent problem in
the co-moving frame (epsilon = 1) with implicit-Euler in the nonlocal term and
explicit Rusanov/minmod advection, until the update rate drops below ``tol``.
The scaled layer is S_eps(x) = S1(x / eps^beta), beta = 1 / (alpha - 1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import ConvergenceError, DegenerateInputError, DomainError
from .fractional_operator import FarField, Grid1D, build_operator
from .solver import BURGERS, FluxSpec, SolverConfig, _cg_solve, advection_rhs

__all__ = [
    "InviscidShock",
    "ViscousProfile",
    "rankine_hugoniot_speed",
    "compute_profile",
    "profile_residual",
    "evaluate_scaled",
    "evaluate_scaled_derivative",
    "tail_gap",
    "save_profile",
    "load_profile",
]


def rankine_hugoniot_speed(flux: FluxSpec, u_minus: float, u_plus: float) -> float:
    if u_minus == u_plus:
        raise DegenerateInputError("shock end states coincide")
    return float((flux.A(u_minus) - flux.A(u_plus)) / (u_minus - u_plus))


@dataclass(frozen=True)
class InviscidShock:
    """Entropy shock S0(x - sigma t) = u_minus for x < sigma t, u_plus otherwise."""

    u_minus: float
    u_plus: float
    sigma: float

    @classmethod
    def from_flux(cls, flux: FluxSpec, u_minus: float, u_plus: float) -> "InviscidShock":
        if not u_minus > u_plus:
            raise DomainError("entropy shock requires u_minus > u_plus")
        return cls(float(u_minus), float(u_plus), rankine_hugoniot_speed(flux, u_minus, u_plus))

    def __call__(self, x, t: float = 0.0):
        x = np.asarray(x, dtype=float)
        return np.where(x < self.sigma * t, self.u_minus, self.u_plus)

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.u_minus + self.u_plus)


@dataclass(frozen=True, eq=False)
class ViscousProfile:
    """Sampled shock layer S1 on a uniform xi grid, pinned so that S1(0) is the midpoint state."""

    alpha: float
    u_minus: float
    u_plus: float
    sigma: float
    xi: np.ndarray
    values: np.ndarray
    residual: float
    tol: float
    iterations: int = 0
    flux_name: str = "burgers"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "_interp", PchipInterpolator(self.xi, self.values, extrapolate=False))
        object.__setattr__(self, "_dinterp", self._interp.derivative())

    @property
    def beta(self) -> float:
        return 1.0 / (self.alpha - 1.0)

    @property
    def xi_max(self) -> float:
        return float(min(-self.xi[0], self.xi[-1]))

    @property
    def spacing(self) -> float:
        return float(self.xi[1] - self.xi[0])

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.u_minus + self.u_plus)

    @property
    def shock(self) -> InviscidShock:
        return InviscidShock(self.u_minus, self.u_plus, self.sigma)

    def __call__(self, xi):
        """S1(xi) by monotone cubic interpolation, clamped to the end states outside the samples."""
        xi = np.asarray(xi, dtype=float)
        out = self._interp(xi)
        return np.where(xi < self.xi[0], self.u_minus, np.where(xi > self.xi[-1], self.u_plus, out))

    def derivative(self, xi):
        """S1'(xi); zero outside the sampled range."""
        xi = np.asarray(xi, dtype=float)
        out = self._dinterp(xi)
        return np.where(np.isnan(out), 0.0, out)

    def max_slope(self) -> float:
        """max_i (S_{i+1} - S_i) / h; non-positive for a monotone layer."""
        return float(np.max(np.diff(self.values)) / self.spacing)

    def tail_decay_exponent(self, lo: float = 1 / 32, hi: float = 1 / 4) -> float:
        """Least-squares exponent p in |S1 - u_pm| ~ |xi|^(-p) over lo*xi_max <= |xi| <= hi*xi_max."""
        a = np.abs(self.xi)
        sel = (a >= lo * self.xi_max) & (a <= hi * self.xi_max)
        gap = np.where(self.xi < 0, self.u_minus - self.values, self.values - self.u_plus)[sel]
        sel_pos = gap > 0
        slope = np.polyfit(np.log(a[sel][sel_pos]), np.log(gap[sel_pos]), 1)[0]
        return float(-slope)


def _crossing(xi, values, level):
    """Position where the decreasing samples cross ``level`` (monotone cubic root)."""
    i = int(np.searchsorted(-values, -level))
    i = min(max(i, 1), len(values) - 1)
    lo, hi = max(i - 3, 0), min(i + 3, len(values))
    f = PchipInterpolator(xi[lo:hi], values[lo:hi] - level)
    a, b = xi[i - 1], xi[i]
    if f(a) * f(b) < 0:
        return float(brentq(f, a, b, xtol=1e-14))
    return float(a if f(a) == 0 else b)


def _resample(xi, values, shift, u_minus, u_plus):
    """Values of the profile translated by ``-shift`` (so a crossing at ``shift`` moves to 0)."""
    f = PchipInterpolator(xi, values, extrapolate=False)
    out = f(xi + shift)
    out = np.where(xi + shift < xi[0], u_minus, out)
    return np.where(xi + shift > xi[-1], u_plus, out)


def compute_profile(alpha: float, flux: FluxSpec = BURGERS, u_minus: float = 1.0, u_plus: float = -1.0,
                    tol: float = 1e-8, xi_max: float = 512.0, n_cells: int = 4096, cfl: float = 0.4,
                    max_iter: int = 400_000, recenter_threshold: float = 0.25) -> ViscousProfile:
    """Relax to the stationary co-moving layer and return it pinned at xi = 0.

    The update rate sup|S^{n+1} - S^n| / dt is the steady residual.  When the
    midpoint crossing wanders more than ``recenter_threshold`` cells the
    samples are translated back by monotone cubic interpolation.
    """
    if not u_minus > u_plus:
        raise DomainError("profile requires u_minus > u_plus")
    sigma = rankine_hugoniot_speed(flux, u_minus, u_plus)
    grid = Grid1D(xi_max, n_cells)
    op = build_operator(grid, alpha, FarField(u_minus, u_plus))
    config = SolverConfig(epsilon=1.0, t_end=np.inf, alpha=alpha, flux=flux, frame_speed=sigma,
                          cg_rtol=1e-13)
    x, h = grid.x, grid.h
    mid = 0.5 * (u_minus + u_plus)
    half = 0.5 * (u_minus - u_plus)
    u = mid - half * np.tanh(x)
    umax = max(abs(u_minus), abs(u_plus))
    speed = max(float(np.max(np.abs(flux.A_prime(np.linspace(-umax, umax, 257)) - sigma))), 1e-12)
    dt = cfl * h / speed
    src = op.tail_const
    res = np.inf
    for n in range(1, max_iter + 1):
        rhs = u + dt * (advection_rhs(u, op, config) + src)
        u_new = _cg_solve(op, config, dt, rhs, u)
        res = float(np.max(np.abs(u_new - u)) / dt)
        u = u_new
        if res < tol:
            break
        if n % 200 == 0:
            c = _crossing(x, u, mid)
            if abs(c) > recenter_threshold * h:
                u = _resample(x, u, c, u_minus, u_plus)
    else:
        raise ConvergenceError(f"profile relaxation stalled at residual {res:.3e}", residual=res, iterations=max_iter)

    pin = _crossing(x, u, mid)
    meta = {"xi_max": xi_max, "n_cells": n_cells, "cfl": cfl, "pin_offset": pin,
            "pinning": "S1(0) = (u_minus + u_plus) / 2"}
    prof = ViscousProfile(alpha=float(alpha), u_minus=float(u_minus), u_plus=float(u_plus), sigma=sigma,
                          xi=x - pin, values=u, residual=res, tol=tol, iterations=n, flux_name=flux.name,
                          meta=meta)
    prof.meta["tail_decay_exponent"] = prof.tail_decay_exponent()
    return prof


def profile_residual(profile: ViscousProfile, flux: FluxSpec = BURGERS, inner_fraction: float = 0.5) -> float:
    """sup |(A(S) - sigma S)' - D^{alpha/2} S| over the inner part of the sample grid, discrete operators."""
    n = len(profile.xi)
    grid = Grid1D(0.5 * n * profile.spacing, n)
    op = build_operator(grid, profile.alpha, FarField(profile.u_minus, profile.u_plus))
    config = SolverConfig(epsilon=1.0, t_end=0.0, alpha=profile.alpha, flux=flux, frame_speed=profile.sigma)
    r = advection_rhs(profile.values, op, config) + op.apply(profile.values)
    sel = np.abs(grid.x) <= inner_fraction * grid.L
    return float(np.max(np.abs(r[sel])))


def evaluate_scaled(profile: ViscousProfile, epsilon: float, x):
    """S_eps(x) = S1(x / eps^beta)."""
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    return profile(np.asarray(x, dtype=float) * epsilon ** -profile.beta)


def evaluate_scaled_derivative(profile: ViscousProfile, epsilon: float, x):
    """S_eps'(x) = eps^-beta S1'(x / eps^beta)."""
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    s = epsilon ** -profile.beta
    return s * profile.derivative(np.asarray(x, dtype=float) * s)


def tail_gap(profile: ViscousProfile, delta):
    """(S1(sqrt(delta)) - u_plus) + (u_minus - S1(-sqrt(delta))) for delta >= 4."""
    d = np.asarray(delta, dtype=float)
    if np.any(d < 4):
        raise DomainError("tail gap is defined for delta >= 4")
    r = np.sqrt(d)
    out = (profile(r) - profile.u_plus) + (profile.u_minus - profile(-r))
    return float(out) if out.ndim == 0 else out


def save_profile(profile: ViscousProfile, path) -> tuple[Path, Path]:
    """Write ``<path>.csv`` (xi, S1) and ``<path>.json`` metadata."""
    base = Path(path)
    base.parent.mkdir(parents=True, exist_ok=True)
    csv_path, json_path = base.with_suffix(".csv"), base.with_suffix(".json")
    np.savetxt(csv_path, np.column_stack([profile.xi, profile.values]), delimiter=",",
               header="xi,S1", comments="", fmt="%.17g")
    meta = {
        "alpha": profile.alpha, "u_minus": profile.u_minus, "u_plus": profile.u_plus,
        "sigma": profile.sigma, "tol": profile.tol, "residual": profile.residual,
        "iterations": profile.iterations, "flux": profile.flux_name, **profile.meta,
    }
    json_path.write_text(json.dumps(meta, indent=2, sort_keys=True))
    return csv_path, json_path


def load_profile(path) -> ViscousProfile:
    base = Path(path)
    data = np.loadtxt(base.with_suffix(".csv"), delimiter=",", skiprows=1)
    meta = json.loads(base.with_suffix(".json").read_text())
    core = {k: meta.pop(k) for k in ("alpha", "u_minus", "u_plus", "sigma", "tol", "residual", "iterations")}
    flux_name = meta.pop("flux", "burgers")
    return ViscousProfile(xi=data[:, 0], values=data[:, 1], flux_name=flux_name, meta=meta, **core)
