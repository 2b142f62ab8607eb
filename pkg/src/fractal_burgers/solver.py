"""Finite-volume integration of  u_t + A(u)_x = eps * D^{alpha/2} u.

Advection uses a local Lax-Friedrichs (Rusanov) flux with either piecewise
constant or minmod-limited linear reconstruction; ghost cells carry the far
field states.  The nonlocal term is the operator from
:mod:`fractal_burgers.fractional_operator`.

Two time integrators share one stage structure (two explicit evaluations
combined with weights 1/2, 1/2), which lets a shift ODE ride along on the
same stages:

* ``ssp_rk2``: Heun / SSP-RK2, fully explicit, diffusive limit dt ~ h^alpha / eps.
* ``imex``: IMEX-SSP2(2,2,2) of Pareschi and Russo, implicit in the nonlocal
  term (conjugate gradients on the symmetric negative definite matrix).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .errors import ConfigurationError, DomainError, IntegrationError
from .fractional_operator import FarField, FracLapOperator, Grid1D

__all__ = [
    "FluxSpec",
    "BURGERS",
    "burgers_flux",
    "power_flux",
    "SolverConfig",
    "State",
    "stable_timestep",
    "advection_rhs",
    "rhs",
    "step",
    "solve",
    "positive_slope_l2",
    "max_norm",
    "mass",
    "boundary_mass_rate",
    "DEFAULT_MONITORS",
]

RECONSTRUCTIONS = ("first_order", "minmod_second_order")
SCHEMES = ("ssp_rk2", "imex")
_SPEED_FLOOR = 1e-12


@dataclass(frozen=True)
class FluxSpec:
    """Convex flux A with derivatives; ``G`` is the entropy flux for eta = u^2/2 if known."""

    A: Callable
    A_prime: Callable
    A_double_prime_min: float
    name: str = "custom"
    A_double_prime: Callable | None = None
    G: Callable | None = None

    def __post_init__(self):
        if self.A_double_prime_min < 0:
            raise DomainError("flux must be convex (A_double_prime_min >= 0)")


def burgers_flux() -> FluxSpec:
    return FluxSpec(
        A=lambda u: 0.5 * np.square(u),
        A_prime=lambda u: np.asarray(u, dtype=float) * 1.0,
        A_double_prime=lambda u: np.ones_like(np.asarray(u, dtype=float)),
        A_double_prime_min=1.0,
        G=lambda u: np.asarray(u, dtype=float) ** 3 / 3.0,
        name="burgers",
    )


def power_flux(p: int) -> FluxSpec:
    """A(u) = u^p for even p >= 2; convex but degenerate at 0 when p > 2."""
    if p < 2 or p % 2:
        raise DomainError("power flux needs an even exponent >= 2")
    return FluxSpec(
        A=lambda u: np.asarray(u, dtype=float) ** p,
        A_prime=lambda u: p * np.asarray(u, dtype=float) ** (p - 1),
        A_double_prime=lambda u: p * (p - 1) * np.asarray(u, dtype=float) ** (p - 2),
        A_double_prime_min=2.0 if p == 2 else 0.0,
        name=f"power{p}",
    )


BURGERS = burgers_flux()


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float
    t_end: float
    alpha: float
    cfl: float = 0.25
    reconstruction: str = "minmod_second_order"
    scheme: str = "ssp_rk2"
    flux: FluxSpec = field(default=BURGERS, compare=False)
    frame_speed: float = 0.0
    cg_rtol: float = 1e-12
    max_steps: int = 10_000_000

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ConfigurationError("epsilon must be non-negative")
        if not (0 < self.cfl <= 1):
            raise ConfigurationError("cfl must lie in (0, 1]")
        if not self.t_end >= 0:
            raise ConfigurationError("t_end must be non-negative")
        if not (1 < self.alpha < 2):
            raise ConfigurationError("alpha must lie in (1, 2)")
        if self.reconstruction not in RECONSTRUCTIONS:
            raise ConfigurationError(f"unknown reconstruction {self.reconstruction!r}")
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"unknown scheme {self.scheme!r}")

    @property
    def beta(self) -> float:
        return 1.0 / (self.alpha - 1.0)


@dataclass(frozen=True)
class State:
    t: float
    u: np.ndarray
    grid: Grid1D


def _minmod(a, b):
    return np.where(a * b > 0.0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def _interface_fluxes(u, op: FracLapOperator, config: SolverConfig):
    ff = op.farfield
    ue = np.concatenate(([ff.u_left, ff.u_left], u, [ff.u_right, ff.u_right]))
    if config.reconstruction == "minmod_second_order":
        d = np.diff(ue)
        s = _minmod(d[:-1], d[1:])
        uL = ue[1:-2] + 0.5 * s[:-1]
        uR = ue[2:-1] - 0.5 * s[1:]
    else:
        uL = ue[1:-2]
        uR = ue[2:-1]
    flux = config.flux
    c = config.frame_speed
    speed = np.maximum(np.abs(flux.A_prime(uL) - c), np.abs(flux.A_prime(uR) - c))
    return 0.5 * (flux.A(uL) + flux.A(uR) - c * (uL + uR)) - 0.5 * speed * (uR - uL)


def advection_rhs(u, op: FracLapOperator, config: SolverConfig) -> np.ndarray:
    F = _interface_fluxes(u, op, config)
    return -(F[1:] - F[:-1]) / op.grid.h


def rhs(u, op: FracLapOperator, config: SolverConfig) -> np.ndarray:
    """Full semi-discrete right-hand side du/dt."""
    out = advection_rhs(u, op, config)
    if config.epsilon:
        out = out + config.epsilon * op.apply(u)
    return out


def boundary_mass_rate(u, op: FracLapOperator, config: SolverConfig) -> float:
    """d/dt of h * sum(u): net advective inflow plus nonlocal exchange with the far field."""
    F = _interface_fluxes(u, op, config)
    h = op.grid.h
    nonlocal_part = h * float(np.sum(op.tail_diag * u + op.tail_const))
    return float(F[0] - F[-1]) + config.epsilon * nonlocal_part


def stable_timestep(state: State, config: SolverConfig, op: FracLapOperator) -> float:
    """cfl * min(h / max|A'(u)|, h^alpha / (eps K_alpha))."""
    h = state.grid.h
    ff = op.farfield
    speeds = np.abs(config.flux.A_prime(np.concatenate((state.u, [ff.u_left, ff.u_right]))) - config.frame_speed)
    smax = max(float(np.max(speeds)), _SPEED_FLOOR)
    dt = h / smax
    if config.epsilon > 0:
        dt = min(dt, h**config.alpha / (config.epsilon * op.row_bound))
    return config.cfl * dt


def _check_finite(u, t, n):
    if not np.all(np.isfinite(u)):
        raise IntegrationError(f"non-finite values after step {n} at t={t:.6g}", t=t, step=n)


def _cg_solve(op, config, dt_coef, b, x0):
    """Solve (I - dt_coef * eps * M) x = b, M the homogeneous operator matrix."""
    n = op.N
    a = dt_coef * config.epsilon
    lin = LinearOperator((n, n), matvec=lambda v: v - a * op.apply_homogeneous(v), dtype=float)
    x, info = cg(lin, b, x0=x0, rtol=config.cg_rtol, atol=0.0, maxiter=10 * n)
    if info != 0:
        raise IntegrationError(f"conjugate gradients did not converge (info={info})")
    return x


def _stages(u, op, config, dt):
    """Return (u_new, [U1, U2]) where the explicit part is evaluated at U1 and U2."""
    if config.scheme == "ssp_rk2":
        k1 = rhs(u, op, config)
        u2 = u + dt * k1
        k2 = rhs(u2, op, config)
        return u + 0.5 * dt * (k1 + k2), [u, u2]

    g = 1.0 - 1.0 / np.sqrt(2.0)
    eps = config.epsilon
    src = eps * op.tail_const

    def implicit(v):
        return eps * op.apply_homogeneous(v) + src

    U1 = _cg_solve(op, config, g * dt, u + g * dt * src, u)
    E1, I1 = advection_rhs(U1, op, config), implicit(U1)
    U2 = _cg_solve(op, config, g * dt, u + dt * E1 + (1 - 2 * g) * dt * I1 + g * dt * src, U1)
    E2, I2 = advection_rhs(U2, op, config), implicit(U2)
    return u + 0.5 * dt * (E1 + E2 + I1 + I2), [U1, U2]


def step(state: State, config: SolverConfig, op: FracLapOperator, dt: float | None = None,
         return_stages: bool = False):
    """Advance one time step; ``dt`` defaults to :func:`stable_timestep`."""
    if dt is None:
        dt = stable_timestep(state, config, op)
    u_new, stages = _stages(state.u, op, config, dt)
    _check_finite(u_new, state.t + dt, -1)
    new = State(t=state.t + dt, u=u_new, grid=state.grid)
    if return_stages:
        return new, stages
    return new


def positive_slope_l2(state: State) -> float:
    """Discrete || (u_x)_+ ||_{L^2} over interior cell pairs."""
    h = state.grid.h
    s = np.maximum(np.diff(state.u) / h, 0.0)
    return float(np.sqrt(np.sum(s * s) * h))


def max_norm(state: State, farfield: FarField | None = None) -> float:
    """sup |u| on the grid; with ``farfield`` also over the exterior, where u equals the far-field states."""
    m = float(np.max(np.abs(state.u)))
    if farfield is not None:
        m = max(m, abs(farfield.u_left), abs(farfield.u_right))
    return m


def mass(state: State) -> float:
    return float(np.sum(state.u) * state.grid.h)


DEFAULT_MONITORS: Mapping[str, Callable[[State], float]] = {
    "max_norm": max_norm,
    "positive_slope_l2": positive_slope_l2,
    "mass": mass,
}


def solve(u0, config: SolverConfig, op: FracLapOperator, observers: Mapping | None = None,
          callback: Callable | None = None):
    """Integrate from t = 0 to ``config.t_end``.

    ``observers`` maps names to callables ``f(state) -> float`` evaluated at the
    initial state and after each accepted step.  ``callback(state, stages, dt)``
    is invoked after each step.  Returns ``(final_state, series)`` where
    ``series`` holds a ``"t"`` array plus one array per observer.
    """
    grid = op.grid
    if observers is None:
        observers = dict(DEFAULT_MONITORS, max_norm=lambda st: max_norm(st, op.farfield))
    observers = dict(observers)
    state = State(t=0.0, u=np.array(u0, dtype=float), grid=grid)
    if state.u.shape != (grid.N,):
        raise DomainError("initial datum has the wrong length")
    series = {"t": [0.0], **{k: [f(state)] for k, f in observers.items()}}
    n = 0
    while state.t < config.t_end * (1 - 1e-14):
        if n >= config.max_steps:
            raise IntegrationError(f"max_steps={config.max_steps} reached at t={state.t:.6g}", t=state.t, step=n)
        dt = min(stable_timestep(state, config, op), config.t_end - state.t)
        u_new, stages = _stages(state.u, op, config, dt)
        n += 1
        _check_finite(u_new, state.t + dt, n)
        state = State(t=state.t + dt, u=u_new, grid=grid)
        if callback is not None:
            callback(state, stages, dt)
        series["t"].append(state.t)
        for k, f in observers.items():
            series[k].append(f(state))
    return state, {k: np.asarray(v) for k, v in series.items()}
