"""Weighted relative entropy, its time-derivative decomposition, and rate measurements.

All spatial quantities are evaluated on the solver grid y_i.  With the shift X,
the co-moving coordinate is x = y - X, so v(x) = u(y) needs no interpolation
and only the smooth profile is evaluated off-grid:

    H   = h sum W(y - X) eta(u | S_eps(y - X)),       W(x) = phi^2(|x| / (delta eps^beta))
    H1  = int W d/dx (eta(v|S) X' - F(v, S)) dx       (integrated by parts)
    H2  = int W S_eps' ((v - S) X' - A(v|S)) dx
    P   = eps h sum W w (D w),                        w = v - S_eps

P splits exactly into a square term  eps h sum g (D g),  g = phi w  (never
positive), and a commutator term carrying the difference.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import stats

from .entropy import EntropyPair, normalized_flux, relative_entropy, relative_flux
from .errors import ConfigurationError, DomainError
from .fractional_operator import FracLapOperator, Grid1D
from .profiles import InviscidShock, ViscousProfile, evaluate_scaled, evaluate_scaled_derivative, tail_gap
from .solver import FluxSpec

__all__ = [
    "CutoffFamily",
    "cutoff_eval",
    "cutoff_derivative",
    "weighted_relative_entropy",
    "Decomposition",
    "decompose_dHdt",
    "entropy_snapshot",
    "EntropyLedger",
    "bound_check_h1",
    "bound_check_h2",
    "bound_check_p",
    "p_delta_slope",
    "E_parts",
    "E_value",
    "psi_value",
    "default_delta_grid",
    "shifted_l2_distance",
    "RateFit",
    "rate_fit",
    "RateReport",
    "theorem_constant",
    "LEDGER_COLUMNS",
]

SHAPES = ("piecewise_quadratic", "generic_smooth", "custom")
LEDGER_COLUMNS = ("t", "H", "H1", "H2", "P", "dH_fd", "X", "Xdot", "dist")


def _phi_quadratic(x):
    x = np.clip(x, 0.0, 1.0)
    return np.where(x <= 0.5, 2.0 * x * x, 1.0 - 2.0 * (x - 1.0) ** 2)


def _dphi_quadratic(x):
    return np.where((x > 0) & (x < 1), np.where(x <= 0.5, 4.0 * x, 4.0 * (1.0 - x)), 0.0)


def _phi_smooth(x):
    x = np.clip(x, 0.0, 1.0)
    return x**3 * (10.0 - 15.0 * x + 6.0 * x * x)


def _dphi_smooth(x):
    return np.where((x > 0) & (x < 1), 30.0 * x * x * (1.0 - x) ** 2, 0.0)


@dataclass(frozen=True)
class CutoffFamily:
    """phi_delta(x) = phi(x / delta) for a monotone ramp phi from 0 (x <= 0) to 1 (x >= 1).

    ``generic_smooth`` is the C^2 smoothstep 10x^3 - 15x^4 + 6x^5.  A ``custom``
    shape takes ``phi`` (and optionally ``dphi``) callables.
    """

    delta: float
    shape: str = "piecewise_quadratic"
    phi: Callable | None = field(default=None, compare=False)
    dphi: Callable | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.delta > 0:
            raise DomainError("cutoff width delta must be positive")
        if self.shape not in SHAPES:
            raise ConfigurationError(f"unknown cutoff shape {self.shape!r}")
        if (self.shape == "custom") != (self.phi is not None):
            raise ConfigurationError("a custom cutoff needs phi, and only a custom cutoff takes one")

    def base(self, x):
        x = np.asarray(x, dtype=float)
        if self.shape == "piecewise_quadratic":
            return _phi_quadratic(x)
        if self.shape == "generic_smooth":
            return _phi_smooth(x)
        return np.asarray(self.phi(x), dtype=float)

    def base_derivative(self, x):
        x = np.asarray(x, dtype=float)
        if self.shape == "piecewise_quadratic":
            return _dphi_quadratic(x)
        if self.shape == "generic_smooth":
            return _dphi_smooth(x)
        if self.dphi is not None:
            return np.asarray(self.dphi(x), dtype=float)
        d = 1e-6
        return (self.base(x + d) - self.base(x - d)) / (2 * d)


def cutoff_eval(family: CutoffFamily, x):
    return family.base(np.asarray(x, dtype=float) / family.delta)


def cutoff_derivative(family: CutoffFamily, x):
    return family.base_derivative(np.asarray(x, dtype=float) / family.delta) / family.delta


def _frame(u, X, profile, epsilon, grid, family):
    """Co-moving coordinates and the fields every diagnostic needs."""
    u = np.asarray(u, dtype=float)
    x = grid.x - X
    scale = family.delta * epsilon**profile.beta
    r = np.abs(x) / scale
    phi = family.base(r)
    S = evaluate_scaled(profile, epsilon, x)
    return u, x, scale, r, phi, S


def weighted_relative_entropy(u, X, profile: ViscousProfile, epsilon: float, family: CutoffFamily,
                              grid: Grid1D) -> float:
    """H = int phi_delta^2(|x| / eps^beta) eta(u(x + X) | S_eps(x)) dx, midpoint rule in y = x + X."""
    u, x, scale, r, phi, S = _frame(u, X, profile, epsilon, grid, family)
    return float(grid.h * np.sum(phi * phi * relative_entropy(u, S)))


class Decomposition(NamedTuple):
    H1: float
    H2: float
    P: float


@dataclass(frozen=True)
class Snapshot:
    H: float
    H1: float
    H2: float
    P: float
    P_square: float

    @property
    def P_commutator(self) -> float:
        return self.P - self.P_square


def entropy_snapshot(u, X, Xdot, profile: ViscousProfile, epsilon: float, family: CutoffFamily,
                     flux: FluxSpec, pair: EntropyPair, op: FracLapOperator) -> Snapshot:
    grid = op.grid
    h = grid.h
    u, x, scale, r, phi, S = _frame(u, X, profile, epsilon, grid, family)
    W = phi * phi
    w = u - S
    eta = relative_entropy(u, S)
    H = h * np.sum(W * eta)

    # H1 = [W Q] - int W' Q,  Q = eta(v|S) X' - F(v, S),  F = eta * f
    Q = eta * (Xdot - normalized_flux(flux, pair, u, S))
    dW = 2.0 * phi * family.base_derivative(r) * np.sign(x) / scale
    H1 = W[-1] * Q[-1] - W[0] * Q[0] - h * np.sum(dW * Q)

    dS = evaluate_scaled_derivative(profile, epsilon, x)
    H2 = h * np.sum(W * dS * (w * Xdot - relative_flux(flux, u, S)))

    Dw = op.apply_homogeneous(w)
    P = epsilon * h * np.sum(W * w * Dw)
    g = phi * w
    P_square = epsilon * h * np.sum(g * op.apply_homogeneous(g))
    return Snapshot(float(H), float(H1), float(H2), float(P), float(P_square))


def decompose_dHdt(u, X, Xdot, profile: ViscousProfile, epsilon: float, family: CutoffFamily,
                   flux: FluxSpec, pair: EntropyPair, op: FracLapOperator) -> Decomposition:
    """(H1, H2, P) for one snapshot of the field and shift."""
    s = entropy_snapshot(u, X, Xdot, profile, epsilon, family, flux, pair, op)
    return Decomposition(s.H1, s.H2, s.P)


def _central_difference(t, H):
    """dH/dt at interior samples by the three-point formula for non-uniform steps; NaN at the ends."""
    t = np.asarray(t, dtype=float)
    H = np.asarray(H, dtype=float)
    out = np.full_like(H, np.nan)
    if len(t) >= 3:
        h0 = t[1:-1] - t[:-2]
        h1 = t[2:] - t[1:-1]
        out[1:-1] = (-h1 / (h0 * (h0 + h1)) * H[:-2] + (h1 - h0) / (h0 * h1) * H[1:-1]
                     + h0 / (h1 * (h0 + h1)) * H[2:])
    return out


@dataclass
class EntropyLedger:
    """Time series of H and its decomposition along one run."""

    t: list = field(default_factory=list)
    H: list = field(default_factory=list)
    H1: list = field(default_factory=list)
    H2: list = field(default_factory=list)
    P: list = field(default_factory=list)
    P_square: list = field(default_factory=list)
    X: list = field(default_factory=list)
    Xdot: list = field(default_factory=list)
    dist: list = field(default_factory=list)

    def append(self, t, snap: Snapshot, X, Xdot, dist):
        self.t.append(t)
        self.H.append(snap.H)
        self.H1.append(snap.H1)
        self.H2.append(snap.H2)
        self.P.append(snap.P)
        self.P_square.append(snap.P_square)
        self.X.append(X)
        self.Xdot.append(Xdot)
        self.dist.append(dist)

    def __len__(self):
        return len(self.t)

    def array(self, name) -> np.ndarray:
        if name == "dH_fd":
            return _central_difference(self.t, self.H)
        return np.asarray(getattr(self, name), dtype=float)

    def consistency_excess(self, rel: float = 0.05, abs_tol: float = 1e-10) -> np.ndarray:
        """|FD(H) - (H1+H2+P)| - (rel (|H1|+|H2|+|P|) + abs_tol) at interior samples; <= 0 is consistent."""
        H1, H2, P = self.array("H1"), self.array("H2"), self.array("P")
        mismatch = np.abs(self.array("dH_fd") - (H1 + H2 + P))
        return (mismatch - (rel * (np.abs(H1) + np.abs(H2) + np.abs(P)) + abs_tol))[1:-1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(LEDGER_COLUMNS)
        cols = [self.array(c) for c in LEDGER_COLUMNS]
        for row in zip(*cols):
            wr.writerow(["%.17g" % v for v in row])
        return buf.getvalue()


def bound_check_h1(ledger: EntropyLedger, delta: float, epsilon: float, beta: float) -> float:
    """max_t H1 / sqrt(delta eps^beta)."""
    return float(np.max(ledger.array("H1")) / np.sqrt(delta * epsilon**beta))


def bound_check_h2(ledger: EntropyLedger, delta: float, profile: ViscousProfile, family: CutoffFamily) -> float:
    """max_t H2 / (delta^-3/2 + tail_gap(delta)); only meaningful for the piecewise quadratic cutoff."""
    if family.shape != "piecewise_quadratic":
        raise ConfigurationError("the H2 bound needs the piecewise quadratic cutoff")
    return float(np.max(ledger.array("H2")) / (delta**-1.5 + tail_gap(profile, delta)))


def bound_check_p(ledger: EntropyLedger, delta: float, alpha: float) -> float:
    """max_t P / delta^-(alpha - 1)."""
    if not delta > 0:
        raise DomainError("delta must be positive")
    return float(np.max(ledger.array("P")) / delta ** (1.0 - alpha))


def E_parts(epsilon: float, delta: float, profile: ViscousProfile, alpha: float | None = None,
            beta: float | None = None) -> dict:
    alpha = profile.alpha if alpha is None else alpha
    beta = 1.0 / (alpha - 1.0) if beta is None else beta
    if delta < 4:
        raise DomainError("E is defined for delta >= 4")
    return {
        "layer": float(np.sqrt(delta * epsilon**beta)),
        "tail_gap": tail_gap(profile, delta),
        "nonlocal": float(delta ** (1.0 - alpha)),
    }


def E_value(epsilon: float, delta: float, profile: ViscousProfile, alpha: float | None = None,
            beta: float | None = None) -> float:
    """sqrt(delta eps^beta) + tail_gap(delta) + delta^-(alpha - 1)."""
    return float(sum(E_parts(epsilon, delta, profile, alpha, beta).values()))


def default_delta_grid(profile: ViscousProfile, n: int = 200, upper: float = 1e6) -> np.ndarray:
    """Log grid on [4, min(upper, (xi_max / 2)^2)] so tail gaps come from samples."""
    top = min(upper, (0.5 * profile.xi_max) ** 2)
    if top <= 4:
        raise DomainError("profile too short for a delta grid above 4")
    return np.geomspace(4.0, top, n)


def psi_value(epsilon: float, profile: ViscousProfile, alpha: float | None = None, beta: float | None = None,
              delta_grid: Sequence[float] | None = None) -> tuple[float, float]:
    """min over the grid of sqrt(delta eps^beta + E(eps, delta)), plus eps^(beta/2); also the argmin."""
    alpha = profile.alpha if alpha is None else alpha
    beta = 1.0 / (alpha - 1.0) if beta is None else beta
    d = default_delta_grid(profile) if delta_grid is None else np.asarray(delta_grid, dtype=float)
    if len(d) < 40 or np.any(d < 4):
        raise DomainError("delta grid needs at least 40 points, all >= 4")
    de = d * epsilon**beta
    vals = np.sqrt(de + np.sqrt(de) + tail_gap(profile, d) + d ** (1.0 - alpha))
    k = int(np.argmin(vals))
    return float(vals[k] + epsilon ** (0.5 * beta)), float(d[k])


def shifted_l2_distance(u, X: float, shock: InviscidShock, t: float, grid: Grid1D) -> float:
    """|| u(. + X) - S0(. - sigma t) ||_2 for piecewise-constant u; the cell holding the jump is split exactly."""
    u = np.asarray(u, dtype=float)
    e = grid.edges
    jump = shock.sigma * t + X  # position of the jump in grid coordinates
    left = e[1:] <= jump
    right = e[:-1] >= jump
    total = grid.h * (np.sum((u[left] - shock.u_minus) ** 2) + np.sum((u[right] - shock.u_plus) ** 2))
    mid = ~(left | right)
    if np.any(mid):
        i = int(np.flatnonzero(mid)[0])
        total += (u[i] - shock.u_minus) ** 2 * (jump - e[i]) + (u[i] - shock.u_plus) ** 2 * (e[i + 1] - jump)
    return float(np.sqrt(total))


@dataclass(frozen=True)
class RateFit:
    slope: float | None
    intercept: float | None
    stderr: float | None
    ci95: tuple | None
    residual_rms: float | None
    status: str

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def rate_fit(epsilons: Sequence[float], values: Sequence[float], min_points: int = 4,
             min_decades: float = 1.0) -> RateFit:
    """Least-squares slope of log(value) against log(eps)."""
    e = np.asarray(epsilons, dtype=float)
    v = np.asarray(values, dtype=float)
    if e.shape != v.shape or len(e) < min_points:
        raise ConfigurationError(f"need at least {min_points} paired points")
    if np.log10(e.max() / e.min()) < min_decades - 1e-12:
        raise ConfigurationError(f"epsilon grid must span at least {min_decades} decade(s)")
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        return RateFit(None, None, None, None, None, "below measurement floor")
    order = np.argsort(e)
    le, lv = np.log(e[order]), np.log(v[order])
    res = stats.linregress(le, lv)
    q = stats.t.ppf(0.975, len(e) - 2) * res.stderr if len(e) > 2 else np.inf
    resid = lv - (res.intercept + res.slope * le)
    return RateFit(float(res.slope), float(res.intercept), float(res.stderr),
                   (float(res.slope - q), float(res.slope + q)), float(np.sqrt(np.mean(resid**2))), "ok")


def p_delta_slope(deltas: Sequence[float], p_max: Sequence[float]) -> RateFit:
    """Slope of log max_t P_+ against log delta; ``below measurement floor`` when P_+ vanishes."""
    p = np.maximum(np.asarray(p_max, dtype=float), 0.0)
    return rate_fit(deltas, p, min_points=3, min_decades=0.0)


def theorem_constant(runs: Sequence[tuple[np.ndarray, float]]) -> float:
    """Smallest C with dist(t) <= dist(0) + C psi(eps) for every (dist series, psi) pair."""
    c = 0.0
    for dist, psi in runs:
        dist = np.asarray(dist, dtype=float)
        c = max(c, float(np.max(dist - dist[0])) / psi)
    return c


@dataclass
class RateReport:
    """Per-epsilon summary of an epsilon sweep."""

    alpha: float
    epsilons: list
    sup_dist: list
    dist0: list
    excess: list
    psi: list
    delta_star: list
    E: list
    C: float | None = None
    C_flagged: bool = False
    fits: dict = field(default_factory=dict)
    incomplete: bool = False
    run_ids: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)
