"""Experiment driver: coupled field/shift/diagnostics runs, sweeps, checks, and persistence.

A run couples the finite-volume solver, the shift ODE (advanced on the same
RK stages), and the entropy diagnostics evaluated after every accepted step.
Results are written under ``<out>/runs/<id>/`` where ``id`` is a hash of the
configuration and epsilon, so identical inputs land in the same place and
produce the same bytes.
"""

from __future__ import annotations

import json
import platform
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .diagnostics import (
    CutoffFamily,
    EntropyLedger,
    E_parts,
    bound_check_h1,
    bound_check_h2,
    bound_check_p,
    entropy_snapshot,
    psi_value,
    rate_fit,
    RateReport,
    shifted_l2_distance,
    theorem_constant,
)
from .entropy import entropy_pair, estimate_lambda
from .errors import ConfigurationError, FractalBurgersWarning, IntegrationError
from .fractional_operator import FarField, Grid1D, build_operator, dirichlet_form_positive_part
from .profiles import (
    ViscousProfile,
    compute_profile,
    evaluate_scaled,
    load_profile,
    profile_residual,
    save_profile,
)
from .shift import ShiftState, advance, shift_rhs, speed_bound
from .solver import SolverConfig, State, _stages, boundary_mass_rate, max_norm, mass, positive_slope_l2, stable_timestep
from . import svgplot

__all__ = [
    "initial_datum",
    "perturbation",
    "RunResult",
    "run_coupled",
    "get_profile",
    "cmd_profile",
    "cmd_solve",
    "cmd_sweep",
    "cmd_check",
    "cmd_rate",
    "psi_for",
]

MONITOR_COLUMNS = ("t", "max_norm", "positive_slope_l2", "mass", "mass_rate")
SHIFT_COLUMNS = ("t", "X", "Xdot")


def perturbation(x, spec) -> np.ndarray:
    """Sum of Gaussian bumps scaled to L2 norm ``spec.amplitude`` on the grid x."""
    rng = np.random.default_rng(spec.seed)
    lo, hi = spec.region
    n = spec.n_bumps
    side = np.where(np.arange(n) % 2 == 0, -1.0, 1.0)
    centres = side * rng.uniform(lo, hi, n)
    signs = rng.choice([-1.0, 1.0], n)
    p = np.sum(signs[:, None] * np.exp(-0.5 * ((x[None, :] - centres[:, None]) / spec.width) ** 2), axis=0)
    h = x[1] - x[0]
    norm = np.sqrt(np.sum(p * p) * h)
    return p * (spec.amplitude / norm) if norm > 0 else p


def initial_datum(config: ExperimentConfig, epsilon: float, grid: Grid1D, profile: ViscousProfile) -> np.ndarray:
    x = grid.x
    spec = config.initial
    if spec.kind == "layer":
        return np.asarray(evaluate_scaled(profile, epsilon, x), dtype=float)
    step = np.where(x < 0, config.u_minus, config.u_plus)
    if spec.kind == "step":
        return step
    return step + perturbation(x, spec)


def get_profile(config: ExperimentConfig, cache_dir: Path | None = None) -> ViscousProfile:
    """Compute the layer for ``config`` or load it from ``cache_dir`` when already stored."""
    if cache_dir is not None:
        base = Path(cache_dir) / f"profile_{config.profile_key()}"
        if base.with_suffix(".csv").exists() and base.with_suffix(".json").exists():
            return load_profile(base)
    p = config.profile
    prof = compute_profile(config.alpha, config.flux_spec, config.u_minus, config.u_plus, tol=p.tol,
                           xi_max=p.xi_max, n_cells=p.n_cells, cfl=p.cfl, max_iter=p.max_iter)
    if cache_dir is not None:
        save_profile(prof, base)
    return prof


def psi_for(config: ExperimentConfig, epsilon: float, profile: ViscousProfile):
    g = config.delta_grid
    hi = min(g.hi, (0.5 * profile.xi_max) ** 2)
    return psi_value(epsilon, profile, config.alpha, config.beta, np.geomspace(g.lo, hi, g.n))


@dataclass
class RunResult:
    epsilon: float
    ledger: EntropyLedger
    monitors: dict
    steps: int
    wall_time: float
    complete: bool = True
    error: str | None = None
    final_u: np.ndarray | None = field(default=None, repr=False)

    def series(self, name) -> np.ndarray:
        if name in self.monitors:
            return np.asarray(self.monitors[name], dtype=float)
        return self.ledger.array(name)


def _solver_config(config: ExperimentConfig, epsilon: float) -> SolverConfig:
    s = config.solver
    return SolverConfig(epsilon=epsilon, t_end=config.T, alpha=config.alpha, cfl=s.cfl,
                        reconstruction=s.reconstruction, scheme=s.scheme, flux=config.flux_spec,
                        cg_rtol=s.cg_rtol, max_steps=s.max_steps)


def run_coupled(config: ExperimentConfig, epsilon: float, profile: ViscousProfile,
                family: CutoffFamily | None = None, u0=None, record=None) -> RunResult:
    """Integrate field and shift to T, evaluating the entropy ledger and monitors at every step.

    Numerical failures end the run early; the partial series are returned
    with ``complete=False`` and the error message.
    """
    t_start = time.perf_counter()
    grid = Grid1D(config.grid.L, config.grid.N)
    op = build_operator(grid, config.alpha, FarField(config.u_minus, config.u_plus))
    flux = config.flux_spec
    pair = entropy_pair(flux)
    scfg = _solver_config(config, epsilon)
    family = CutoffFamily(config.delta, config.cutoff) if family is None else family
    shock = profile.shock
    u = initial_datum(config, epsilon, grid, profile) if u0 is None else np.array(u0, dtype=float)

    def xdot(v, X):
        return shift_rhs(v, X, profile, epsilon, flux, pair, grid)

    ledger = EntropyLedger()
    monitors = {k: [] for k in MONITOR_COLUMNS}
    margin = _perturbation_reach(config)

    def observe(t, u, X):
        Xd = xdot(u, X)
        snap = entropy_snapshot(u, X, Xd, profile, epsilon, family, flux, pair, op)
        ledger.append(t, snap, X, Xd, shifted_l2_distance(u, X, shock, t, grid))
        st = State(t, u, grid)
        for k, v in (("t", t), ("max_norm", max_norm(st, op.farfield)), ("positive_slope_l2", positive_slope_l2(st)),
                     ("mass", mass(st)), ("mass_rate", boundary_mass_rate(u, op, scfg))):
            monitors[k].append(v)
        if record is not None:
            record(t, u, X)
        if abs(X) + margin > 0.75 * grid.L:
            warnings.warn(f"shift plus perturbation reach {abs(X) + margin:.3g} is within L/4 of the boundary",
                          FractalBurgersWarning, stacklevel=3)

    shift = ShiftState()
    t, n = 0.0, 0
    error = None
    try:
        observe(t, u, shift.X)
        while t < config.T * (1 - 1e-14):
            if n >= scfg.max_steps:
                raise IntegrationError(f"max_steps reached at t={t:.6g}", t=t, step=n)
            dt = min(stable_timestep(State(t, u, grid), scfg, op), config.T - t)
            u_new, stages = _stages(u, op, scfg, dt)
            if not np.all(np.isfinite(u_new)):
                raise IntegrationError(f"non-finite values at step {n + 1}, t={t + dt:.6g}", t=t + dt, step=n + 1)
            shift = advance(shift, stages, dt, xdot)
            u, t, n = u_new, t + dt, n + 1
            observe(t, u, shift.X)
    except Exception as exc:  # partial results are kept and flagged
        error = f"{type(exc).__name__}: {exc}"
    return RunResult(epsilon=epsilon, ledger=ledger, monitors=monitors, steps=n,
                     wall_time=time.perf_counter() - t_start, complete=error is None, error=error, final_u=u)


def _perturbation_reach(config: ExperimentConfig) -> float:
    if config.initial.kind != "step_plus_perturbation":
        return 0.0
    return config.initial.region[1] + 3.0 * config.initial.width


# --------------------------------------------------------------------------- persistence

def _write_csv(path: Path, columns, arrays):
    arrays = [np.asarray(a, dtype=float) for a in arrays]
    lines = [",".join(columns)]
    lines += [",".join("%.17g" % v for v in row) for row in zip(*arrays)]
    path.write_text("\n".join(lines) + "\n")


def _run_dir(out: Path, config: ExperimentConfig, epsilon: float) -> Path:
    d = Path(out) / "runs" / config.run_id(epsilon)
    (d / "plots").mkdir(parents=True, exist_ok=True)
    return d


def _run_report(config, epsilon, result: RunResult, profile) -> dict:
    dist = result.ledger.array("dist")
    psi, dstar = psi_for(config, epsilon, profile)
    tol = config.tolerances
    delta = config.delta
    rep = {
        "epsilon": epsilon,
        "complete": result.complete,
        "error": result.error,
        "steps": result.steps,
        "t_final": float(result.ledger.t[-1]) if len(result.ledger) else 0.0,
        "dist0": float(dist[0]) if len(dist) else None,
        "sup_dist": float(np.max(dist)) if len(dist) else None,
        "psi": psi,
        "delta_star": dstar,
        "E": E_parts(epsilon, dstar, profile, config.alpha, config.beta),
        "max_norm_increase": _max_increase(result.series("max_norm")),
        "slope_monitor_increase": _max_increase(result.series("positive_slope_l2")),
        "max_square_term": float(np.max(result.ledger.array("P_square"))) if len(dist) else None,
    }
    if len(dist) >= 3:
        exc = result.ledger.consistency_excess(tol.ledger_rel, tol.ledger_abs)
        rep["ledger_max_excess"] = float(np.max(exc))
        rep["ledger_consistent"] = bool(np.all(exc <= 0))
    if len(dist):
        rep["h1_ratio"] = bound_check_h1(result.ledger, delta, epsilon, config.beta)
        rep["p_ratio"] = bound_check_p(result.ledger, delta, config.alpha)
        rep["p_max"] = float(np.max(result.ledger.array("P")))
        if config.cutoff == "piecewise_quadratic" and delta >= 4:
            rep["h2_ratio"] = bound_check_h2(result.ledger, delta, profile, CutoffFamily(delta, config.cutoff))
    return rep


def _max_increase(series) -> float:
    s = np.asarray(series, dtype=float)
    return float(np.max(np.diff(s))) if len(s) > 1 else 0.0


def _persist_run(out, config, epsilon, result: RunResult, profile) -> dict:
    d = _run_dir(out, config, epsilon)
    (d / "config.json").write_text(config.to_json() + "\n")
    led = result.ledger
    (d / "ledger.csv").write_text(led.to_csv())
    _write_csv(d / "shift.csv", SHIFT_COLUMNS, [led.t, led.X, led.Xdot])
    _write_csv(d / "monitors.csv", MONITOR_COLUMNS, [result.monitors[k] for k in MONITOR_COLUMNS])
    rep = _run_report(config, epsilon, result, profile)
    rep.update({"run_id": config.run_id(epsilon), "software_version": __version__,
                "python": platform.python_version()})
    (d / "report.json").write_text(json.dumps(rep, indent=2, sort_keys=True) + "\n")
    t = led.array("t")
    if len(t) > 1:
        svgplot.write(d / "plots" / "entropy.svg", t, {k: led.array(k) for k in ("H1", "H2", "P", "dH_fd")},
                      title=f"dH/dt decomposition, eps={epsilon:g}")
        svgplot.write(d / "plots" / "distance.svg", t, {"dist": led.array("dist"), "H": led.array("H")},
                      title=f"shifted distance, eps={epsilon:g}")
        svgplot.write(d / "plots" / "shift.svg", t, {"X": led.array("X")}, title="shift")
    # wall time is kept out of the deterministic files
    (d / "timing.json").write_text(json.dumps({"wall_time": result.wall_time}) + "\n")
    return rep


# --------------------------------------------------------------------------- commands

def cmd_profile(config: ExperimentConfig, out) -> ViscousProfile:
    """Compute (or reuse) the layer and store it as CSV + JSON under ``out``."""
    prof = get_profile(config, Path(out))
    base = Path(out) / f"profile_{config.profile_key()}"
    meta = json.loads(base.with_suffix(".json").read_text())
    meta["max_slope"] = prof.max_slope()
    meta["residual_inner_half"] = profile_residual(prof, config.flux_spec)
    base.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True))
    return prof


def cmd_solve(config: ExperimentConfig, epsilon: float, out, profile: ViscousProfile | None = None) -> dict:
    """One coupled run persisted under ``out/runs/<id>``; returns its report."""
    profile = get_profile(config, Path(out)) if profile is None else profile
    result = run_coupled(config, epsilon, profile)
    return _persist_run(out, config, epsilon, result, profile)


def _sweep_worker(args):
    config_dict, epsilon, out, profile_base = args
    config = ExperimentConfig.from_dict(config_dict)
    profile = load_profile(profile_base)
    return cmd_solve(config, epsilon, out, profile)


def cmd_sweep(config: ExperimentConfig, out, workers: int = 1) -> RateReport:
    """Run every epsilon, aggregate sorted by epsilon, fit rates and the global constant C."""
    if len(config.epsilons) < 4:
        raise ConfigurationError(f"a sweep needs at least 4 epsilons, got {len(config.epsilons)}")
    out = Path(out)
    profile = get_profile(config, out)
    base = out / f"profile_{config.profile_key()}"
    eps_sorted = sorted(config.epsilons, reverse=True)
    jobs = [(config.to_dict(), e, str(out), str(base)) for e in eps_sorted]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_sweep_worker, jobs))
    else:
        reports = [cmd_solve(config, e, out, profile) for e in eps_sorted]
    return _aggregate(config, eps_sorted, reports, profile, out)


def _aggregate(config, eps_sorted, reports, profile, out) -> RateReport:
    runs_dist = []
    for e, rep in zip(eps_sorted, reports):
        led = np.loadtxt(Path(out) / "runs" / rep["run_id"] / "ledger.csv", delimiter=",", skiprows=1, ndmin=2)
        runs_dist.append((led[:, -1], rep["psi"]))
    report = RateReport(
        alpha=config.alpha,
        epsilons=list(eps_sorted),
        sup_dist=[r["sup_dist"] for r in reports],
        dist0=[r["dist0"] for r in reports],
        excess=[r["sup_dist"] - r["dist0"] for r in reports],
        psi=[r["psi"] for r in reports],
        delta_star=[r["delta_star"] for r in reports],
        E=[r["E"] for r in reports],
        incomplete=not all(r["complete"] for r in reports),
        run_ids=[r["run_id"] for r in reports],
    )
    report.C = theorem_constant(runs_dist)
    report.C_flagged = report.C >= config.tolerances.theorem_C_max
    fits = {}
    for name, values in (("sup_dist", report.sup_dist), ("excess", report.excess), ("psi", report.psi)):
        try:
            f = rate_fit(report.epsilons, values)
            fits[name] = f.__dict__ if hasattr(f, "__dict__") else f._asdict()
        except ConfigurationError as exc:
            fits[name] = {"status": str(exc)}
    report.fits = fits
    path = Path(out) / f"sweep_{config.run_id()}.json"
    path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    svgplot.write(Path(out) / f"sweep_{config.run_id()}.svg", np.log10(report.epsilons),
                  {"log10 sup dist": np.log10(np.maximum(report.sup_dist, 1e-300)),
                   "log10 psi": np.log10(report.psi)}, title="rates vs log10 eps")
    return report


def cmd_rate(out, config: ExperimentConfig | None = None) -> dict:
    """Re-fit rates from stored sweep reports under ``out`` (all of them, or the one for ``config``)."""
    out = Path(out)
    paths = [out / f"sweep_{config.run_id()}.json"] if config is not None else sorted(out.glob("sweep_*.json"))
    results = {}
    for p in paths:
        if not p.exists():
            raise ConfigurationError(f"no sweep report at {p}")
        rep = json.loads(p.read_text())
        fits = {}
        for name in ("sup_dist", "excess", "psi"):
            try:
                f = rate_fit(rep["epsilons"], rep[name])
                fits[name] = f.__dict__
            except ConfigurationError as exc:
                fits[name] = {"status": str(exc)}
        results[p.stem] = {"alpha": rep["alpha"], "C": rep["C"], "C_flagged": rep["C_flagged"], "fits": fits}
    return results


@dataclass
class CheckEntry:
    name: str
    passed: bool
    margin: float
    detail: str = ""


def cmd_check(config: ExperimentConfig, out=None, family: CutoffFamily | None = None,
              profile: ViscousProfile | None = None) -> list:
    """Run the invariant suite on a small configuration; returns one entry per invariant.

    The margin is positive when the invariant holds, in the units of its tolerance.
    """
    tol = config.tolerances
    chk = config.check
    entries = []

    def add(name, margin, detail=""):
        entries.append(CheckEntry(name, bool(margin >= 0), float(margin), detail))

    family = CutoffFamily(chk.delta, config.cutoff) if family is None else family

    # cutoff shape: phi(0) = 0, phi(1) = 1, non-decreasing, values in [0, 1]
    s = np.linspace(-0.5, 1.5, 20001)
    ph = family.base(s)
    margin = min(-abs(float(family.base(0.0))), -abs(float(family.base(1.0)) - 1.0),
                 float(np.min(np.diff(ph))), float(np.min(ph)), float(np.min(1.0 - ph)))
    add("cutoff_shape", margin + 1e-14, "phi(0)=0, phi(1)=1, monotone, range [0,1]")

    # genpa negativity on random sign-mixed fields
    rng = np.random.default_rng(0)
    g_grid = Grid1D(8.0, chk.genpa_N)
    gop = build_operator(g_grid, config.alpha, FarField(0.0, 0.0))
    worst = max(dirichlet_form_positive_part(gop, rng.standard_normal(chk.genpa_N)) for _ in range(chk.n_random))
    add("genpa_negativity", tol.genpa - worst, f"max value {worst:.3e}")

    # relative-flux monotonicity bounds
    try:
        lb = estimate_lambda(config.flux_spec, chk.lambda_M, chk.lambda_n)
        add("lambda_bounds", min(lb.min_du - tol.lambda_du_floor, lb.inv_Lambda - tol.lambda_dv_floor),
            f"Lambda={lb.Lambda:.4g}, inv_Lambda={lb.inv_Lambda:.4g}")
    except Exception as exc:
        add("lambda_bounds", -1.0, str(exc))

    # profile monotonicity and residual
    if profile is None:
        profile = get_profile(config, None if out is None else Path(out))
    add("profile_monotone", tol.profile_monotone - profile.max_slope(), f"max slope {profile.max_slope():.3e}")
    res = profile_residual(profile, config.flux_spec)
    add("profile_residual", tol.profile_residual_factor * profile.tol - res, f"residual {res:.3e}")

    # coupled run on the check grid
    eps = chk.layer_width ** (config.alpha - 1.0)
    ccfg = replace(config, grid=replace(config.grid, L=chk.L, N=chk.N), T=chk.T, delta=chk.delta,
                   initial=replace(config.initial, region=(0.1 * chk.L, 0.25 * chk.L), width=0.05 * chk.L))
    result = run_coupled(ccfg, eps, profile, family=family)
    add("run_complete", 0.0 if result.complete else -1.0, result.error or "")
    add("max_principle", tol.max_principle - _max_increase(result.series("max_norm")))
    add("slope_monitor", tol.slope_monitor - _max_increase(result.series("positive_slope_l2")))
    sq = float(np.max(result.ledger.array("P_square"))) if len(result.ledger) else np.inf
    add("square_term_negativity", tol.square_term - sq, f"max square term {sq:.3e}")
    if len(result.ledger) >= 3:
        exc = result.ledger.consistency_excess(tol.ledger_rel, tol.ledger_abs)
        add("ledger_consistency", -float(np.max(exc)), "worst |FD(H) - (H1+H2+P)| over tolerance")
    flux, pair = config.flux_spec, entropy_pair(config.flux_spec)
    M = max(abs(config.u_minus), abs(config.u_plus), float(result.series("max_norm")[0])) + 0.1
    bound = speed_bound(flux, pair, M)
    xd = np.max(np.abs(result.ledger.array("Xdot"))) if len(result.ledger) else np.inf
    add("shift_speed_bound", bound - xd, f"max |X'| {xd:.4g} vs bound {bound:.4g}")

    if out is not None:
        Path(out).mkdir(parents=True, exist_ok=True)
        (Path(out) / "check.json").write_text(json.dumps([e.__dict__ for e in entries], indent=2) + "\n")
    return entries
