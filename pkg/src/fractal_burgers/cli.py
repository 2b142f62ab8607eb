"""Command line entry point: ``fractal-burgers {profile,solve,sweep,check,rate}``.

Exit codes: 0 pass, 1 invariant failure, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .config import ExperimentConfig, load_config
from .errors import (
    BoundaryProximityError,
    ConfigurationError,
    ConvergenceError,
    FractalBurgersError,
    IntegrationError,
    PropertyViolation,
)

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fractal-burgers", description="Fractal Burgers shock-convergence lab.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("profile", "compute and store the viscous layer"),
                       ("solve", "one coupled run for a single epsilon"),
                       ("sweep", "runs over the epsilon list with rate fits"),
                       ("check", "invariant suite on a small configuration"),
                       ("rate", "re-fit rates from stored sweep reports")):
        s = sub.add_parser(name, help=text)
        s.add_argument("--config", type=Path, help="JSON experiment config (defaults when omitted)")
        s.add_argument("--out", type=Path, help="output directory (overrides the config)")
        s.add_argument("--workers", type=int, default=1, help="parallel runs for sweep")
        s.add_argument("--epsilon", type=float, action="append",
                       help="epsilon override; repeat to give a list")
        s.add_argument("--seed", type=int, help="perturbation seed override")
    return p


def _load(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        config = replace(config, initial=replace(config.initial, seed=args.seed))
    if args.epsilon:
        config = replace(config, epsilons=tuple(args.epsilon))
    if args.out is not None:
        config = replace(config, output=str(args.out))
    if args.workers < 1:
        raise ConfigurationError("--workers must be at least 1")
    return config


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True, default=str))


def _run(args) -> int:
    from . import harness

    config = _load(args)
    out = Path(config.output)
    if args.command == "profile":
        prof = harness.cmd_profile(config, out)
        _emit({"alpha": prof.alpha, "residual": prof.residual, "max_slope": prof.max_slope(),
               "iterations": prof.iterations, "key": config.profile_key()})
        return EXIT_OK
    if args.command == "solve":
        rep = harness.cmd_solve(config, config.epsilons[0], out)
        _emit(rep)
        if not rep["complete"]:
            return EXIT_NUMERICAL
        tol = config.tolerances
        ok = (rep["max_norm_increase"] <= tol.max_principle and rep["slope_monitor_increase"] <= tol.slope_monitor
              and rep.get("ledger_consistent", True))
        return EXIT_OK if ok else EXIT_INVARIANT
    if args.command == "sweep":
        rep = harness.cmd_sweep(config, out, args.workers)
        _emit(rep.to_dict())
        if rep.incomplete:
            return EXIT_NUMERICAL
        return EXIT_INVARIANT if rep.C_flagged else EXIT_OK
    if args.command == "check":
        entries = harness.cmd_check(config, out)
        for e in entries:
            print(f"{'PASS' if e.passed else 'FAIL'}  {e.name:<24s} margin={e.margin:+.3e}  {e.detail}")
        return EXIT_OK if all(e.passed for e in entries) else EXIT_INVARIANT
    # rate
    _emit(harness.cmd_rate(out, config if args.config else None))
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _run(args)
    except (IntegrationError, ConvergenceError, BoundaryProximityError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PropertyViolation as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (FractalBurgersError, ValueError, TypeError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
