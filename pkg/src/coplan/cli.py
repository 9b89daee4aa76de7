"""Command-line entry point.

    coplan [run] --scenario DIR|tutorial [--mode coopt|sequential|both] ...
    coplan export --scenario DIR|tutorial --variant coopt|copper|tep --output FILE.lp
    coplan validate --scenario DIR|tutorial

Exit codes: 0 success, 2 usage error, 3 data error, 4 infeasible model,
5 solver failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import pandas as pd

from . import formulation as fm
from . import metrics, planner
from .lp import INFEASIBLE, SOLVERS, SOLVER_ENV, LpError, export_lp
from .scenario import Scenario, ScenarioError, validate
from .scenario_io import load_scenario

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INFEASIBLE = 4
EXIT_SOLVER = 5

MODE_DIRS = {"coopt": planner.COOPTIMIZED, "sequential": planner.SEQUENTIAL}
RELIABILITY = {"elcc": "elcc_market", "reserve-margin": "reserve_margin"}

# the four reliability x queue-limit combinations run by --matrix
MATRIX = (
    ("elcc_queue", "elcc", True),
    ("elcc", "elcc", False),
    ("reserve_queue", "reserve-margin", True),
    ("reserve", "reserve-margin", False),
)

LOG = logging.getLogger("coplan")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    scenario_path: str
    mode: str = "both"
    reliability: str | None = None  # None keeps the scenario's own setting
    queue_limits: bool | None = None
    output_dir: Path = Path("coplan_output")
    solver: str | None = None
    hour_limit: int | None = None


def bundled_scenario_path(name: str) -> Path:
    return Path(str(resources.files("coplan") / "data" / name))


def resolve_scenario(cfg: RunConfig) -> Scenario:
    """Load, apply command-line overrides, and validate."""
    path = Path(cfg.scenario_path)
    if not path.exists() and cfg.scenario_path == "tutorial":
        path = bundled_scenario_path("tutorial")
    sc = load_scenario(path)
    changes = {}
    if cfg.reliability is not None:
        changes["reliability_mode"] = RELIABILITY[cfg.reliability]
    if cfg.queue_limits is not None:
        changes["queue_limits_enabled"] = cfg.queue_limits
    if changes:
        sc = sc.with_options(**changes)
    if cfg.hour_limit is not None:
        sc = sc.truncate_hours(cfg.hour_limit)
    validate(sc).raise_if_invalid()
    return sc


def _plan(sc: Scenario, mode: str, solver: str | None) -> planner.PlanSolution:
    LOG.info("solving %s plan", mode)
    if mode == "coopt":
        return planner.run_cooptimized(sc, solver=solver)
    return planner.run_sequential(sc, solver=solver)


def run_modes(sc: Scenario, modes: list[str], out: Path, solver: str | None) -> dict:
    """Solve each mode and write its files; returns mode -> PlanSolution."""
    solutions = {}
    for mode in modes:
        sol = _plan(sc, mode, solver)
        mode_dir = out / mode
        planner.write_solution(sol, mode_dir)
        metrics.write_metrics(metrics.report(sol, sc), mode_dir)
        solutions[mode] = sol
    reports = {m: metrics.report(s, sc) for m, s in solutions.items()}
    metrics.write_netload(reports, sc, out)
    metrics.write_plotdata(solutions, sc, out)
    if len(solutions) == 2:
        table = metrics.compare(solutions["sequential"], solutions["coopt"], sc)
        metrics.write_comparison(table, out)
    return solutions


def run(cfg: RunConfig) -> int:
    sc = resolve_scenario(cfg)
    modes = ["coopt", "sequential"] if cfg.mode == "both" else [cfg.mode]
    run_modes(sc, modes, Path(cfg.output_dir), cfg.solver)
    LOG.info("wrote results to %s", cfg.output_dir)
    return EXIT_OK


def run_matrix(cfg: RunConfig) -> int:
    """All reliability/queue-limit combinations in both modes, plus summary tables."""
    out = Path(cfg.output_dir)
    rows = []
    for label, reliability, queue in MATRIX:
        sub = RunConfig(cfg.scenario_path, "both", reliability, queue, out / label, cfg.solver, cfg.hour_limit)
        sc = resolve_scenario(sub)
        sols = run_modes(sc, ["coopt", "sequential"], sub.output_dir, cfg.solver)
        for mode, sol in sols.items():
            rep = metrics.report(sol, sc)
            rows.append({"scenario": label, "mode": MODE_DIRS[mode], **dict(rep.rows()[:7])})
    df = pd.DataFrame(rows)
    tables = {
        "table_transmission.csv": ["transmission_gw_miles"],
        "table_cost.csv": ["npv_system_cost", "npv_transmission_cost"],
        "table_reliability.csv": ["ue_gwh", "npv_ue_cost", "ue_share_of_load"],
        "table_emissions.csv": ["emissions_mt"],
    }
    text = []
    for name, cols in tables.items():
        wide = df.pivot(index="scenario", columns="mode", values=cols)
        wide = wide.reindex([m[0] for m in MATRIX])
        wide.columns = [f"{c}:{m}" for c, m in wide.columns]
        wide.reset_index().to_csv(out / name, index=False, lineterminator="\n")
        text.append(f"{name}\n{wide.to_string()}\n")
    (out / "tables.txt").write_text("\n".join(text), encoding="utf-8")
    return EXIT_OK


def export(args) -> int:
    cfg = RunConfig(args.scenario, reliability=args.reliability, queue_limits=args.queue_limits,
                    hour_limit=args.hour_limit)
    if args.variant == "tep" and not args.stage1:
        raise UsageError("the tep variant needs --stage1 pointing at a resource-stage solution.json")
    sc = resolve_scenario(cfg)
    if args.variant == "coopt":
        variant = fm.cooptimized()
    elif args.variant == "copper":
        variant = fm.copper_plate()
    else:
        try:
            fixed = planner.read_resource_builds(args.stage1)
        except (OSError, ValueError) as exc:
            raise ScenarioError(str(exc)) from None
        variant = fm.tep_fixed(fixed)
    lp, _ = fm.build_program(sc, variant)
    path = export_lp(lp, args.output)
    LOG.info("wrote %s (%d columns, %d rows)", path, lp.n_cols, lp.n_rows)
    return EXIT_OK


def check(args) -> int:
    path = Path(args.scenario)
    if not path.exists() and args.scenario == "tutorial":
        path = bundled_scenario_path("tutorial")
    report = validate(load_scenario(path))
    for v in report:
        print(f"{v.location}: {v.message}")
    if report.ok:
        print("ok")
        return EXIT_OK
    return EXIT_DATA


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return text == "on"


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _scenario_flags(p: argparse.ArgumentParser):
    p.add_argument("--scenario", required=True, help="scenario directory, or 'tutorial' for the bundled one")
    p.add_argument("--reliability", choices=sorted(RELIABILITY), help="override the scenario's reliability mode")
    p.add_argument("--queue-limits", type=_on_off, metavar="{on,off}", help="override cumulative build limits")
    p.add_argument("--hour-limit", type=_positive_int, metavar="N", help="model only the first N hours")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parsers() -> dict:
    run_p = argparse.ArgumentParser(prog="coplan", description="Plan generation, storage and transmission builds.")
    _scenario_flags(run_p)
    run_p.add_argument("--mode", choices=["coopt", "sequential", "both"], default="both")
    run_p.add_argument("--output", default="coplan_output", help="output directory")
    run_p.add_argument("--solver", choices=sorted(SOLVERS),
                       help=f"LP solver (default: ${SOLVER_ENV} or highs)")
    run_p.add_argument("--matrix", action="store_true",
                       help="run all reliability/queue-limit combinations in both modes")

    export_p = argparse.ArgumentParser(prog="coplan export", description="Write a model in LP format without solving.")
    _scenario_flags(export_p)
    export_p.add_argument("--variant", choices=["coopt", "copper", "tep"], default="coopt")
    export_p.add_argument("--stage1", help="solution.json from a resource-stage run (tep only)")
    export_p.add_argument("--output", required=True, help="LP file to write")

    validate_p = argparse.ArgumentParser(prog="coplan validate", description="Check a scenario directory.")
    validate_p.add_argument("--scenario", required=True)
    validate_p.add_argument("-v", "--verbose", action="store_true")
    return {"run": run_p, "export": export_p, "validate": validate_p}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parsers = build_parsers()
    command = "run"
    if argv and argv[0] in parsers:
        command = argv.pop(0)
    parser = parsers[command]
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        if command == "validate":
            return check(args)
        if command == "export":
            return export(args)
        cfg = RunConfig(args.scenario, args.mode, args.reliability, args.queue_limits,
                        Path(args.output), args.solver, args.hour_limit)
        return run_matrix(cfg) if args.matrix else run(cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ScenarioError, fm.FormulationError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except planner.PlanningError as exc:
        if exc.status == INFEASIBLE:
            print(f"infeasible: {exc}", file=sys.stderr)
            return EXIT_INFEASIBLE
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (planner.ExtractionError, LpError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
