"""Co-optimized and sequential planning workflows and their solutions."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from . import formulation as fm
from .lp import LpSolution, solve
from .scenario import OptionsSpec, Scenario

COOPTIMIZED = "cooptimized"
SEQUENTIAL = "sequential"
COPPER_PLATE = "copper_plate"

# stage labels used in statuses, objectives and errors
STAGE_COOPT = "cooptimized"
STAGE_RESOURCE = "resource"  # copper-plate generation and storage expansion
STAGE_TRANSMISSION = "transmission"  # transmission expansion with resources fixed

OBJECTIVE_RTOL = 1e-6
BREAKDOWN_KEYS = ("operating", "unserved", "gen_invest", "stor_invest", "line_invest")


class PlanningError(RuntimeError):
    """A planning stage did not reach an optimal solution."""

    def __init__(self, stage: str, status: str, message: str = ""):
        self.stage = stage
        self.status = status
        super().__init__(f"{stage} stage: {status}" + (f" ({message})" if message else ""))


class ExtractionError(RuntimeError):
    """Recomputed costs disagree with the solver objective: an indexing bug."""


@dataclass(frozen=True, eq=False)
class PlanSolution:
    mode: str
    scenario_fingerprint: str
    epochs: tuple
    zones: tuple
    gens: tuple
    stors: tuple
    lines: tuple
    gen_build: np.ndarray  # (E, Z, G) MW
    stor_build: np.ndarray  # (E, Z, S) MW
    line_build: np.ndarray  # (E, L) MW
    gen_dispatch: np.ndarray  # (E, Z, G, H) MW
    stor_dispatch: np.ndarray  # (E, Z, S, H)
    stor_charge: np.ndarray
    soc: np.ndarray  # MWh
    flow: np.ndarray  # (E, L, H), zeros in copper-plate solutions
    unserved: np.ndarray  # (E, Z, H)
    objective: float
    breakdown: dict
    statuses: dict = field(default_factory=dict)
    stage_objectives: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("gen_build", "stor_build", "line_build", "gen_dispatch", "stor_dispatch",
                     "stor_charge", "soc", "flow", "unserved"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_hours(self) -> int:
        return self.unserved.shape[2]

    def gen_builds(self) -> dict:
        return _as_dict(fm.GenBuild, (self.epochs, self.zones, self.gens), self.gen_build)

    def stor_builds(self) -> dict:
        return _as_dict(fm.StorBuild, (self.epochs, self.zones, self.stors), self.stor_build)

    def line_builds(self) -> dict:
        return _as_dict(fm.LineBuild, (self.epochs, self.lines), self.line_build)

    def resource_builds(self) -> dict:
        """GenBuild/StorBuild -> MW, the input a fixed-resource transmission run needs."""
        return {**self.gen_builds(), **self.stor_builds()}


def _as_dict(kind, labels, values) -> dict:
    out = {}
    for idx in np.ndindex(values.shape):
        out[kind(*(ax[i] for ax, i in zip(labels, idx)))] = float(values[idx])
    return out


def cost_breakdown(scenario: Scenario, gen_build, stor_build, line_build, gen_dispatch, unserved) -> dict:
    """Discounted cost components from primal values and scenario data."""
    sc = scenario
    w = sc.epoch_weights()
    inv = sc.investment_factors()
    out = dict.fromkeys(BREAKDOWN_KEYS, 0.0)
    for k, g in enumerate(sc.gen_techs):
        out["operating"] += float(np.sum(w[:, None] * g.var_cost * gen_dispatch[:, :, k, :].sum(axis=2)))
        out["gen_invest"] += float(np.sum(inv[:, None] * g.annualized_cost * gen_build[:, :, k]))
    for k, s in enumerate(sc.stor_techs):
        out["stor_invest"] += float(np.sum(inv[:, None] * s.annualized_cost * stor_build[:, :, k]))
    out["unserved"] = float(sc.options.voll * np.sum(w * unserved.sum(axis=(1, 2))))
    for li, c in enumerate(sc.corridors):
        out["line_invest"] += float(np.sum(inv * c.annualized_cost * line_build[:, li]))
    return out


def extract_solution(lp_solution: LpSolution, index: fm.VariableIndex, scenario: Scenario,
                     mode: str = COOPTIMIZED, stage: str = STAGE_COOPT) -> PlanSolution:
    """Map primal values back onto semantic arrays and verify the cost split."""
    if not lp_solution.optimal:
        raise PlanningError(stage, lp_solution.status, lp_solution.message)
    sc = scenario
    x = lp_solution.x
    E, Z, H, L = len(sc.epochs), len(sc.zones), sc.n_hours, len(sc.corridors)

    def values(kind, shape):
        if kind not in index:
            return np.zeros(shape)
        return x[index.ids(kind)].reshape(shape)

    G, S = len(sc.gen_techs), len(sc.stor_techs)
    arrays = dict(
        gen_build=values(fm.GenBuild, (E, Z, G)),
        stor_build=values(fm.StorBuild, (E, Z, S)),
        line_build=values(fm.LineBuild, (E, L)),
        gen_dispatch=values(fm.GenDispatch, (E, Z, G, H)),
        stor_dispatch=values(fm.StorDispatch, (E, Z, S, H)),
        stor_charge=values(fm.StorCharge, (E, Z, S, H)),
        soc=values(fm.Soc, (E, Z, S, H)),
        flow=values(fm.Flow, (E, L, H)),
        unserved=values(fm.UnservedEnergy, (E, Z, H)),
    )
    breakdown = cost_breakdown(sc, arrays["gen_build"], arrays["stor_build"], arrays["line_build"],
                               arrays["gen_dispatch"], arrays["unserved"])
    total = sum(breakdown.values())
    if abs(total - lp_solution.objective) > OBJECTIVE_RTOL * max(1.0, abs(lp_solution.objective)):
        raise ExtractionError(
            f"{stage}: cost breakdown sums to {total!r} but the solver objective is {lp_solution.objective!r}"
        )
    return PlanSolution(
        mode=mode,
        scenario_fingerprint=sc.fingerprint(),
        epochs=tuple(e.index for e in sc.epochs),
        zones=tuple(sc.zone_ids),
        gens=tuple(g.id for g in sc.gen_techs),
        stors=tuple(s.id for s in sc.stor_techs),
        lines=tuple(c.id for c in sc.corridors),
        objective=float(lp_solution.objective),
        breakdown=breakdown,
        statuses={stage: lp_solution.status},
        stage_objectives={stage: float(lp_solution.objective)},
        **arrays,
    )


def _scenario(scenario: Scenario, options: OptionsSpec | None) -> Scenario:
    return scenario if options is None else fm._with(scenario, options)


def _solve_stage(sc: Scenario, variant, mode: str, stage: str, solver) -> PlanSolution:
    lp, index = fm.build_program(sc, variant)
    return extract_solution(solve(lp, solver), index, sc, mode, stage)


def run_cooptimized(scenario: Scenario, options: OptionsSpec | None = None, solver=None) -> PlanSolution:
    """Joint generation, storage and transmission expansion."""
    return _solve_stage(_scenario(scenario, options), fm.cooptimized(), COOPTIMIZED, STAGE_COOPT, solver)


def run_copper_plate(scenario: Scenario, options: OptionsSpec | None = None, solver=None) -> PlanSolution:
    """Resource expansion with unlimited transmission (first sequential stage)."""
    return _solve_stage(_scenario(scenario, options), fm.copper_plate(), COPPER_PLATE, STAGE_RESOURCE, solver)


def run_sequential(scenario: Scenario, options: OptionsSpec | None = None, solver=None) -> PlanSolution:
    """Copper-plate resource plan, then transmission expansion with those
    resources fixed and all operations re-optimized."""
    sc = _scenario(scenario, options)
    first = run_copper_plate(sc, solver=solver)
    fixed = {k: max(v, 0.0) for k, v in first.resource_builds().items()}
    second = _solve_stage(sc, fm.tep_fixed(fixed), SEQUENTIAL, STAGE_TRANSMISSION, solver)
    return PlanSolution(
        **{**_fields(second),
           "statuses": {**first.statuses, **second.statuses},
           "stage_objectives": {**first.stage_objectives, **second.stage_objectives}}
    )


def _fields(sol: PlanSolution) -> dict:
    return {name: getattr(sol, name) for name in PlanSolution.__dataclass_fields__}


# -- serialization -----------------------------------------------------------

def _records(values: np.ndarray, labels, names) -> list[dict]:
    return [
        {**{n: ax[i] for n, ax, i in zip(names, labels, idx)}, "mw": float(values[idx])}
        for idx in np.ndindex(values.shape)
    ]


def solution_dict(sol: PlanSolution) -> dict:
    return {
        "mode": sol.mode,
        "scenario_fingerprint": sol.scenario_fingerprint,
        "objective": sol.objective,
        "breakdown": sol.breakdown,
        "statuses": sol.statuses,
        "stage_objectives": sol.stage_objectives,
        "builds": {
            "gen": _records(sol.gen_build, (sol.epochs, sol.zones, sol.gens), ("epoch", "zone", "tech")),
            "stor": _records(sol.stor_build, (sol.epochs, sol.zones, sol.stors), ("epoch", "zone", "tech")),
            "line": _records(sol.line_build, (sol.epochs, sol.lines), ("epoch", "line")),
        },
    }


def dispatch_frame(sol: PlanSolution) -> pd.DataFrame:
    """Long-form hourly series: epoch, zone_or_line, series, hour, value."""
    hours = np.arange(sol.n_hours)
    parts = []

    def add(values: np.ndarray, epoch, where, series):
        parts.append(pd.DataFrame({"epoch": epoch, "zone_or_line": where, "series": series,
                                   "hour": hours, "value": values}))

    for e, ep in enumerate(sol.epochs):
        for z, zone in enumerate(sol.zones):
            for k, g in enumerate(sol.gens):
                add(sol.gen_dispatch[e, z, k], ep, zone, f"gen:{g}")
            for k, s in enumerate(sol.stors):
                add(sol.stor_dispatch[e, z, k], ep, zone, f"discharge:{s}")
                add(sol.stor_charge[e, z, k], ep, zone, f"charge:{s}")
                add(sol.soc[e, z, k], ep, zone, f"soc:{s}")
            add(sol.unserved[e, z], ep, zone, "unserved")
        if sol.mode != COPPER_PLATE:
            for li, line in enumerate(sol.lines):
                add(sol.flow[e, li], ep, line, "flow")
    if not parts:
        return pd.DataFrame(columns=["epoch", "zone_or_line", "series", "hour", "value"])
    return pd.concat(parts, ignore_index=True)


def write_solution(sol: PlanSolution, directory) -> list[Path]:
    """Write solution.json and dispatch.csv into ``directory``."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    sj = out / "solution.json"
    sj.write_text(json.dumps(solution_dict(sol), indent=2) + "\n", encoding="utf-8")
    dc = out / "dispatch.csv"
    dispatch_frame(sol).to_csv(dc, index=False, lineterminator="\n")
    return [sj, dc]


def read_resource_builds(path) -> dict:
    """GenBuild/StorBuild -> MW from a solution.json written by :func:`write_solution`."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        builds = data["builds"]
        fixed = {fm.GenBuild(int(r["epoch"]), r["zone"], r["tech"]): float(r["mw"]) for r in builds["gen"]}
        fixed.update(
            {fm.StorBuild(int(r["epoch"]), r["zone"], r["tech"]): float(r["mw"]) for r in builds["stor"]}
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{path}: not a solution file ({exc})") from None
    return {k: max(v, 0.0) for k, v in fixed.items()}
