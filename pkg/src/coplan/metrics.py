"""Comparison metrics for plans: costs, transmission GW-mi, unserved energy,
emissions and zonal net load, plus CSV/JSON writers for external plotting."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .planner import PlanSolution
from .scenario import Scenario

# how an operating year's unserved energy counts toward horizon totals
UE_WEIGHTINGS = ("duration", "operating_year")


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class MetricsReport:
    mode: str
    npv_system_cost: float  # $
    npv_transmission_cost: float  # $
    transmission_gw_miles: float  # cumulative by the final epoch
    gw_miles_by_epoch: tuple  # cumulative after each epoch
    ue_gwh: float
    npv_ue_cost: float  # $
    ue_share_of_load: float
    emissions_mt: float  # million metric tons CO2 over the horizon
    net_load_by_zone: dict  # zone -> average MW in the final epoch, positive = importing
    warnings: tuple = field(default=())

    def rows(self) -> list[tuple[str, float]]:
        out = [
            ("npv_system_cost", self.npv_system_cost),
            ("npv_transmission_cost", self.npv_transmission_cost),
            ("transmission_gw_miles", self.transmission_gw_miles),
            ("ue_gwh", self.ue_gwh),
            ("npv_ue_cost", self.npv_ue_cost),
            ("ue_share_of_load", self.ue_share_of_load),
            ("emissions_mt", self.emissions_mt),
        ]
        out += [(f"gw_miles_epoch_{k}", v) for k, v in enumerate(self.gw_miles_by_epoch)]
        out += [(f"net_load_mw:{z}", v) for z, v in self.net_load_by_zone.items()]
        return out


def _lengths(solution: PlanSolution, scenario: Scenario) -> np.ndarray:
    by_id = {c.id: c.length for c in scenario.corridors}
    return np.array([by_id[line] for line in solution.lines])


def gw_miles_by_epoch(solution: PlanSolution, scenario: Scenario) -> np.ndarray:
    """Cumulative GW-mi of corridor reinforcement after each epoch."""
    if not solution.lines:
        return np.zeros(len(solution.epochs))
    per_epoch = (solution.line_build / 1000.0) @ _lengths(solution, scenario)
    return np.cumsum(per_epoch)


def transmission_gw_miles(solution: PlanSolution, scenario: Scenario) -> float:
    """Sum over corridors of total builds (GW) times corridor length (mi)."""
    if not solution.lines:
        return 0.0
    return float((solution.line_build.sum(axis=0) / 1000.0) @ _lengths(solution, scenario))


def _year_weights(scenario: Scenario, weighting: str) -> np.ndarray:
    if weighting == "duration":
        return np.array([float(e.duration) for e in scenario.epochs])
    if weighting == "operating_year":
        return np.ones(len(scenario.epochs))
    raise MetricsError(f"unknown unserved-energy weighting {weighting!r}; use one of {UE_WEIGHTINGS}")


def reliability_metrics(solution: PlanSolution, scenario: Scenario,
                        weighting: str = "duration") -> tuple[float, float, float]:
    """(UE GWh, NPV of UE $, UE share of load).

    With the default weighting each modeled operating year stands in for
    every year of its epoch; the NPV always uses discounted epoch weights.
    """
    d = _year_weights(scenario, weighting)
    ue_year = solution.unserved.sum(axis=(1, 2))
    load_year = scenario.load.sum(axis=(1, 2))
    ue_gwh = float(d @ ue_year) / 1000.0
    npv = float(scenario.options.voll * (scenario.epoch_weights() @ ue_year))
    total_load = float(d @ load_year)
    share = float(d @ ue_year) / total_load if total_load > 0 else 0.0
    return ue_gwh, npv, share


def unknown_emission_rates(scenario: Scenario) -> list[str]:
    return [g.id for g in scenario.gen_techs if math.isnan(g.emission_rate)]


def emissions(solution: PlanSolution, scenario: Scenario) -> float:
    """Million metric tons: dispatch x rate x epoch duration (undiscounted).
    Technologies with an unknown rate count as zero."""
    rates = np.array([0.0 if math.isnan(g.emission_rate) else g.emission_rate for g in scenario.gen_techs])
    d = np.array([float(e.duration) for e in scenario.epochs])
    if not len(rates):
        return 0.0
    annual = solution.gen_dispatch.sum(axis=(1, 3))  # (E, G) MWh
    return float(d @ (annual @ rates)) / 1e6


def net_load_by_zone(solution: PlanSolution, scenario: Scenario, epoch: int | None = None) -> dict:
    """Average of load + charging - generation - discharge - UE per zone."""
    e = len(solution.epochs) - 1 if epoch is None else solution.epochs.index(epoch)
    net = (scenario.load[e] + solution.stor_charge[e].sum(axis=1) - solution.gen_dispatch[e].sum(axis=1)
           - solution.stor_dispatch[e].sum(axis=1) - solution.unserved[e])
    return {z: float(v) for z, v in zip(solution.zones, net.mean(axis=1))}


def _check_same(solution: PlanSolution, scenario: Scenario):
    if solution.scenario_fingerprint != scenario.fingerprint():
        raise MetricsError("solution does not belong to this scenario (fingerprint mismatch)")


def report(solution: PlanSolution, scenario: Scenario, weighting: str = "duration") -> MetricsReport:
    _check_same(solution, scenario)
    ue_gwh, npv_ue, share = reliability_metrics(solution, scenario, weighting)
    warnings = tuple(f"emission rate missing for {g}; counted as 0" for g in unknown_emission_rates(scenario))
    return MetricsReport(
        mode=solution.mode,
        npv_system_cost=solution.objective,
        npv_transmission_cost=solution.breakdown["line_invest"],
        transmission_gw_miles=transmission_gw_miles(solution, scenario),
        gw_miles_by_epoch=tuple(float(v) for v in gw_miles_by_epoch(solution, scenario)),
        ue_gwh=ue_gwh,
        npv_ue_cost=npv_ue,
        ue_share_of_load=share,
        emissions_mt=emissions(solution, scenario),
        net_load_by_zone=net_load_by_zone(solution, scenario),
        warnings=warnings,
    )


def compare(seq: PlanSolution, coopt: PlanSolution, scenario: Scenario,
            weighting: str = "duration") -> pd.DataFrame:
    """Side-by-side metrics; delta is co-optimized minus sequential."""
    if seq.scenario_fingerprint != coopt.scenario_fingerprint:
        raise MetricsError("solutions come from different scenarios (fingerprint mismatch)")
    a = report(seq, scenario, weighting)
    b = report(coopt, scenario, weighting)
    rows = []
    for (name, va), (_, vb) in zip(a.rows(), b.rows()):
        delta = vb - va
        pct = 100.0 * delta / abs(va) if va != 0 else (0.0 if delta == 0 else math.nan)
        rows.append((name, va, vb, delta, pct))
    return pd.DataFrame(rows, columns=["metric", "sequential", "cooptimized", "delta", "pct_diff"])


def format_comparison(table: pd.DataFrame) -> str:
    """Fixed-width text rendering of a :func:`compare` table."""
    lines = [f"{'metric':<28}{'sequential':>18}{'cooptimized':>18}{'delta':>18}{'pct':>10}"]
    for r in table.itertuples(index=False):
        pct = "n/a" if math.isnan(r.pct_diff) else f"{r.pct_diff:.2f}%"
        lines.append(f"{r.metric:<28}{r.sequential:>18.6g}{r.cooptimized:>18.6g}{r.delta:>18.6g}{pct:>10}")
    return "\n".join(lines) + "\n"


# -- writers -------------------------------------------------------------------

def _csv(df: pd.DataFrame, path: Path) -> Path:
    df.to_csv(path, index=False, lineterminator="\n")
    return path


def write_metrics(rep: MetricsReport, directory) -> Path:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    df = pd.DataFrame(rep.rows(), columns=["metric", "value"])
    path = _csv(df, out / "metrics.csv")
    if rep.warnings:
        (out / "metrics_warnings.txt").write_text("\n".join(rep.warnings) + "\n", encoding="utf-8")
    return path


def write_comparison(table: pd.DataFrame, directory) -> list[Path]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    txt = out / "comparison.txt"
    txt.write_text(format_comparison(table), encoding="utf-8")
    return [_csv(table, out / "comparison.csv"), txt]


def write_netload(reports: dict, scenario: Scenario, directory) -> Path:
    """netload.csv with one row per (mode, zone)."""
    coords = {z.id: (z.lat, z.lon) for z in scenario.zones}
    rows = [
        (mode, zone, *coords[zone], mw)
        for mode, rep in reports.items()
        for zone, mw in rep.net_load_by_zone.items()
    ]
    df = pd.DataFrame(rows, columns=["mode", "zone", "lat", "lon", "net_load_mw"])
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    return _csv(df, out / "netload.csv")


def write_plotdata(solutions: dict, scenario: Scenario, directory) -> list[Path]:
    """Map-ready JSON per mode: zone coordinates with net load, corridor
    endpoints with cumulative builds, and the GW-mi series."""
    out = Path(directory) / "plotdata"
    out.mkdir(parents=True, exist_ok=True)
    zones = {z.id: z for z in scenario.zones}
    paths = []
    for mode, sol in solutions.items():
        rep = report(sol, scenario)
        builds = sol.line_build.sum(axis=0)
        doc = {
            "mode": mode,
            "zones": [
                {"zone": z, "lat": zones[z].lat, "lon": zones[z].lon, "net_load_mw": v}
                for z, v in rep.net_load_by_zone.items()
            ],
            "corridors": [
                {"corridor": c.id, "from": [zones[c.from_zone].lat, zones[c.from_zone].lon],
                 "to": [zones[c.to_zone].lat, zones[c.to_zone].lon], "build_mw": float(builds[li]),
                 "gw_miles": float(builds[li]) / 1000.0 * c.length}
                for li, c in enumerate(scenario.corridors)
            ],
            "gw_miles_by_epoch": list(rep.gw_miles_by_epoch),
        }
        path = out / f"{mode}.json"
        path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        paths.append(path)
    return paths
