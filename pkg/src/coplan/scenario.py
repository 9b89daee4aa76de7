"""Scenario data model and invariant checks.

A :class:`Scenario` bundles everything one planning run needs: epochs, zones,
corridors, technologies, hourly loads, policies and run options. Per-zone and
per-epoch technology data are dense numpy arrays indexed in scenario order
(epoch position, zone position, hour), which keeps model assembly vectorized
at 8760 hours.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np

from .discount import annualize, discounted_investment_cost, epoch_weight

POLICY_CLASSES = ("all_re", "re", "pv", "wind")
TARGET_CLASSES = ("offshore_wind", "solar", "storage")
RELIABILITY_MODES = ("elcc_market", "reserve_margin")
MAX_TARGET_STATES = 16

_FLOAT = np.float64


class ScenarioError(ValueError):
    """Structural problem with scenario input (missing file, bad row, dangling id)."""

    def __init__(self, message: str, file: str | None = None, row: int | None = None):
        self.file = file
        self.row = row
        where = ""
        if file is not None:
            where = f"{file}"
            if row is not None:
                where += f", row {row}"
            where += ": "
        super().__init__(where + message)


def _frozen(values, shape=None) -> np.ndarray:
    arr = np.array(values, dtype=_FLOAT)
    if shape is not None:
        arr = arr.reshape(shape)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class EpochSpec:
    index: int
    start_year_offset: int
    duration: int = 5
    label: str = ""

    @property
    def operating_year_offset(self) -> int:
        return self.start_year_offset + self.duration - 1

    @property
    def years(self) -> range:
        return range(self.start_year_offset, self.operating_year_offset + 1)


@dataclass(frozen=True)
class ZoneSpec:
    id: str
    lat: float | None = None
    lon: float | None = None
    # state -> fraction of the zone's load located in that state
    state_shares: Mapping[str, float] = field(default_factory=dict)
    # state -> 1 when the zone overlaps the state
    state_overlap: Mapping[str, int] = field(default_factory=dict)

    def overlaps(self, state: str) -> bool:
        return bool(self.state_overlap.get(state, 0))


@dataclass(frozen=True)
class CorridorSpec:
    id: str
    from_zone: str
    to_zone: str
    cap_forward: float
    cap_reverse: float
    length: float
    cost_per_mw_mile: float = 0.0
    crf: float = 1.0
    max_reinforcement_factor: float | None = None

    @property
    def annualized_cost(self) -> float:
        """Annualized reinforcement cost in $/MW-yr for the whole corridor."""
        return annualize(self.cost_per_mw_mile * self.length, self.crf)


@dataclass(frozen=True, eq=False)
class GenTechSpec:
    """Generation technology; arrays are (epoch, zone) unless noted."""

    id: str
    capacity: np.ndarray
    var_cost: np.ndarray
    capital_cost: np.ndarray
    crf: np.ndarray
    elcc: np.ndarray  # (epoch,)
    build_limit: np.ndarray  # (zone,), nan means unlimited
    cap_factor: np.ndarray  # (epoch, zone, hour)
    emission_rate: float = 0.0  # t/MWh, nan when unknown
    policy_classes: frozenset = frozenset()
    offshore_wind: bool = False

    def __post_init__(self):
        for name in ("capacity", "var_cost", "capital_cost", "crf", "elcc", "build_limit", "cap_factor"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        object.__setattr__(self, "policy_classes", frozenset(self.policy_classes))

    @property
    def annualized_cost(self) -> np.ndarray:
        return self.capital_cost * self.crf

    @property
    def is_solar(self) -> bool:
        return "pv" in self.policy_classes

    def in_target_class(self, tech_class: str) -> bool:
        if tech_class == "solar":
            return self.is_solar
        if tech_class == "offshore_wind":
            return self.offshore_wind
        return False


@dataclass(frozen=True, eq=False)
class StorTechSpec:
    """Storage technology; power/energy/cost arrays are (epoch, zone)."""

    id: str
    power_capacity: np.ndarray
    energy_capacity: np.ndarray
    capital_cost: np.ndarray  # $/MW of power capacity
    crf: np.ndarray
    elcc: np.ndarray  # (epoch,)
    build_limit: np.ndarray  # (zone,)
    duration: float = 4.0
    efficiency: float = 0.85

    def __post_init__(self):
        for name in ("power_capacity", "energy_capacity", "capital_cost", "crf", "elcc", "build_limit"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def annualized_cost(self) -> np.ndarray:
        return self.capital_cost * self.crf


@dataclass(frozen=True)
class InstateRps:
    rps_fraction: float
    instate_fraction: float


@dataclass(frozen=True)
class PolicySpec:
    # (epoch, policy class) -> MWh of qualifying generation
    regional_rps: Mapping[tuple[int, str], float] = field(default_factory=dict)
    # (epoch, state) -> in-state RPS terms
    instate_rps: Mapping[tuple[int, str], InstateRps] = field(default_factory=dict)
    # (epoch, state, tech class) -> cumulative MW
    capacity_targets: Mapping[tuple[int, str, str], float] = field(default_factory=dict)

    def target_states(self, tech_class: str) -> list[str]:
        """States holding a target for ``tech_class`` in any epoch, sorted."""
        return sorted({st for (_, st, c) in self.capacity_targets if c == tech_class})


@dataclass(frozen=True)
class OptionsSpec:
    reliability_mode: str = "reserve_margin"
    rsv: float = 0.15
    cap_target: Mapping[int, float] = field(default_factory=dict)
    queue_limits_enabled: bool = False
    voll: float = 5000.0
    discount_rate: float = 0.072

    @property
    def effective_rsv(self) -> float:
        """Reserve uplift used in balance rows; the capacity market replaces it."""
        return 0.0 if self.reliability_mode == "elcc_market" else self.rsv


@dataclass(frozen=True, eq=False)
class Scenario:
    epochs: tuple
    zones: tuple
    corridors: tuple
    gen_techs: tuple
    stor_techs: tuple
    load: np.ndarray  # (epoch, zone, hour) MW
    policies: PolicySpec = field(default_factory=PolicySpec)
    options: OptionsSpec = field(default_factory=OptionsSpec)

    def __post_init__(self):
        for name in ("epochs", "zones", "corridors", "gen_techs", "stor_techs"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "load", _frozen(self.load))

    # -- dimensions --------------------------------------------------------
    @property
    def n_hours(self) -> int:
        return int(self.load.shape[2])

    @property
    def zone_ids(self) -> list[str]:
        return [z.id for z in self.zones]

    @property
    def states(self) -> list[str]:
        found = set()
        for z in self.zones:
            found.update(z.state_shares)
            found.update(s for s, v in z.state_overlap.items() if v)
        return sorted(found)

    @property
    def horizon_end(self) -> int:
        return self.epochs[-1].operating_year_offset

    def zone_index(self, zone_id: str) -> int:
        for i, z in enumerate(self.zones):
            if z.id == zone_id:
                return i
        raise KeyError(zone_id)

    def gen(self, tech_id: str) -> GenTechSpec:
        for g in self.gen_techs:
            if g.id == tech_id:
                return g
        raise KeyError(tech_id)

    def stor(self, tech_id: str) -> StorTechSpec:
        for s in self.stor_techs:
            if s.id == tech_id:
                return s
        raise KeyError(tech_id)

    # -- discounting -------------------------------------------------------
    def epoch_weights(self) -> np.ndarray:
        r = self.options.discount_rate
        return np.array([epoch_weight(r, e) for e in self.epochs])

    def investment_factors(self) -> np.ndarray:
        """Per-epoch multiplier turning $/MW-yr into discounted $/MW."""
        r = self.options.discount_rate
        T = self.horizon_end
        return np.array([discounted_investment_cost(1.0, e, T, r) for e in self.epochs])

    # -- derived copies ----------------------------------------------------
    def with_options(self, **changes) -> "Scenario":
        return dataclasses.replace(self, options=dataclasses.replace(self.options, **changes))

    def truncate_hours(self, n_hours: int) -> "Scenario":
        """Copy keeping only the first ``n_hours`` hours of every series.

        Regional RPS requirements (MWh) shrink with the share of each epoch's
        load that is kept; costs and capacities are left as they are.
        """
        if n_hours <= 0:
            raise ValueError("hour count must be positive")
        if n_hours >= self.n_hours:
            return self
        gens = tuple(
            dataclasses.replace(g, cap_factor=g.cap_factor[:, :, :n_hours]) for g in self.gen_techs
        )
        load = self.load[:, :, :n_hours]
        full, kept = self.load.sum(axis=(1, 2)), load.sum(axis=(1, 2))
        share = np.divide(kept, full, out=np.zeros_like(full), where=full > 0)
        rps = {(e, p): float(v * share[e]) for (e, p), v in self.policies.regional_rps.items()}
        policies = dataclasses.replace(self.policies, regional_rps=rps)
        return dataclasses.replace(self, gen_techs=gens, load=load, policies=policies)

    # -- identity ----------------------------------------------------------
    def fingerprint(self) -> str:
        """SHA-256 over a canonical encoding of every field."""
        h = hashlib.sha256()

        def arr(a: np.ndarray):
            a = np.ascontiguousarray(a, dtype=_FLOAT)
            h.update(repr(a.shape).encode())
            h.update(a.tobytes())

        meta = {
            "epochs": [dataclasses.astuple(e) for e in self.epochs],
            "zones": [
                [z.id, z.lat, z.lon, sorted(z.state_shares.items()), sorted(z.state_overlap.items())]
                for z in self.zones
            ],
            "corridors": [dataclasses.astuple(c) for c in self.corridors],
            "gen": [[g.id, g.emission_rate, sorted(g.policy_classes), g.offshore_wind] for g in self.gen_techs],
            "stor": [[s.id, s.duration, s.efficiency] for s in self.stor_techs],
            "rps": sorted([list(k), v] for k, v in self.policies.regional_rps.items()),
            "instate": sorted(
                [list(k), v.rps_fraction, v.instate_fraction] for k, v in self.policies.instate_rps.items()
            ),
            "targets": sorted([list(k), v] for k, v in self.policies.capacity_targets.items()),
            "options": {
                **dataclasses.asdict(self.options),
                "cap_target": sorted(self.options.cap_target.items()),
            },
        }
        h.update(json.dumps(meta, sort_keys=True, default=str).encode())
        for g in self.gen_techs:
            for a in (g.capacity, g.var_cost, g.capital_cost, g.crf, g.elcc, g.build_limit, g.cap_factor):
                arr(a)
        for s in self.stor_techs:
            for a in (s.power_capacity, s.energy_capacity, s.capital_cost, s.crf, s.elcc, s.build_limit):
                arr(a)
        arr(self.load)
        return h.hexdigest()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Scenario):
            return NotImplemented
        return self.fingerprint() == other.fingerprint()

    __hash__ = None


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __len__(self) -> int:
        return len(self.violations)

    def __iter__(self) -> Iterator[Violation]:
        return iter(self.violations)

    def add(self, location: str, message: str) -> None:
        self.violations.append(Violation(location, message))

    def raise_if_invalid(self) -> None:
        if self.violations:
            lines = "\n".join(f"  {v}" for v in self.violations[:50])
            more = len(self.violations) - 50
            if more > 0:
                lines += f"\n  ... and {more} more"
            raise ScenarioError(f"scenario failed validation:\n{lines}")


# Each array rule reports at most this many offending positions.
_MAX_POSITIONS = 20


def _check_range(report, where, arr, lo, hi, axes, lo_open=False, allow_nan=False):
    a = np.asarray(arr, dtype=_FLOAT)
    bad = np.zeros(a.shape, dtype=bool)
    nan = np.isnan(a)
    if not allow_nan:
        bad |= nan
    with np.errstate(invalid="ignore"):
        if lo is not None:
            bad |= (a <= lo) if lo_open else (a < lo)
        if hi is not None:
            bad |= a > hi
    if allow_nan:
        bad &= ~nan
    positions = np.argwhere(bad)
    for pos in positions[:_MAX_POSITIONS]:
        label = ", ".join(f"{ax}={lbl(i)}" for (ax, lbl), i in zip(axes, pos))
        value = float(a[tuple(pos)])
        report.add(f"{where}[{label}]", f"value {value!r} outside [{lo}, {hi}]")
    if len(positions) > _MAX_POSITIONS:
        report.add(where, f"{len(positions) - _MAX_POSITIONS} further out-of-range values")


def validate(scenario: Scenario) -> ValidationReport:
    """Check every type invariant; violations are returned, not raised."""
    rep = ValidationReport()
    sc = scenario
    E, Z, H = len(sc.epochs), len(sc.zones), sc.n_hours
    zone_ids = sc.zone_ids
    ep = ("epoch", lambda i: sc.epochs[i].index)
    zn = ("zone", lambda i: zone_ids[i])
    hr = ("hour", int)

    if E == 0:
        rep.add("epochs", "at least one epoch is required")
    if Z == 0:
        rep.add("zones", "at least one zone is required")
    for pos, e in enumerate(sc.epochs):
        if e.index != pos:
            rep.add(f"epochs[{pos}]", f"epoch index {e.index} out of order")
        if e.duration < 1:
            rep.add(f"epochs[{pos}]", f"duration {e.duration} < 1")
        if pos == 0 and e.start_year_offset < 0:
            rep.add("epochs[0]", "start_year_offset must be >= 0")
        if pos > 0:
            prev = sc.epochs[pos - 1]
            if e.start_year_offset != prev.operating_year_offset + 1:
                rep.add(f"epochs[{pos}]", "epochs must be contiguous")

    if sc.load.shape != (E, Z, H):
        rep.add("load", f"shape {sc.load.shape} != ({E}, {Z}, {H})")
    else:
        _check_range(rep, "load", sc.load, 0.0, None, (ep, zn, hr))

    _unique(rep, "zones", zone_ids)
    for z in sc.zones:
        for st, share in z.state_shares.items():
            if not 0.0 <= share <= 1.0:
                rep.add(f"zone_states[{z.id},{st}]", f"share {share} outside [0, 1]")
            if share > 0 and not z.overlaps(st):
                rep.add(f"zone_states[{z.id},{st}]", "positive share requires overlap = 1")
        for st, v in z.state_overlap.items():
            if v not in (0, 1):
                rep.add(f"zone_states[{z.id},{st}]", f"overlap {v} not in {{0, 1}}")

    _unique(rep, "corridors", [c.id for c in sc.corridors])
    for c in sc.corridors:
        loc = f"corridors[{c.id}]"
        for zid in (c.from_zone, c.to_zone):
            if zid not in zone_ids:
                rep.add(loc, f"unknown zone {zid!r}")
        if c.from_zone == c.to_zone:
            rep.add(loc, "from_zone equals to_zone")
        if c.cap_forward < 0 or c.cap_reverse < 0:
            rep.add(loc, "corridor capacities must be >= 0")
        if not c.length > 0:
            rep.add(loc, f"length {c.length} must be > 0")
        if c.cost_per_mw_mile < 0 or c.crf < 0:
            rep.add(loc, "costs must be >= 0")
        if c.max_reinforcement_factor is not None and not c.max_reinforcement_factor >= 0:
            rep.add(loc, "max_reinforcement_factor must be >= 0")

    _unique(rep, "gen_techs", [g.id for g in sc.gen_techs])
    for g in sc.gen_techs:
        loc = f"gen_techs[{g.id}]"
        for name in ("capacity", "var_cost", "capital_cost", "crf"):
            a = getattr(g, name)
            if a.shape != (E, Z):
                rep.add(f"{loc}.{name}", f"shape {a.shape} != ({E}, {Z})")
            else:
                _check_range(rep, f"{loc}.{name}", a, 0.0, None, (ep, zn))
        if g.elcc.shape != (E,):
            rep.add(f"{loc}.elcc", f"shape {g.elcc.shape} != ({E},)")
        else:
            _check_range(rep, f"{loc}.elcc", g.elcc, 0.0, 1.0, (ep,))
        if g.build_limit.shape != (Z,):
            rep.add(f"{loc}.build_limit", f"shape {g.build_limit.shape} != ({Z},)")
        else:
            _check_range(rep, f"{loc}.build_limit", g.build_limit, 0.0, None, (zn,), allow_nan=True)
        if g.cap_factor.shape != (E, Z, H):
            rep.add(f"{loc}.cap_factor", f"shape {g.cap_factor.shape} != ({E}, {Z}, {H})")
        else:
            _check_range(rep, f"{loc}.cap_factor", g.cap_factor, 0.0, 1.0, (ep, zn, hr))
        if not (math.isnan(g.emission_rate) or g.emission_rate >= 0):
            rep.add(loc, f"emission rate {g.emission_rate} must be >= 0")
        unknown = set(g.policy_classes) - set(POLICY_CLASSES)
        if unknown:
            rep.add(loc, f"unknown policy classes {sorted(unknown)}")
        if g.policy_classes & {"re", "pv", "wind"} and "all_re" not in g.policy_classes:
            rep.add(loc, "re/pv/wind members must also belong to all_re")

    _unique(rep, "stor_techs", [s.id for s in sc.stor_techs])
    for s in sc.stor_techs:
        loc = f"stor_techs[{s.id}]"
        if not 0.0 < s.efficiency <= 1.0:
            rep.add(loc, f"efficiency {s.efficiency} outside (0, 1]")
        if not s.duration > 0:
            rep.add(loc, f"duration {s.duration} must be > 0")
        for name in ("power_capacity", "energy_capacity", "capital_cost", "crf"):
            a = getattr(s, name)
            if a.shape != (E, Z):
                rep.add(f"{loc}.{name}", f"shape {a.shape} != ({E}, {Z})")
            else:
                _check_range(rep, f"{loc}.{name}", a, 0.0, None, (ep, zn))
        if s.elcc.shape != (E,):
            rep.add(f"{loc}.elcc", f"shape {s.elcc.shape} != ({E},)")
        else:
            _check_range(rep, f"{loc}.elcc", s.elcc, 0.0, 1.0, (ep,))
        if s.build_limit.shape != (Z,):
            rep.add(f"{loc}.build_limit", f"shape {s.build_limit.shape} != ({Z},)")
        else:
            _check_range(rep, f"{loc}.build_limit", s.build_limit, 0.0, None, (zn,), allow_nan=True)

    pol = sc.policies
    for (e, p), req in pol.regional_rps.items():
        loc = f"policies_rps[{e},{p}]"
        if not 0 <= e < E:
            rep.add(loc, f"unknown epoch {e}")
        if p not in POLICY_CLASSES:
            rep.add(loc, f"unknown policy class {p!r}")
        if not req >= 0:
            rep.add(loc, f"requirement {req} must be >= 0")
    for (e, st), terms in pol.instate_rps.items():
        loc = f"policies_instate[{e},{st}]"
        if not 0 <= e < E:
            rep.add(loc, f"unknown epoch {e}")
        for name in ("rps_fraction", "instate_fraction"):
            v = getattr(terms, name)
            if not 0.0 <= v <= 1.0:
                rep.add(loc, f"{name} {v} outside [0, 1]")
    for (e, st, cls), mw in pol.capacity_targets.items():
        loc = f"policies_targets[{e},{st},{cls}]"
        if not 0 <= e < E:
            rep.add(loc, f"unknown epoch {e}")
        if cls not in TARGET_CLASSES:
            rep.add(loc, f"unknown technology class {cls!r}")
        if not mw >= 0:
            rep.add(loc, f"target {mw} must be >= 0")
        if not any(z.overlaps(st) for z in sc.zones):
            rep.add(loc, f"state {st!r} overlaps no zone")

    opt = sc.options
    if opt.reliability_mode not in RELIABILITY_MODES:
        rep.add("options.reliability_mode", f"unknown mode {opt.reliability_mode!r}")
    if not opt.rsv >= 0:
        rep.add("options.rsv", f"{opt.rsv} must be >= 0")
    if not opt.voll > 0:
        rep.add("options.voll", f"{opt.voll} must be > 0")
    if not opt.discount_rate >= 0:
        rep.add("options.discount_rate", f"{opt.discount_rate} must be >= 0")
    for e, v in opt.cap_target.items():
        if not 0 <= e < E:
            rep.add(f"options.cap_target[{e}]", "unknown epoch")
        if not (v >= 0 and math.isfinite(v)):
            rep.add(f"options.cap_target[{e}]", f"{v} must be finite and >= 0")
    if opt.reliability_mode == "elcc_market":
        for e in range(E):
            if e not in opt.cap_target:
                rep.add(f"options.cap_target[{e}]", "missing in elcc_market mode")
    return rep


def _unique(report, where, ids):
    seen = set()
    for i in ids:
        if i in seen:
            report.add(where, f"duplicate id {i!r}")
        seen.add(i)
