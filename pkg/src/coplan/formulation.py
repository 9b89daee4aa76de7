"""Assembly of the planning LPs from a :class:`~coplan.scenario.Scenario`.

Three program variants share one set of emitters:

``cooptimized``
    Generation, storage and transmission builds chosen jointly, zonal
    balance with corridor flows.
``copper_plate``
    No flow or line-build columns, no corridor rows, and one regional
    balance row per epoch-hour in place of the zonal rows.
``tep_fixed``
    The co-optimized program with every resource build pinned (lb = ub) to
    supplied values, leaving only line builds and operations free.

Builds persist: capacity available in epoch ``e`` is the exogenous capacity
plus every build from epochs ``0..e``. Those cumulative sums are written by
adding the earlier-epoch build columns straight into later-epoch rows.

Flow sign convention: positive flow moves power from ``from_zone`` to
``to_zone``, so a corridor enters the ``to_zone`` balance with +1 and the
``from_zone`` balance with -1.

Row and column counts per family (E epochs, Z zones, G generators, R of
them renewable, S storage techs, L corridors, H hours):

=====================  ==========================================
columns                count
=====================  ==========================================
gen_build              E*Z*G
stor_build             E*Z*S
line_build             E*L (not in copper_plate)
gen_dispatch           E*Z*G*H
stor_dispatch/charge   E*Z*S*H each
soc                    E*Z*S*H
flow                   E*L*H (not in copper_plate)
unserved               E*Z*H
rec                    E*Z*R
=====================  ==========================================

Rows: gen_limit E*Z*G*H; stor_discharge_limit, stor_charge_limit and
soc_limit E*Z*S*H each; soc_initial and soc_final E*Z*S; soc_balance
E*Z*S*(H-1); flow_ub and flow_lb E*L*H; balance E*Z*H (regional_balance E*H
in copper_plate); rec_def E*Z*R; regional_rps one per policy entry;
instate_rps one per (epoch, zone) with a positive requirement;
capacity_target E*(2**n - 1) per technology class with n target states;
reliability E in elcc_market mode; gen/stor_build_limit one per finite limit
when queue limits are on; line_reinforcement one per corridor with a factor.
"""

from __future__ import annotations

import bisect
import itertools
from dataclasses import dataclass
from typing import Iterator, Mapping, NamedTuple

import numpy as np

from .lp import EQ, GE, INF, LE, LinearProgram
from .scenario import MAX_TARGET_STATES, OptionsSpec, Scenario, TARGET_CLASSES

COOPTIMIZED = "cooptimized"
COPPER_PLATE = "copper_plate"
TEP_FIXED = "tep_fixed"
VARIANTS = (COOPTIMIZED, COPPER_PLATE, TEP_FIXED)


class FormulationError(ValueError):
    pass


# -- semantic keys -----------------------------------------------------------

class GenBuild(NamedTuple):
    epoch: int
    zone: str
    tech: str


class StorBuild(NamedTuple):
    epoch: int
    zone: str
    tech: str


class LineBuild(NamedTuple):
    epoch: int
    line: str


class GenDispatch(NamedTuple):
    epoch: int
    zone: str
    tech: str
    hour: int


class StorDispatch(NamedTuple):
    epoch: int
    zone: str
    tech: str
    hour: int


class StorCharge(NamedTuple):
    epoch: int
    zone: str
    tech: str
    hour: int


class Soc(NamedTuple):
    epoch: int
    zone: str
    tech: str
    hour: int


class Flow(NamedTuple):
    epoch: int
    line: str
    hour: int


class UnservedEnergy(NamedTuple):
    epoch: int
    zone: str
    hour: int


class Rec(NamedTuple):
    epoch: int
    zone: str
    tech: str


_PREFIX = {
    GenBuild: "gen_build", StorBuild: "stor_build", LineBuild: "line_build",
    GenDispatch: "gen_dispatch", StorDispatch: "stor_dispatch", StorCharge: "stor_charge",
    Soc: "soc", Flow: "flow", UnservedEnergy: "unserved", Rec: "rec",
}


# plain tuples of equal fields compare equal; keys of different kinds must not
def _key_eq(self, other):
    return type(self) is type(other) and tuple.__eq__(self, other)


def _key_ne(self, other):
    return not _key_eq(self, other)


def _key_hash(self):
    return hash((type(self).__name__, *self))


for _kind in _PREFIX:
    _kind.__eq__, _kind.__ne__, _kind.__hash__ = _key_eq, _key_ne, _key_hash


@dataclass
class _Block:
    kind: object  # key class for columns, family name for rows
    start: int
    labels: tuple

    def __post_init__(self):
        self.pos = tuple({v: i for i, v in enumerate(ax)} for ax in self.labels)
        self.shape = tuple(len(ax) for ax in self.labels)
        self.size = int(np.prod(self.shape, dtype=np.int64)) if self.shape else 1

    def ids(self) -> np.ndarray:
        return np.arange(self.start, self.start + self.size).reshape(self.shape)


class _BlockIndex:
    """Contiguous id ranges, one per family, addressed by labelled axes."""

    def __init__(self):
        self._blocks: dict = {}
        self._starts: list[int] = []
        self._order: list[_Block] = []
        self.size = 0

    def _add(self, kind, labels) -> _Block:
        if kind in self._blocks:
            raise FormulationError(f"family {kind} already indexed")
        block = _Block(kind, self.size, tuple(tuple(ax) for ax in labels))
        self._blocks[kind] = block
        self._starts.append(block.start)
        self._order.append(block)
        self.size += block.size
        return block

    def __contains__(self, kind) -> bool:
        return kind in self._blocks

    def block(self, kind) -> _Block:
        return self._blocks[kind]

    def ids(self, kind) -> np.ndarray:
        """Id array for a family, shaped by its axes (empty if absent)."""
        b = self._blocks.get(kind)
        return b.ids() if b is not None else np.empty(0, dtype=np.int64)

    def count(self, kind) -> int:
        b = self._blocks.get(kind)
        return b.size if b is not None else 0

    @property
    def families(self) -> list:
        return [b.kind for b in self._order if b.size]

    def _locate(self, idx: int):
        if not 0 <= idx < self.size:
            raise KeyError(idx)
        k = bisect.bisect_right(self._starts, idx) - 1
        while self._order[k].size == 0:
            k -= 1
        b = self._order[k]
        return b, np.unravel_index(idx - b.start, b.shape)


class VariableIndex(_BlockIndex):
    """Bijection between LP column ids and semantic keys like ``GenBuild(0, 'A', 'gas')``."""

    def __init__(self):
        super().__init__()
        self.rows = RowIndex()

    def add(self, kind, labels) -> _Block:
        return self._add(kind, labels)

    def column(self, key) -> int:
        b = self._blocks.get(type(key))
        if b is None:
            raise KeyError(key)
        try:
            offs = tuple(p[v] for p, v in zip(b.pos, key))
        except KeyError:
            raise KeyError(key) from None
        return b.start + int(np.ravel_multi_index(offs, b.shape))

    __getitem__ = column

    def key(self, col: int):
        b, offs = self._locate(int(col))
        return b.kind(*(ax[o] for ax, o in zip(b.labels, offs)))

    def __contains__(self, item) -> bool:
        if isinstance(item, type):
            return item in self._blocks
        try:
            self.column(item)
            return True
        except KeyError:
            return False

    def __len__(self) -> int:
        return self.size

    def __iter__(self) -> Iterator:
        for b in self._order:
            for combo in itertools.product(*b.labels):
                yield b.kind(*combo)


class RowIndex(_BlockIndex):
    """Row families; keys are ``(family, label, ...)`` tuples."""

    def add(self, family: str, labels) -> _Block:
        return self._add(family, labels)

    def row(self, family: str, *labels) -> int:
        b = self._blocks[family]
        offs = tuple(p[v] for p, v in zip(b.pos, labels))
        return b.start + int(np.ravel_multi_index(offs, b.shape))

    def key(self, row: int) -> tuple:
        b, offs = self._locate(int(row))
        return (b.kind, *(ax[o] for ax, o in zip(b.labels, offs)))

    def __len__(self) -> int:
        return self.size


# -- variants ------------------------------------------------------------------

@dataclass(frozen=True)
class BuildVariant:
    kind: str = COOPTIMIZED
    # GenBuild/StorBuild -> MW; only for tep_fixed, absent keys pin to 0
    fixed_builds: Mapping | None = None

    def __post_init__(self):
        if self.kind not in VARIANTS:
            raise FormulationError(f"unknown variant {self.kind!r}")
        if (self.fixed_builds is not None) != (self.kind == TEP_FIXED):
            raise FormulationError("fixed_builds must be given exactly for tep_fixed")
        if self.fixed_builds is not None:
            for k, v in self.fixed_builds.items():
                if not isinstance(k, (GenBuild, StorBuild)):
                    raise FormulationError(f"fixed build key {k!r} is not a resource build")
                if not v >= 0:
                    raise FormulationError(f"fixed build {k} = {v} must be >= 0")

    @property
    def has_network(self) -> bool:
        return self.kind != COPPER_PLATE


def cooptimized() -> BuildVariant:
    return BuildVariant(COOPTIMIZED)


def copper_plate() -> BuildVariant:
    return BuildVariant(COPPER_PLATE)


def tep_fixed(fixed_builds: Mapping) -> BuildVariant:
    return BuildVariant(TEP_FIXED, dict(fixed_builds))


# -- helpers -------------------------------------------------------------------

def _names(prefix: str, labels) -> list[str]:
    return [prefix + "_" + "_".join(map(str, combo)) for combo in itertools.product(*labels)]


def _cumulative_terms(lp, rows, build_ids, coeff):
    """Add ``coeff[e] * build[e']`` for every e' <= e.

    ``rows`` has shape (E, ...); ``build_ids`` has shape (E, ...) broadcastable
    against ``rows[e]``; ``coeff`` broadcasts against ``rows``.
    """
    coeff = np.broadcast_to(coeff, rows.shape)
    for e in range(rows.shape[0]):
        for ep in range(e + 1):
            cols = np.broadcast_to(build_ids[ep], rows[e].shape)
            lp.add_coeffs(rows[e].ravel(), cols.ravel(), coeff[e].ravel())


def _gen_cf(sc: Scenario) -> np.ndarray:
    """Capacity factors as (E, Z, G, H)."""
    if not sc.gen_techs:
        return np.zeros((len(sc.epochs), len(sc.zones), 0, sc.n_hours))
    return np.stack([g.cap_factor for g in sc.gen_techs], axis=2)


def _stack(techs, attr, axis) -> np.ndarray:
    return np.stack([getattr(t, attr) for t in techs], axis=axis)


def renewable_techs(sc: Scenario) -> list[str]:
    return [g.id for g in sc.gen_techs if "all_re" in g.policy_classes]


def _labels(sc: Scenario):
    epochs = [e.index for e in sc.epochs]
    zones = sc.zone_ids
    gens = [g.id for g in sc.gen_techs]
    stors = [s.id for s in sc.stor_techs]
    lines = [c.id for c in sc.corridors]
    hours = list(range(sc.n_hours))
    return epochs, zones, gens, stors, lines, hours


# -- program assembly ------------------------------------------------------------

def build_program(scenario: Scenario, variant: BuildVariant | str = COOPTIMIZED,
                  options: OptionsSpec | None = None) -> tuple[LinearProgram, VariableIndex]:
    """Assemble the LP for ``variant``; ``options`` overrides the scenario's own."""
    if isinstance(variant, str):
        if variant == TEP_FIXED:
            raise FormulationError("tep_fixed requires fixed_builds")
        variant = BuildVariant(variant)
    sc = scenario if options is None else _with(scenario, options)
    lp = LinearProgram(f"coplan_{variant.kind}")
    index = VariableIndex()
    _create_columns(lp, index, sc, variant)
    emit_generation_limits(lp, index, sc)
    emit_storage(lp, index, sc)
    if variant.has_network:
        emit_transmission(lp, index, sc)
    emit_power_balance(lp, index, sc, variant)
    emit_policy(lp, index, sc)
    emit_capacity_targets(lp, index, sc)
    emit_reliability(lp, index, sc)
    emit_build_limits(lp, index, sc)
    emit_objective(lp, index, sc, variant)
    return lp.finalize(), index


def _with(sc: Scenario, options: OptionsSpec) -> Scenario:
    import dataclasses

    return dataclasses.replace(sc, options=options)


def _create_columns(lp: LinearProgram, index: VariableIndex, sc: Scenario, variant: BuildVariant):
    epochs, zones, gens, stors, lines, hours = _labels(sc)
    res = renewable_techs(sc)

    def add(kind, labels, lb=0.0, ub=INF):
        index.add(kind, labels)
        lp.add_columns(_names(_PREFIX[kind], labels), lb, ub)

    add(GenBuild, (epochs, zones, gens))
    add(StorBuild, (epochs, zones, stors))
    if variant.has_network:
        add(LineBuild, (epochs, lines))
    add(GenDispatch, (epochs, zones, gens, hours))
    add(StorDispatch, (epochs, zones, stors, hours))
    add(StorCharge, (epochs, zones, stors, hours))
    add(Soc, (epochs, zones, stors, hours))
    if variant.has_network:
        add(Flow, (epochs, lines, hours), lb=-INF, ub=INF)
    # unserved energy never exceeds load
    add(UnservedEnergy, (epochs, zones, hours), ub=sc.load.ravel())
    add(Rec, (epochs, zones, res))

    if variant.kind == TEP_FIXED:
        fixed = variant.fixed_builds
        for kind in (GenBuild, StorBuild):
            ids = index.ids(kind).ravel()
            values = np.zeros(len(ids))
            for key, v in fixed.items():
                if isinstance(key, kind):
                    try:
                        values[index.column(key) - index.block(kind).start] = v
                    except KeyError:
                        raise FormulationError(f"fixed build {key} is not in the scenario") from None
            lp.set_bounds(ids, values, values)


def emit_objective(lp: LinearProgram, index: VariableIndex, sc: Scenario, variant: BuildVariant | None = None):
    """Discounted operating cost, lost-load penalty, and discounted investment."""
    w = sc.epoch_weights()
    inv = sc.investment_factors()
    if sc.gen_techs:
        var_cost = _stack(sc.gen_techs, "var_cost", axis=2)  # (E, Z, G)
        coef = var_cost[:, :, :, None] * w[:, None, None, None]
        ids = index.ids(GenDispatch)
        lp.set_objective(ids.ravel(), np.broadcast_to(coef, ids.shape).ravel())
        acc = _stack(sc.gen_techs, "annualized_cost", axis=2)
        lp.set_objective(index.ids(GenBuild).ravel(), (acc * inv[:, None, None]).ravel())
    if sc.stor_techs:
        acc = _stack(sc.stor_techs, "annualized_cost", axis=2)
        lp.set_objective(index.ids(StorBuild).ravel(), (acc * inv[:, None, None]).ravel())
    ue = index.ids(UnservedEnergy)
    lp.set_objective(ue.ravel(), np.broadcast_to(sc.options.voll * w[:, None, None], ue.shape).ravel())
    if LineBuild in index and sc.corridors:
        acc = np.array([c.annualized_cost for c in sc.corridors])
        lp.set_objective(index.ids(LineBuild).ravel(), (inv[:, None] * acc[None, :]).ravel())


def emit_generation_limits(lp: LinearProgram, index: VariableIndex, sc: Scenario):
    """Dispatch <= (existing + cumulative builds) * capacity factor, every hour."""
    epochs, zones, gens, _, _, hours = _labels(sc)
    index.rows.add("gen_limit", (epochs, zones, gens, hours))
    if not gens:
        return
    cf = _gen_cf(sc)
    cap = _stack(sc.gen_techs, "capacity", axis=2)  # (E, Z, G)
    rows = lp.add_rows(_names("gen_limit", (epochs, zones, gens, hours)), LE,
                       (cap[..., None] * cf).ravel()).reshape(cf.shape)
    lp.add_coeffs(rows.ravel(), index.ids(GenDispatch).ravel(), 1.0)
    _cumulative_terms(lp, rows, index.ids(GenBuild)[..., None], -cf)


def emit_storage(lp: LinearProgram, index: VariableIndex, sc: Scenario):
    """Power limits, energy limit, half-full boundary state of charge, and the
    hourly state-of-charge recursion with charging losses."""
    epochs, zones, _, stors, _, hours = _labels(sc)
    shape4 = (len(epochs), len(zones), len(stors), len(hours))
    for fam in ("stor_discharge_limit", "stor_charge_limit", "soc_limit"):
        index.rows.add(fam, (epochs, zones, stors, hours))
    index.rows.add("soc_initial", (epochs, zones, stors))
    index.rows.add("soc_balance", (epochs, zones, stors, hours[1:]))
    index.rows.add("soc_final", (epochs, zones, stors))
    if not stors:
        return
    H = len(hours)
    power = _stack(sc.stor_techs, "power_capacity", axis=2)  # (E, Z, S)
    energy = _stack(sc.stor_techs, "energy_capacity", axis=2)
    dur = np.array([s.duration for s in sc.stor_techs])
    eta = np.array([s.efficiency for s in sc.stor_techs])
    build = index.ids(StorBuild)[..., None]  # (E, Z, S, 1)
    dis, chg, soc = index.ids(StorDispatch), index.ids(StorCharge), index.ids(Soc)

    for fam, var in (("stor_discharge_limit", dis), ("stor_charge_limit", chg)):
        rows = lp.add_rows(_names(fam, (epochs, zones, stors, hours)), LE,
                           np.broadcast_to(power[..., None], shape4).ravel()).reshape(shape4)
        lp.add_coeffs(rows.ravel(), var.ravel(), 1.0)
        _cumulative_terms(lp, rows, build, -1.0)

    rows = lp.add_rows(_names("soc_limit", (epochs, zones, stors, hours)), LE,
                       np.broadcast_to(energy[..., None], shape4).ravel()).reshape(shape4)
    lp.add_coeffs(rows.ravel(), soc.ravel(), 1.0)
    _cumulative_terms(lp, rows, build, -np.broadcast_to(dur[None, None, :, None], shape4))

    half_dur = np.broadcast_to(-0.5 * dur[None, None, :], power.shape)
    # SOC_0 = half energy capacity + eta * charge_0 - discharge_0
    rows = lp.add_rows(_names("soc_initial", (epochs, zones, stors)), EQ, (0.5 * energy).ravel()).reshape(power.shape)
    lp.add_coeffs(rows.ravel(), soc[..., 0].ravel(), 1.0)
    lp.add_coeffs(rows.ravel(), chg[..., 0].ravel(), np.broadcast_to(-eta, power.shape).ravel())
    lp.add_coeffs(rows.ravel(), dis[..., 0].ravel(), 1.0)
    _cumulative_terms(lp, rows, index.ids(StorBuild), half_dur)

    if H > 1:
        shape_m = shape4[:3] + (H - 1,)
        rows = lp.add_rows(_names("soc_balance", (epochs, zones, stors, hours[1:])), EQ, 0.0).reshape(shape_m)
        lp.add_coeffs(rows.ravel(), soc[..., 1:].ravel(), 1.0)
        lp.add_coeffs(rows.ravel(), soc[..., :-1].ravel(), -1.0)
        lp.add_coeffs(rows.ravel(), chg[..., 1:].ravel(),
                      np.broadcast_to(-eta[None, None, :, None], shape_m).ravel())
        lp.add_coeffs(rows.ravel(), dis[..., 1:].ravel(), 1.0)

    rows = lp.add_rows(_names("soc_final", (epochs, zones, stors)), EQ, (0.5 * energy).ravel()).reshape(power.shape)
    lp.add_coeffs(rows.ravel(), soc[..., H - 1].ravel(), 1.0)
    _cumulative_terms(lp, rows, index.ids(StorBuild), half_dur)


def emit_transmission(lp: LinearProgram, index: VariableIndex, sc: Scenario):
    """Flow within [-(reverse cap + builds), forward cap + builds]; optional
    cumulative reinforcement caps."""
    epochs, _, _, _, lines, hours = _labels(sc)
    index.rows.add("flow_ub", (epochs, lines, hours))
    index.rows.add("flow_lb", (epochs, lines, hours))
    reinforced = [c for c in sc.corridors if c.max_reinforcement_factor is not None]
    index.rows.add("line_reinforcement", ([c.id for c in reinforced],))
    if not lines:
        return
    shape = (len(epochs), len(lines), len(hours))
    fwd = np.array([c.cap_forward for c in sc.corridors])
    rev = np.array([c.cap_reverse for c in sc.corridors])
    flow = index.ids(Flow)
    build = index.ids(LineBuild)[..., None]
    rows = lp.add_rows(_names("flow_ub", (epochs, lines, hours)), LE,
                       np.broadcast_to(fwd[None, :, None], shape).ravel()).reshape(shape)
    lp.add_coeffs(rows.ravel(), flow.ravel(), 1.0)
    _cumulative_terms(lp, rows, build, -1.0)
    rows = lp.add_rows(_names("flow_lb", (epochs, lines, hours)), GE,
                       np.broadcast_to(-rev[None, :, None], shape).ravel()).reshape(shape)
    lp.add_coeffs(rows.ravel(), flow.ravel(), 1.0)
    _cumulative_terms(lp, rows, build, 1.0)

    if reinforced:
        rows = lp.add_rows(_names("line_reinforcement", ([c.id for c in reinforced],)), LE,
                           [c.max_reinforcement_factor * max(c.cap_forward, c.cap_reverse) for c in reinforced])
        for r, c in zip(rows, reinforced):
            li = lines.index(c.id)
            lp.add_coeffs(r, build[:, li, 0], 1.0)


def line_incidence(sc: Scenario) -> np.ndarray:
    """(Z, L) matrix: +1 at a corridor's to_zone, -1 at its from_zone."""
    zpos = {z: i for i, z in enumerate(sc.zone_ids)}
    m = np.zeros((len(sc.zones), len(sc.corridors)))
    for li, c in enumerate(sc.corridors):
        m[zpos[c.to_zone], li] += 1.0
        m[zpos[c.from_zone], li] -= 1.0
    return m


def emit_power_balance(lp: LinearProgram, index: VariableIndex, sc: Scenario,
                       variant: BuildVariant | None = None):
    """Supply (+ net imports) equals load times (1 + reserve margin)."""
    variant = variant or cooptimized()
    epochs, zones, gens, stors, lines, hours = _labels(sc)
    E, Z, H = len(epochs), len(zones), len(hours)
    rsv = sc.options.effective_rsv
    target = sc.load * (1.0 + rsv)
    gen, dis, chg = index.ids(GenDispatch), index.ids(StorDispatch), index.ids(StorCharge)
    ue = index.ids(UnservedEnergy)

    if variant.has_network:
        index.rows.add("balance", (epochs, zones, hours))
        rows = lp.add_rows(_names("balance", (epochs, zones, hours)), EQ, target.ravel()).reshape(E, Z, H)
        zone_rows = rows
    else:
        index.rows.add("regional_balance", (epochs, hours))
        rows = lp.add_rows(_names("regional_balance", (epochs, hours)), EQ, target.sum(axis=1).ravel()).reshape(E, H)
        zone_rows = np.broadcast_to(rows[:, None, :], (E, Z, H))

    lp.add_coeffs(zone_rows.ravel(), ue.ravel(), 1.0)
    for k in range(len(gens)):
        lp.add_coeffs(zone_rows.ravel(), gen[:, :, k, :].ravel(), 1.0)
    for k in range(len(stors)):
        lp.add_coeffs(zone_rows.ravel(), dis[:, :, k, :].ravel(), 1.0)
        lp.add_coeffs(zone_rows.ravel(), chg[:, :, k, :].ravel(), -1.0)
    if variant.has_network and lines:
        flow = index.ids(Flow)  # (E, L, H)
        inc = line_incidence(sc)
        for z, li in zip(*np.nonzero(inc)):
            lp.add_coeffs(rows[:, z, :].ravel(), flow[:, li, :].ravel(), inc[z, li])


def instate_requirement(sc: Scenario) -> np.ndarray:
    """(E, Z) in-state REC floor in MWh."""
    E, Z = len(sc.epochs), len(sc.zones)
    share = np.zeros((E, Z))
    for (e, st), terms in sc.policies.instate_rps.items():
        for z, zone in enumerate(sc.zones):
            share[e, z] += terms.instate_fraction * terms.rps_fraction * zone.state_shares.get(st, 0.0)
    return sc.load.sum(axis=2) * share


def emit_policy(lp: LinearProgram, index: VariableIndex, sc: Scenario):
    """REC accounting, regional RPS by technology class, and in-state RPS."""
    epochs, zones, _, _, _, _ = _labels(sc)
    res = renewable_techs(sc)
    index.rows.add("rec_def", (epochs, zones, res))
    rec = index.ids(Rec)  # (E, Z, R)
    gen = index.ids(GenDispatch)
    gpos = {g.id: k for k, g in enumerate(sc.gen_techs)}
    H = sc.n_hours
    if res:
        rows = lp.add_rows(_names("rec_def", (epochs, zones, res)), EQ, 0.0).reshape(rec.shape)
        lp.add_coeffs(rows.ravel(), rec.ravel(), 1.0)
        for r, gid in enumerate(res):
            cols = gen[:, :, gpos[gid], :]  # (E, Z, H)
            lp.add_coeffs(np.repeat(rows[:, :, r].ravel(), H), cols.ravel(), -1.0)

    entries = sorted(sc.policies.regional_rps.items())
    index.rows.add("regional_rps", ([k for k, _ in entries],))
    if entries:
        rows = lp.add_rows([f"regional_rps_{e}_{p}" for (e, p), _ in entries], GE, [v for _, v in entries])
        for row, ((e, p), _) in zip(rows, entries):
            members = [r for r, gid in enumerate(res) if p in sc.gen(gid).policy_classes]
            if not members:
                raise FormulationError(f"policy class {p!r} has no member technology in the scenario")
            lp.add_coeffs(row, rec[e][:, members].ravel(), 1.0)

    req = instate_requirement(sc)
    active = [(e, z) for e in range(len(epochs)) for z in range(len(zones)) if req[e, z] > 0]
    index.rows.add("instate_rps", ([(epochs[e], zones[z]) for e, z in active],))
    if active:
        rows = lp.add_rows([f"instate_rps_{epochs[e]}_{zones[z]}" for e, z in active], GE,
                           [req[e, z] for e, z in active])
        for row, (e, z) in zip(rows, active):
            if res:
                lp.add_coeffs(row, rec[e, z], 1.0)


def target_subsets(states: list[str]) -> list[tuple[str, ...]]:
    """Every non-empty subset, by size then lexicographically."""
    if len(states) > MAX_TARGET_STATES:
        raise FormulationError(
            f"{len(states)} target states exceed the supported maximum of {MAX_TARGET_STATES}"
        )
    return [c for n in range(1, len(states) + 1) for c in itertools.combinations(states, n)]


def emit_capacity_targets(lp: LinearProgram, index: VariableIndex, sc: Scenario):
    """State capacity targets over every group of target states, counting a
    zone that overlaps several states in the group once."""
    epochs = [e.index for e in sc.epochs]
    keys, specs = [], []
    for cls in TARGET_CLASSES:
        states = sc.policies.target_states(cls)
        for e in epochs:
            for subset in target_subsets(states):
                keys.append((cls, e, subset))
    index.rows.add("capacity_target", (keys,))
    if not keys:
        return
    rhs = []
    for cls, e, subset in keys:
        zmask = np.array([1.0 if any(z.overlaps(st) for st in subset) else 0.0 for z in sc.zones])
        if cls == "storage":
            kind, techs = StorBuild, list(sc.stor_techs)
            existing = sum(s.power_capacity[e] for s in techs) if techs else np.zeros(len(sc.zones))
        else:
            kind, techs = GenBuild, [g for g in sc.gen_techs if g.in_target_class(cls)]
            existing = sum(g.capacity[e] for g in techs) if techs else np.zeros(len(sc.zones))
        need = sum(sc.policies.capacity_targets.get((e, st, cls), 0.0) for st in subset)
        rhs.append(need - float(np.dot(zmask, existing)))
        specs.append((kind, techs, zmask))
    names = [f"capacity_target_{cls}_{e}_{'+'.join(sub)}" for cls, e, sub in keys]
    rows = lp.add_rows(names, GE, rhs)
    for row, (cls, e, _), (kind, techs, zmask) in zip(rows, keys, specs):
        ids = index.ids(kind)  # (E, Z, T)
        pos = [k for k, t in enumerate(sc.stor_techs if kind is StorBuild else sc.gen_techs) if t in techs]
        zones = np.nonzero(zmask)[0]
        if not pos or not len(zones):
            continue
        cols = ids[: e + 1][:, zones][:, :, pos]
        lp.add_coeffs(row, cols.ravel(), 1.0)


def emit_reliability(lp: LinearProgram, index: VariableIndex, sc: Scenario):
    """ELCC-weighted capacity must reach the capacity-market target (elcc_market mode only)."""
    epochs = [e.index for e in sc.epochs]
    active = sc.options.reliability_mode == "elcc_market"
    index.rows.add("reliability", (epochs if active else [],))
    if not active:
        return
    missing = [e for e in epochs if e not in sc.options.cap_target]
    if missing:
        raise FormulationError(f"elcc_market mode needs cap_target for epochs {missing}")
    rhs = []
    for e in epochs:
        existing = sum(float(g.elcc[e] * g.capacity[e].sum()) for g in sc.gen_techs)
        existing += sum(float(s.elcc[e] * s.power_capacity[e].sum()) for s in sc.stor_techs)
        rhs.append(sc.options.cap_target[e] - existing)
    rows = lp.add_rows([f"reliability_{e}" for e in epochs], GE, rhs)
    gb, sb = index.ids(GenBuild), index.ids(StorBuild)
    for e, row in zip(epochs, rows):
        for k, g in enumerate(sc.gen_techs):
            lp.add_coeffs(row, gb[: e + 1, :, k].ravel(), g.elcc[e])
        for k, s in enumerate(sc.stor_techs):
            lp.add_coeffs(row, sb[: e + 1, :, k].ravel(), s.elcc[e])


def emit_build_limits(lp: LinearProgram, index: VariableIndex, sc: Scenario):
    """Cumulative build caps per (zone, technology) when queue limits are on."""
    on = sc.options.queue_limits_enabled
    for fam, kind, techs in (("gen_build_limit", GenBuild, sc.gen_techs),
                             ("stor_build_limit", StorBuild, sc.stor_techs)):
        keys = []
        if on:
            for k, t in enumerate(techs):
                for z, zid in enumerate(sc.zone_ids):
                    lim = t.build_limit[z]
                    if np.isnan(lim):
                        continue
                    if lim < 0:
                        raise FormulationError(f"negative build limit for {t.id} in {zid}")
                    keys.append((zid, t.id, z, k, float(lim)))
        index.rows.add(fam, ([(zid, tid) for zid, tid, *_ in keys],))
        if not keys:
            continue
        rows = lp.add_rows([f"{fam}_{zid}_{tid}" for zid, tid, *_ in keys], LE, [k[4] for k in keys])
        ids = index.ids(kind)
        for row, (_, _, z, k, _) in zip(rows, keys):
            lp.add_coeffs(row, ids[:, z, k], 1.0)


def expected_counts(sc: Scenario, kind: str = COOPTIMIZED) -> tuple[int, int]:
    """Closed-form (columns, rows) for a variant; see the module docstring."""
    E, Z, H = len(sc.epochs), len(sc.zones), sc.n_hours
    G, S, L = len(sc.gen_techs), len(sc.stor_techs), len(sc.corridors)
    R = len(renewable_techs(sc))
    net = kind != COPPER_PLATE
    cols = E * Z * G + E * Z * S + E * Z * G * H + 3 * E * Z * S * H + E * Z * H + E * Z * R
    if net:
        cols += E * L + E * L * H
    rows = E * Z * G * H + 3 * E * Z * S * H + 2 * E * Z * S + E * Z * S * (H - 1) + E * Z * R
    rows += (E * Z * H + 2 * E * L * H) if net else E * H
    if net:
        rows += sum(1 for c in sc.corridors if c.max_reinforcement_factor is not None)
    rows += len(sc.policies.regional_rps)
    rows += int((instate_requirement(sc) > 0).sum())
    for cls in TARGET_CLASSES:
        rows += E * (2 ** len(sc.policies.target_states(cls)) - 1)
    if sc.options.reliability_mode == "elcc_market":
        rows += E
    if sc.options.queue_limits_enabled:
        rows += sum(int(np.isfinite(t.build_limit).sum()) for t in (*sc.gen_techs, *sc.stor_techs))
    return cols, rows
