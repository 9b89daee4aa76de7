"""Reading and writing scenario directories.

Layout (UTF-8 CSV, 0-based hour index)::

    epochs.csv           epoch,start_year_offset,duration,label
    zones.csv            zone,lat,lon
    zone_states.csv      zone,state,share[,overlap]
    corridors.csv        corridor,from_zone,to_zone,cap_forward_mw,cap_reverse_mw,
                         length_miles,cost_per_mw_mile,crf,max_reinforcement_factor
    gen_techs.csv        tech,emission_rate,all_re,re,pv,wind,offshore_wind
    gen_capacity.csv     epoch,zone,tech,capacity_mw,var_cost,capital_cost,crf,elcc,build_limit_mw
    gen_capfactors.csv   epoch,zone,tech,hour,value
    stor_techs.csv       tech,duration_hours,efficiency
    stor_capacity.csv    epoch,zone,tech,power_mw,energy_mwh,capital_cost,crf,elcc,build_limit_mw
    load.csv             epoch,zone,hour,mw
    policies_rps.csv     epoch,policy_class,requirement_mwh
    policies_instate.csv epoch,state,rps_fraction,instate_fraction
    policies_targets.csv epoch,state,tech_class,mw
    options.json

``epochs.csv``, ``zones.csv``, ``gen_techs.csv``, ``gen_capacity.csv``,
``load.csv`` and ``options.json`` are required; the others may be absent,
which reads as empty. Capacity factors missing for an (epoch, zone, tech)
mean the technology is fully available every hour. Blank build limits mean
unlimited.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from .scenario import (
    CorridorSpec,
    EpochSpec,
    GenTechSpec,
    InstateRps,
    OptionsSpec,
    PolicySpec,
    Scenario,
    ScenarioError,
    StorTechSpec,
    ZoneSpec,
)

LOGGER = logging.getLogger(__name__)

REQUIRED_FILES = ("epochs.csv", "zones.csv", "gen_techs.csv", "gen_capacity.csv", "load.csv", "options.json")

_COLUMNS = {
    "epochs.csv": ["epoch", "start_year_offset", "duration", "label"],
    "zones.csv": ["zone", "lat", "lon"],
    "zone_states.csv": ["zone", "state", "share", "overlap"],
    "corridors.csv": [
        "corridor", "from_zone", "to_zone", "cap_forward_mw", "cap_reverse_mw",
        "length_miles", "cost_per_mw_mile", "crf", "max_reinforcement_factor",
    ],
    "gen_techs.csv": ["tech", "emission_rate", "all_re", "re", "pv", "wind", "offshore_wind"],
    "gen_capacity.csv": [
        "epoch", "zone", "tech", "capacity_mw", "var_cost", "capital_cost", "crf", "elcc", "build_limit_mw",
    ],
    "gen_capfactors.csv": ["epoch", "zone", "tech", "hour", "value"],
    "stor_techs.csv": ["tech", "duration_hours", "efficiency"],
    "stor_capacity.csv": [
        "epoch", "zone", "tech", "power_mw", "energy_mwh", "capital_cost", "crf", "elcc", "build_limit_mw",
    ],
    "load.csv": ["epoch", "zone", "hour", "mw"],
    "policies_rps.csv": ["epoch", "policy_class", "requirement_mwh"],
    "policies_instate.csv": ["epoch", "state", "rps_fraction", "instate_fraction"],
    "policies_targets.csv": ["epoch", "state", "tech_class", "mw"],
}

_OPTIONAL_COLUMNS = {
    "epochs.csv": {"label"},
    "zones.csv": {"lat", "lon"},
    "zone_states.csv": {"overlap"},
    "corridors.csv": {"cost_per_mw_mile", "crf", "max_reinforcement_factor"},
    "gen_techs.csv": {"emission_rate", "all_re", "re", "pv", "wind", "offshore_wind"},
    "gen_capacity.csv": {"capital_cost", "crf", "elcc", "build_limit_mw"},
    "stor_capacity.csv": {"energy_mwh", "capital_cost", "crf", "elcc", "build_limit_mw"},
    "stor_techs.csv": {"efficiency"},
}


class _Table:
    """A CSV file read as strings, with located numeric/id parsing."""

    def __init__(self, root: Path, name: str, required: bool):
        self.name = name
        path = root / name
        if not path.exists():
            if required:
                raise ScenarioError("required file is missing", file=name)
            self.df = pd.DataFrame({c: pd.Series(dtype=str) for c in _COLUMNS[name]})
            return
        try:
            self.df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
        except (pd.errors.ParserError, UnicodeDecodeError) as exc:
            raise ScenarioError(f"cannot parse CSV ({exc})", file=name) from exc
        self.df.columns = [c.strip() for c in self.df.columns]
        optional = _OPTIONAL_COLUMNS.get(name, set())
        for col in _COLUMNS[name]:
            if col not in self.df.columns:
                if col not in optional:
                    raise ScenarioError(f"missing column {col!r}", file=name)
                self.df[col] = ""
        for col in self.df.columns:
            self.df[col] = self.df[col].str.strip()

    def __len__(self) -> int:
        return len(self.df)

    def row_of(self, i: int) -> int:
        # header is line 1
        return int(i) + 2

    def text(self, col: str) -> np.ndarray:
        values = self.df[col].to_numpy(dtype=object)
        blank = values == ""
        if blank.any():
            i = int(np.argmax(blank))
            raise ScenarioError(f"empty {col!r}", file=self.name, row=self.row_of(i))
        return values

    def number(self, col: str, default: float | None = None) -> np.ndarray:
        raw = self.df[col]
        # python's float() rounds correctly, so written values read back exactly
        values = np.array([_to_float(v) for v in raw], dtype=float)
        blank = (raw == "").to_numpy()
        if default is not None:
            values[blank] = default
        bad = np.isnan(values) & ~(blank & (default is not None))
        # 'nan' typed explicitly is malformed too
        if bad.any():
            i = int(np.argmax(bad))
            kind = "missing" if blank[i] else f"malformed value {raw.iloc[i]!r}"
            raise ScenarioError(f"{kind} in column {col!r}", file=self.name, row=self.row_of(i))
        return values

    def integer(self, col: str) -> np.ndarray:
        values = self.number(col)
        frac = values != np.round(values)
        if frac.any():
            i = int(np.argmax(frac))
            raise ScenarioError(f"non-integer {col!r}", file=self.name, row=self.row_of(i))
        return values.astype(np.int64)

    def flag(self, col: str) -> np.ndarray:
        raw = self.df[col].str.lower()
        ok = raw.isin(["", "0", "1", "true", "false", "yes", "no"])
        if not ok.all():
            i = int(np.argmax(~ok.to_numpy()))
            raise ScenarioError(f"malformed flag in column {col!r}", file=self.name, row=self.row_of(i))
        return raw.isin(["1", "true", "yes"]).to_numpy()

    def lookup(self, col: str, known: dict) -> np.ndarray:
        values = self.text(col)
        out = np.empty(len(values), dtype=np.int64)
        for i, v in enumerate(values):
            try:
                out[i] = known[v]
            except KeyError:
                raise ScenarioError(
                    f"unknown {col} {v!r} (dangling reference)", file=self.name, row=self.row_of(i)
                ) from None
        return out


def _to_float(text) -> float:
    try:
        value = float(text)
    except (TypeError, ValueError):
        return np.nan
    return value if np.isfinite(value) else np.nan


def _positions(ids) -> dict:
    return {v: i for i, v in enumerate(ids)}


def _grid(table: _Table, keys: tuple, shape: tuple, what: str):
    """Check every cell of ``shape`` is covered exactly once by ``keys``."""
    flat = np.ravel_multi_index(keys, shape)
    uniq, first, counts = np.unique(flat, return_index=True, return_counts=True)
    if (counts > 1).any():
        i = first[np.argmax(counts > 1)]
        dup = np.nonzero(flat == flat[i])[0][1]
        raise ScenarioError(f"duplicate {what} row", file=table.name, row=table.row_of(dup))
    if len(uniq) != int(np.prod(shape)):
        missing = np.setdiff1d(np.arange(int(np.prod(shape))), uniq)[0]
        idx = np.unravel_index(missing, shape)
        raise ScenarioError(f"series-length mismatch: no row for {what} position {tuple(int(i) for i in idx)}",
                            file=table.name)
    return flat


def _per_tech_constant(table, values, epochs, zones, tech_pos, n_tech, axis_len, along, what):
    """Collapse a (epoch, zone)-keyed column that must not vary along ``along``."""
    out = np.full((n_tech, axis_len), np.nan)
    seen = np.zeros((n_tech, axis_len), dtype=bool)
    key = epochs if along == "zone" else zones
    for i, (t, k, v) in enumerate(zip(tech_pos, key, values)):
        if seen[t, k]:
            same = (np.isnan(out[t, k]) and np.isnan(v)) or out[t, k] == v
            if not same:
                raise ScenarioError(f"{what} must not vary by {along}", file=table.name, row=table.row_of(i))
        else:
            out[t, k] = v
            seen[t, k] = True
    return out


def load_scenario(path) -> Scenario:
    """Read a scenario directory (see module docstring for the file set)."""
    root = Path(path)
    if not root.is_dir():
        raise ScenarioError(f"scenario directory {str(root)!r} does not exist")
    for name in REQUIRED_FILES:
        if not (root / name).exists():
            raise ScenarioError("required file is missing", file=name)

    t = _Table(root, "epochs.csv", True)
    idx = t.integer("epoch")
    order = np.argsort(idx, kind="stable")
    starts, durs, labels = t.integer("start_year_offset"), t.integer("duration"), t.df["label"].to_numpy()
    epochs = [EpochSpec(int(idx[i]), int(starts[i]), int(durs[i]), str(labels[i])) for i in order]
    for pos, e in enumerate(epochs):
        if e.index != pos:
            raise ScenarioError(f"epoch indices must be 0..{len(epochs) - 1}", file=t.name)
    E = len(epochs)
    epoch_pos = {str(e.index): e.index for e in epochs}

    t = _Table(root, "zones.csv", True)
    zone_ids = [str(z) for z in t.text("zone")]
    lat = t.number("lat", default=np.nan)
    lon = t.number("lon", default=np.nan)
    Z = len(zone_ids)
    zone_pos = _positions(zone_ids)
    if len(zone_pos) != Z:
        raise ScenarioError("duplicate zone id", file=t.name)

    shares: list[dict] = [dict() for _ in range(Z)]
    overlaps: list[dict] = [dict() for _ in range(Z)]
    t = _Table(root, "zone_states.csv", False)
    if len(t):
        zp = t.lookup("zone", zone_pos)
        states = t.text("state")
        sh = t.number("share")
        ov = t.number("overlap", default=1.0)
        for z, st, s, o in zip(zp, states, sh, ov):
            shares[z][str(st)] = float(s)
            overlaps[z][str(st)] = int(o)
    zones = [
        ZoneSpec(
            zid,
            None if np.isnan(lat[i]) else float(lat[i]),
            None if np.isnan(lon[i]) else float(lon[i]),
            shares[i],
            overlaps[i],
        )
        for i, zid in enumerate(zone_ids)
    ]

    t = _Table(root, "corridors.csv", False)
    corridors = []
    if len(t):
        ids = t.text("corridor")
        t.lookup("from_zone", zone_pos)
        t.lookup("to_zone", zone_pos)
        fz, tz = t.text("from_zone"), t.text("to_zone")
        fwd, rev, length = t.number("cap_forward_mw"), t.number("cap_reverse_mw"), t.number("length_miles")
        cost, crf = t.number("cost_per_mw_mile", default=0.0), t.number("crf", default=1.0)
        reinf = t.number("max_reinforcement_factor", default=np.nan)
        for i in range(len(t)):
            corridors.append(
                CorridorSpec(
                    str(ids[i]), str(fz[i]), str(tz[i]), float(fwd[i]), float(rev[i]), float(length[i]),
                    float(cost[i]), float(crf[i]), None if np.isnan(reinf[i]) else float(reinf[i]),
                )
            )

    # hour count comes from the load file
    t = _Table(root, "load.csv", True)
    le, lz, lh = t.lookup("epoch", epoch_pos), t.lookup("zone", zone_pos), t.integer("hour")
    mw = t.number("mw")
    if len(t) == 0:
        raise ScenarioError("no load rows", file=t.name)
    if (lh < 0).any():
        i = int(np.argmax(lh < 0))
        raise ScenarioError("negative hour index", file=t.name, row=t.row_of(i))
    H = int(lh.max()) + 1
    flat = _grid(t, (le, lz, lh), (E, Z, H), "(epoch, zone, hour)")
    load = np.empty(E * Z * H)
    load[flat] = mw
    load = load.reshape(E, Z, H)

    t = _Table(root, "gen_techs.csv", True)
    gen_ids = [str(g) for g in t.text("tech")]
    gen_pos = _positions(gen_ids)
    if len(gen_pos) != len(gen_ids):
        raise ScenarioError("duplicate technology id", file=t.name)
    G = len(gen_ids)
    emis = t.number("emission_rate", default=np.nan)  # blank: unknown rate
    class_flags = {c: t.flag(c) for c in ("all_re", "re", "pv", "wind")}
    ofs = t.flag("offshore_wind")

    t = _Table(root, "gen_capacity.csv", True)
    ge, gz, gg = t.lookup("epoch", epoch_pos), t.lookup("zone", zone_pos), t.lookup("tech", gen_pos)
    flat = _grid(t, (gg, ge, gz), (G, E, Z), "(tech, epoch, zone)")
    cols = {}
    for col, default in (("capacity_mw", None), ("var_cost", None), ("capital_cost", 0.0), ("crf", 1.0)):
        arr = np.empty(G * E * Z)
        arr[flat] = t.number(col, default=default)
        cols[col] = arr.reshape(G, E, Z)
    gen_elcc = _per_tech_constant(t, t.number("elcc", default=1.0), ge, gz, gg, G, E, "zone", "elcc")
    gen_limit = _per_tech_constant(
        t, t.number("build_limit_mw", default=np.nan), ge, gz, gg, G, Z, "epoch", "build_limit_mw"
    )

    cf = np.ones((G, E, Z, H))
    t = _Table(root, "gen_capfactors.csv", False)
    if len(t):
        ce, cz, cg = t.lookup("epoch", epoch_pos), t.lookup("zone", zone_pos), t.lookup("tech", gen_pos)
        ch = t.integer("hour")
        val = t.number("value")
        out_of_range = (ch < 0) | (ch >= H)
        if out_of_range.any():
            i = int(np.argmax(out_of_range))
            raise ScenarioError(f"hour {ch[i]} outside 0..{H - 1} (series-length mismatch)",
                                file=t.name, row=t.row_of(i))
        series = np.ravel_multi_index((cg, ce, cz), (G, E, Z))
        flat = np.ravel_multi_index((cg, ce, cz, ch), (G, E, Z, H))
        uniq, counts = np.unique(flat, return_counts=True)
        if (counts > 1).any():
            dup = uniq[np.argmax(counts > 1)]
            i = int(np.nonzero(flat == dup)[0][1])
            raise ScenarioError("duplicate capacity factor row", file=t.name, row=t.row_of(i))
        s_uniq, s_counts = np.unique(series, return_counts=True)
        if (s_counts != H).any():
            bad = s_uniq[np.argmax(s_counts != H)]
            g_, e_, z_ = np.unravel_index(bad, (G, E, Z))
            raise ScenarioError(
                f"series-length mismatch: {int(s_counts[np.argmax(s_counts != H)])} hours for "
                f"({epochs[e_].index}, {zone_ids[z_]}, {gen_ids[g_]}), load has {H}",
                file=t.name,
            )
        cf.reshape(-1)[flat] = val

    gens = []
    for i, gid in enumerate(gen_ids):
        classes = frozenset(c for c, f in class_flags.items() if f[i])
        gens.append(
            GenTechSpec(
                id=gid,
                capacity=cols["capacity_mw"][i],
                var_cost=cols["var_cost"][i],
                capital_cost=cols["capital_cost"][i],
                crf=cols["crf"][i],
                elcc=gen_elcc[i],
                build_limit=gen_limit[i],
                cap_factor=cf[i],
                emission_rate=float(emis[i]),
                policy_classes=classes,
                offshore_wind=bool(ofs[i]),
            )
        )

    t = _Table(root, "stor_techs.csv", False)
    stor_ids = [str(s) for s in t.text("tech")] if len(t) else []
    stor_pos = _positions(stor_ids)
    if len(stor_pos) != len(stor_ids):
        raise ScenarioError("duplicate technology id", file=t.name)
    S = len(stor_ids)
    durations = t.number("duration_hours") if S else np.array([])
    effs = t.number("efficiency", default=0.85) if S else np.array([])

    t = _Table(root, "stor_capacity.csv", False)
    scols = {c: np.zeros((S, E, Z)) for c in ("power_mw", "energy_mwh", "capital_cost", "crf")}
    stor_elcc = np.ones((S, E))
    stor_limit = np.full((S, Z), np.nan)
    if S:
        se, sz, ss = t.lookup("epoch", epoch_pos), t.lookup("zone", zone_pos), t.lookup("tech", stor_pos)
        flat = _grid(t, (ss, se, sz), (S, E, Z), "(tech, epoch, zone)")
        power = t.number("power_mw")
        energy = t.number("energy_mwh", default=np.nan)
        # blank energy means duration x power
        energy = np.where(np.isnan(energy), power * durations[ss], energy)
        for col, vals in (
            ("power_mw", power),
            ("energy_mwh", energy),
            ("capital_cost", t.number("capital_cost", default=0.0)),
            ("crf", t.number("crf", default=1.0)),
        ):
            arr = np.empty(S * E * Z)
            arr[flat] = vals
            scols[col] = arr.reshape(S, E, Z)
        stor_elcc = _per_tech_constant(t, t.number("elcc", default=1.0), se, sz, ss, S, E, "zone", "elcc")
        stor_limit = _per_tech_constant(
            t, t.number("build_limit_mw", default=np.nan), se, sz, ss, S, Z, "epoch", "build_limit_mw"
        )
    elif len(t):
        raise ScenarioError("storage capacity rows without stor_techs.csv", file=t.name)
    stors = [
        StorTechSpec(
            id=sid,
            power_capacity=scols["power_mw"][i],
            energy_capacity=scols["energy_mwh"][i],
            capital_cost=scols["capital_cost"][i],
            crf=scols["crf"][i],
            elcc=stor_elcc[i],
            build_limit=stor_limit[i],
            duration=float(durations[i]),
            efficiency=float(effs[i]),
        )
        for i, sid in enumerate(stor_ids)
    ]

    policies = _load_policies(root, epoch_pos)
    options = _load_options(root / "options.json", epoch_pos)
    return Scenario(tuple(epochs), tuple(zones), tuple(corridors), tuple(gens), tuple(stors), load,
                    policies, options)


def _load_policies(root: Path, epoch_pos: dict) -> PolicySpec:
    regional = {}
    t = _Table(root, "policies_rps.csv", False)
    if len(t):
        for i, (e, p, v) in enumerate(zip(t.lookup("epoch", epoch_pos), t.text("policy_class"),
                                          t.number("requirement_mwh"))):
            key = (int(e), str(p))
            if key in regional:
                raise ScenarioError("duplicate policy row", file=t.name, row=t.row_of(i))
            regional[key] = float(v)
    instate = {}
    t = _Table(root, "policies_instate.csv", False)
    if len(t):
        for i, (e, st, f, fi) in enumerate(zip(t.lookup("epoch", epoch_pos), t.text("state"),
                                               t.number("rps_fraction"), t.number("instate_fraction"))):
            key = (int(e), str(st))
            if key in instate:
                raise ScenarioError("duplicate policy row", file=t.name, row=t.row_of(i))
            instate[key] = InstateRps(float(f), float(fi))
    targets = {}
    t = _Table(root, "policies_targets.csv", False)
    if len(t):
        for i, (e, st, c, v) in enumerate(zip(t.lookup("epoch", epoch_pos), t.text("state"),
                                              t.text("tech_class"), t.number("mw"))):
            key = (int(e), str(st), str(c))
            if key in targets:
                raise ScenarioError("duplicate policy row", file=t.name, row=t.row_of(i))
            targets[key] = float(v)
    return PolicySpec(regional, instate, targets)


def _load_options(path: Path, epoch_pos: dict) -> OptionsSpec:
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"malformed JSON ({exc})", file=path.name, row=exc.lineno) from exc
    if not isinstance(raw, dict):
        raise ScenarioError("top level must be an object", file=path.name)
    known = {"reliability_mode", "rsv", "cap_target", "queue_limits_enabled", "voll", "discount_rate"}
    unknown = set(raw) - known
    if unknown:
        raise ScenarioError(f"unknown keys {sorted(unknown)}", file=path.name)
    cap_target = {}
    for k, v in (raw.get("cap_target") or {}).items():
        if str(k) not in epoch_pos:
            raise ScenarioError(f"cap_target for unknown epoch {k!r}", file=path.name)
        cap_target[epoch_pos[str(k)]] = float(v)
    defaults = OptionsSpec()
    try:
        return OptionsSpec(
            reliability_mode=str(raw.get("reliability_mode", defaults.reliability_mode)),
            rsv=float(raw.get("rsv", defaults.rsv)),
            cap_target=cap_target,
            queue_limits_enabled=bool(raw.get("queue_limits_enabled", defaults.queue_limits_enabled)),
            voll=float(raw.get("voll", defaults.voll)),
            discount_rate=float(raw.get("discount_rate", defaults.discount_rate)),
        )
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"bad option value ({exc})", file=path.name) from exc


# ---------------------------------------------------------------------------
# writing
# ---------------------------------------------------------------------------


def _write(df: pd.DataFrame, path: Path) -> None:
    df.to_csv(path, index=False, na_rep="", lineterminator="\n")


def write_scenario(scenario: Scenario, path) -> Path:
    """Serialize ``scenario`` so that :func:`load_scenario` reproduces it exactly."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    sc = scenario
    E, Z, H = len(sc.epochs), len(sc.zones), sc.n_hours
    zid = sc.zone_ids

    _write(pd.DataFrame(
        [(e.index, e.start_year_offset, e.duration, e.label) for e in sc.epochs], columns=_COLUMNS["epochs.csv"]
    ), root / "epochs.csv")
    _write(pd.DataFrame([(z.id, z.lat, z.lon) for z in sc.zones], columns=_COLUMNS["zones.csv"]),
           root / "zones.csv")
    rows = []
    for z in sc.zones:
        for st in sorted(set(z.state_shares) | set(z.state_overlap)):
            rows.append((z.id, st, z.state_shares.get(st, 0.0), z.state_overlap.get(st, 0)))
    _write(pd.DataFrame(rows, columns=_COLUMNS["zone_states.csv"]), root / "zone_states.csv")
    _write(pd.DataFrame(
        [(c.id, c.from_zone, c.to_zone, c.cap_forward, c.cap_reverse, c.length, c.cost_per_mw_mile, c.crf,
          c.max_reinforcement_factor) for c in sc.corridors],
        columns=_COLUMNS["corridors.csv"],
    ), root / "corridors.csv")

    _write(pd.DataFrame(
        [(g.id, g.emission_rate, *(int(c in g.policy_classes) for c in ("all_re", "re", "pv", "wind")),
          int(g.offshore_wind)) for g in sc.gen_techs],
        columns=_COLUMNS["gen_techs.csv"],
    ), root / "gen_techs.csv")
    rows = []
    for g in sc.gen_techs:
        for e in range(E):
            for z in range(Z):
                rows.append((sc.epochs[e].index, zid[z], g.id, g.capacity[e, z], g.var_cost[e, z],
                             g.capital_cost[e, z], g.crf[e, z], g.elcc[e], g.build_limit[z]))
    _write(pd.DataFrame(rows, columns=_COLUMNS["gen_capacity.csv"]), root / "gen_capacity.csv")

    frames = []
    hours = np.arange(H)
    for g in sc.gen_techs:
        for e in range(E):
            for z in range(Z):
                frames.append(pd.DataFrame({
                    "epoch": sc.epochs[e].index, "zone": zid[z], "tech": g.id, "hour": hours,
                    "value": g.cap_factor[e, z],
                }))
    cf = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=_COLUMNS["gen_capfactors.csv"])
    _write(cf, root / "gen_capfactors.csv")

    _write(pd.DataFrame([(s.id, s.duration, s.efficiency) for s in sc.stor_techs],
                        columns=_COLUMNS["stor_techs.csv"]), root / "stor_techs.csv")
    rows = []
    for s in sc.stor_techs:
        for e in range(E):
            for z in range(Z):
                rows.append((sc.epochs[e].index, zid[z], s.id, s.power_capacity[e, z], s.energy_capacity[e, z],
                             s.capital_cost[e, z], s.crf[e, z], s.elcc[e], s.build_limit[z]))
    _write(pd.DataFrame(rows, columns=_COLUMNS["stor_capacity.csv"]), root / "stor_capacity.csv")

    frames = [
        pd.DataFrame({"epoch": sc.epochs[e].index, "zone": zid[z], "hour": hours, "mw": sc.load[e, z]})
        for e in range(E) for z in range(Z)
    ]
    _write(pd.concat(frames, ignore_index=True), root / "load.csv")

    pol = sc.policies
    _write(pd.DataFrame([(e, p, v) for (e, p), v in sorted(pol.regional_rps.items())],
                        columns=_COLUMNS["policies_rps.csv"]), root / "policies_rps.csv")
    _write(pd.DataFrame([(e, st, v.rps_fraction, v.instate_fraction) for (e, st), v in sorted(pol.instate_rps.items())],
                        columns=_COLUMNS["policies_instate.csv"]), root / "policies_instate.csv")
    _write(pd.DataFrame([(e, st, c, v) for (e, st, c), v in sorted(pol.capacity_targets.items())],
                        columns=_COLUMNS["policies_targets.csv"]), root / "policies_targets.csv")

    opt = sc.options
    options = {
        "reliability_mode": opt.reliability_mode,
        "rsv": opt.rsv,
        "cap_target": {str(sc.epochs[e].index): v for e, v in sorted(opt.cap_target.items())},
        "queue_limits_enabled": opt.queue_limits_enabled,
        "voll": opt.voll,
        "discount_rate": opt.discount_rate,
    }
    (root / "options.json").write_text(json.dumps(options, indent=2) + "\n", encoding="utf-8")
    return root
