"""Solver-independent check of a plan against the model's constraints.

Every constraint family is re-evaluated from the semantic solution arrays and
scenario data alone; nothing here reads the assembled LP matrix. Cumulative
capacity is rebuilt with ``cumsum`` and capacity-target groups are enumerated
afresh, so the audit exercises a different route than model assembly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .planner import COPPER_PLATE, PlanSolution
from .scenario import Scenario, TARGET_CLASSES

TOL = 1e-6


@dataclass(frozen=True)
class AuditViolation:
    family: str
    location: tuple
    excess: float  # amount by which the row is violated

    def __str__(self) -> str:
        return f"{self.family}{self.location}: off by {self.excess:.3g}"


class _Checker:
    def __init__(self, tol: float):
        self.tol = tol
        self.found: list[AuditViolation] = []
        self.checked: dict[str, int] = {}

    def _record(self, family, gap, rhs, labels):
        gap = np.atleast_1d(np.asarray(gap, dtype=float))
        rhs = np.broadcast_to(np.asarray(rhs, dtype=float), gap.shape)
        self.checked[family] = self.checked.get(family, 0) + gap.size
        bad = gap > self.tol * (1.0 + np.abs(rhs))
        for idx in zip(*np.nonzero(bad)):
            loc = tuple(ax[i] for ax, i in zip(labels, idx)) if labels else idx
            self.found.append(AuditViolation(family, loc, float(gap[idx])))

    def le(self, family, lhs, rhs, labels=None):
        lhs = np.asarray(lhs, dtype=float)
        self._record(family, lhs - np.broadcast_to(rhs, lhs.shape), rhs, labels)

    def ge(self, family, lhs, rhs, labels=None):
        lhs = np.asarray(lhs, dtype=float)
        self._record(family, np.broadcast_to(rhs, lhs.shape) - lhs, rhs, labels)

    def eq(self, family, lhs, rhs, labels=None):
        lhs = np.asarray(lhs, dtype=float)
        self._record(family, np.abs(lhs - np.broadcast_to(rhs, lhs.shape)), rhs, labels)


@dataclass(frozen=True)
class AuditReport:
    violations: tuple
    checked: dict  # family -> number of rows evaluated

    @property
    def ok(self) -> bool:
        return not self.violations

    def __len__(self) -> int:
        return len(self.violations)


def audit(solution: PlanSolution, scenario: Scenario, fixed_builds: dict | None = None,
          tol: float = TOL) -> AuditReport:
    """Re-check every constraint active for the solution's mode."""
    if solution.scenario_fingerprint != scenario.fingerprint():
        raise ValueError("solution was produced from a different scenario")
    sc, s = scenario, solution
    ck = _Checker(tol)
    ep, zn, gn, st, ln = s.epochs, s.zones, s.gens, s.stors, s.lines
    hr = tuple(range(sc.n_hours))
    network = s.mode != COPPER_PLATE

    # variable domains
    for name in ("gen_build", "stor_build", "line_build", "gen_dispatch", "stor_dispatch",
                 "stor_charge", "soc", "unserved"):
        arr = getattr(s, name)
        ck.ge(f"nonnegative:{name}", arr, 0.0)
    ck.le("unserved_le_load", s.unserved, sc.load, (ep, zn, hr))

    # generation
    gen_cap = np.stack([g.capacity for g in sc.gen_techs], axis=2) if gn else np.zeros((len(ep), len(zn), 0))
    gen_avail = gen_cap + np.cumsum(s.gen_build, axis=0)
    cf = np.stack([g.cap_factor for g in sc.gen_techs], axis=2) if gn else np.zeros(s.gen_dispatch.shape)
    ck.le("gen_limit", s.gen_dispatch, gen_avail[..., None] * cf, (ep, zn, gn, hr))

    # storage
    if st:
        cum = np.cumsum(s.stor_build, axis=0)
        power = np.stack([t.power_capacity for t in sc.stor_techs], axis=2) + cum
        dur = np.array([t.duration for t in sc.stor_techs])
        eta = np.array([t.efficiency for t in sc.stor_techs])
        energy = np.stack([t.energy_capacity for t in sc.stor_techs], axis=2) + dur * cum
        labels = (ep, zn, st, hr)
        ck.le("stor_discharge_limit", s.stor_dispatch, power[..., None], labels)
        ck.le("stor_charge_limit", s.stor_charge, power[..., None], labels)
        ck.le("soc_limit", s.soc, energy[..., None], labels)
        ck.eq("soc_initial", s.soc[..., 0],
              0.5 * energy + eta * s.stor_charge[..., 0] - s.stor_dispatch[..., 0], (ep, zn, st))
        ck.eq("soc_balance", s.soc[..., 1:],
              s.soc[..., :-1] + eta[:, None] * s.stor_charge[..., 1:] - s.stor_dispatch[..., 1:],
              (ep, zn, st, hr[1:]))
        ck.eq("soc_final", s.soc[..., -1], 0.5 * energy, (ep, zn, st))

    # transmission and balance
    net_supply = s.gen_dispatch.sum(axis=2) + s.stor_dispatch.sum(axis=2) - s.stor_charge.sum(axis=2) + s.unserved
    need = sc.load * (1.0 + sc.options.effective_rsv)
    if network:
        cum = np.cumsum(s.line_build, axis=0)
        fwd = np.array([c.cap_forward for c in sc.corridors])
        rev = np.array([c.cap_reverse for c in sc.corridors])
        ck.le("flow_ub", s.flow, (fwd + cum)[..., None], (ep, ln, hr))
        ck.ge("flow_lb", s.flow, -(rev + cum)[..., None], (ep, ln, hr))
        imports = np.zeros_like(need)
        for li, c in enumerate(sc.corridors):
            imports[:, zn.index(c.to_zone), :] += s.flow[:, li, :]
            imports[:, zn.index(c.from_zone), :] -= s.flow[:, li, :]
        ck.eq("balance", net_supply + imports, need, (ep, zn, hr))
        total = s.line_build.sum(axis=0)
        for li, c in enumerate(sc.corridors):
            if c.max_reinforcement_factor is not None:
                ck.le("line_reinforcement", total[li], c.max_reinforcement_factor * max(c.cap_forward, c.cap_reverse),
                      ((c.id,),))
    else:
        ck.eq("regional_balance", net_supply.sum(axis=1), need.sum(axis=1), (ep, hr))

    # renewable credits: annual qualifying generation
    annual = s.gen_dispatch.sum(axis=3)  # (E, Z, G)
    for (e, cls), req in sc.policies.regional_rps.items():
        members = [k for k, g in enumerate(sc.gen_techs) if cls in g.policy_classes and "all_re" in g.policy_classes]
        ck.ge("regional_rps", annual[e][:, members].sum(), req, (((e, cls),),))
    all_re = [k for k, g in enumerate(sc.gen_techs) if "all_re" in g.policy_classes]
    for e in range(len(ep)):
        for z, zone in enumerate(sc.zones):
            req = 0.0
            for (pe, state), terms in sc.policies.instate_rps.items():
                if pe == e:
                    req += terms.rps_fraction * terms.instate_fraction * zone.state_shares.get(state, 0.0)
            req *= float(sc.load[e, z].sum())
            if req > 0:
                ck.ge("instate_rps", annual[e, z, all_re].sum(), req, (((ep[e], zone.id),),))

    # capacity targets, every group of target states
    for cls in TARGET_CLASSES:
        states = sorted({state for (_, state, c) in sc.policies.capacity_targets if c == cls})
        if cls == "storage":
            cap = (np.stack([t.power_capacity for t in sc.stor_techs], axis=2) + np.cumsum(s.stor_build, axis=0)
                   if st else np.zeros((len(ep), len(zn), 0)))
        else:
            members = [k for k, g in enumerate(sc.gen_techs) if g.in_target_class(cls)]
            cap = gen_avail[:, :, members]
        zone_total = cap.sum(axis=2)  # (E, Z)
        for size in range(1, len(states) + 1):
            for group in itertools.combinations(states, size):
                counted = [z for z, zone in enumerate(sc.zones) if any(zone.overlaps(x) for x in group)]
                for e in range(len(ep)):
                    req = sum(sc.policies.capacity_targets.get((e, x, cls), 0.0) for x in group)
                    ck.ge("capacity_target", zone_total[e, counted].sum(), req, (((cls, ep[e], group),),))

    # capacity market
    if sc.options.reliability_mode == "elcc_market":
        for e in range(len(ep)):
            accredited = sum(float(g.elcc[e] * gen_avail[e, :, k].sum()) for k, g in enumerate(sc.gen_techs))
            if st:
                power = np.stack([t.power_capacity for t in sc.stor_techs], axis=2) + np.cumsum(s.stor_build, axis=0)
                accredited += sum(float(t.elcc[e] * power[e, :, k].sum()) for k, t in enumerate(sc.stor_techs))
            ck.ge("reliability", accredited, sc.options.cap_target[e], ((ep[e],),))

    # queue limits
    if sc.options.queue_limits_enabled:
        for fam, techs, builds in (("gen_build_limit", sc.gen_techs, s.gen_build),
                                   ("stor_build_limit", sc.stor_techs, s.stor_build)):
            for k, t in enumerate(techs):
                for z, zone in enumerate(zn):
                    if np.isfinite(t.build_limit[z]):
                        ck.le(fam, builds[:, z, k].sum(), t.build_limit[z], (((zone, t.id),),))

    if fixed_builds is not None:
        from .formulation import GenBuild

        for key, mw in fixed_builds.items():
            arr, techs = (s.gen_build, gn) if isinstance(key, GenBuild) else (s.stor_build, st)
            got = arr[ep.index(key.epoch), zn.index(key.zone), techs.index(key.tech)]
            ck.eq("fixed_build", got, mw, ((key,),))

    return AuditReport(tuple(ck.found), dict(ck.checked))
