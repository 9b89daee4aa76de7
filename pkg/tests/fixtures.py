"""Hand-built scenarios shared by the test modules."""

from __future__ import annotations

import filecmp

import numpy as np

from coplan.scenario import CorridorSpec, OptionsSpec, PolicySpec, Scenario, ZoneSpec
from coplan.synthetic import epochs, gen_tech, stor_tech


def one_zone(load, *, gens=(), stors=(), n_epochs=1, rsv=0.0, policies=None, **options) -> Scenario:
    """Single zone ``A``; ``load`` is a 1-D hourly series repeated per epoch."""
    load = np.asarray(load, dtype=float)
    full = np.broadcast_to(load, (n_epochs, 1, len(load)))
    return Scenario(epochs(n_epochs), (ZoneSpec("A"),), (), tuple(gens), tuple(stors), full,
                    policies or PolicySpec(), OptionsSpec(rsv=rsv, **options))


def two_zone(load_a, load_b, corridor: CorridorSpec, *, gens=(), stors=(), rsv=0.0, **options) -> Scenario:
    load = np.stack([np.asarray(load_a, float), np.asarray(load_b, float)])[None]
    return Scenario(epochs(1), (ZoneSpec("A"), ZoneSpec("B")), (corridor,), tuple(gens), tuple(stors), load,
                    PolicySpec(), OptionsSpec(rsv=rsv, **options))


def tiny_scenario(seed: int) -> Scenario:
    """Random instance with one epoch, at most two zones, four hours and two
    technologies, small enough for vertex enumeration."""
    rng = np.random.default_rng(seed)
    family = seed % 4
    rsv = float(rng.choice([0.0, 0.15]))

    def gen(name, Z, H, **kw):
        return gen_tech(name, 1, Z, H, capacity=rng.uniform(0, 60, size=(1, Z)).round(1),
                        var_cost=rng.uniform(5, 60, size=(1, Z)).round(1),
                        capital_cost=rng.uniform(50, 400, size=(1, Z)).round(1),
                        cap_factor=rng.uniform(0.2, 1.0, size=(1, Z, H)).round(2), **kw)

    if family == 0:
        H = 4
        return one_zone(rng.uniform(20, 100, H).round(1), gens=[gen("g1", 1, H)], rsv=rsv)
    if family == 1:
        H = 3
        return one_zone(rng.uniform(20, 100, H).round(1), gens=[gen("g1", 1, H), gen("g2", 1, H)], rsv=rsv)
    if family == 2:
        H = 2
        line = CorridorSpec("AB", "A", "B", float(rng.uniform(0, 30)), float(rng.uniform(0, 30)),
                            float(rng.uniform(10, 100)), cost_per_mw_mile=float(rng.uniform(0.5, 3)), crf=1.0)
        return two_zone(rng.uniform(20, 100, H).round(1), rng.uniform(20, 100, H).round(1), line,
                        gens=[gen("g1", 2, H)], rsv=rsv)
    H = 2
    battery = stor_tech("bat", 1, 1, power=float(rng.uniform(0, 20)), capital_cost=float(rng.uniform(50, 300)),
                        duration=2.0, efficiency=float(rng.uniform(0.7, 1.0)))
    return one_zone(rng.uniform(20, 100, H).round(1), gens=[gen("g1", 1, H)], stors=[battery], rsv=rsv)


def same_tree(a, b) -> bool:
    """True when two directory trees hold the same files with the same bytes."""
    cmp = filecmp.dircmp(a, b)
    if cmp.left_only or cmp.right_only or cmp.funny_files:
        return False
    _, mismatch, errors = filecmp.cmpfiles(a, b, cmp.common_files, shallow=False)
    return not mismatch and not errors and all(same_tree(a / d, b / d) for d in cmp.common_dirs)
