import dataclasses
import json

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings, strategies as st

from coplan import metrics as mt
from coplan import planner as pl
from coplan.scenario import CorridorSpec, ZoneSpec
from coplan.synthetic import epochs, gen_tech, remote_generation, tutorial
from fixtures import one_zone, two_zone


def plan(sc, mode=pl.COOPTIMIZED, objective=0.0, **arrays) -> pl.PlanSolution:
    """Hand-made solution for ``sc``: every array zero unless given."""
    E, Z, H = sc.load.shape
    G, S, L = len(sc.gen_techs), len(sc.stor_techs), len(sc.corridors)
    shapes = dict(gen_build=(E, Z, G), stor_build=(E, Z, S), line_build=(E, L), gen_dispatch=(E, Z, G, H),
                  stor_dispatch=(E, Z, S, H), stor_charge=(E, Z, S, H), soc=(E, Z, S, H), flow=(E, L, H),
                  unserved=(E, Z, H))
    values = {k: np.broadcast_to(arrays.get(k, 0.0), shape) for k, shape in shapes.items()}
    return pl.PlanSolution(
        mode=mode, scenario_fingerprint=sc.fingerprint(), epochs=tuple(e.index for e in sc.epochs),
        zones=tuple(sc.zone_ids), gens=tuple(g.id for g in sc.gen_techs), stors=tuple(s.id for s in sc.stor_techs),
        lines=tuple(c.id for c in sc.corridors), objective=objective,
        breakdown=dict.fromkeys(pl.BREAKDOWN_KEYS, 0.0), **values)


def corridors_scenario(n_epochs=1):
    zones = (ZoneSpec("A"), ZoneSpec("B"), ZoneSpec("C"))
    lines = (CorridorSpec("LA", "A", "B", 0, 0, 100.0), CorridorSpec("LB", "B", "C", 0, 0, 50.0))
    sc = one_zone([1.0], n_epochs=n_epochs)
    return dataclasses.replace(sc, zones=zones, corridors=lines, load=np.ones((n_epochs, 3, 1)))


# -- transmission ----------------------------------------------------------------

def test_gw_miles_linear_aggregation():
    sc = corridors_scenario()
    sol = plan(sc, line_build=np.array([[2000.0, 1000.0]]))
    assert mt.transmission_gw_miles(sol, sc) == pytest.approx(250.0, rel=1e-12)


def test_gw_miles_zero_builds():
    sc = corridors_scenario()
    assert mt.transmission_gw_miles(plan(sc), sc) == 0.0


@given(builds=st.lists(st.tuples(st.floats(0, 5000), st.floats(0, 5000)), min_size=3, max_size=3))
@settings(max_examples=40, deadline=None)
def test_gw_miles_monotone_in_epoch(builds):
    sc = corridors_scenario(n_epochs=3)
    sol = plan(sc, line_build=np.array(builds))
    series = mt.gw_miles_by_epoch(sol, sc)
    assert np.all(np.diff(series) >= 0)
    assert series[-1] == pytest.approx(mt.transmission_gw_miles(sol, sc), rel=1e-12, abs=1e-12)


# -- reliability -----------------------------------------------------------------

def test_no_unserved_energy():
    sc = one_zone([10.0, 20.0])
    assert mt.reliability_metrics(plan(sc), sc) == (0.0, 0.0, 0.0)


def test_one_mwh_at_weight_four():
    sc = dataclasses.replace(one_zone([10.0, 20.0], discount_rate=0.0), epochs=epochs(1, duration=4))
    assert sc.epoch_weights()[0] == 4.0
    _, npv, _ = mt.reliability_metrics(plan(sc, unserved=np.array([[[1.0, 0.0]]])), sc)
    assert npv == pytest.approx(20000.0, rel=1e-12)


def test_forced_shortage_by_hand():
    # 50 MW that cannot grow against loads of 50, 55, 55: 10 MWh short each year
    gas = gen_tech("gas", 1, 1, 3, capacity=50.0, var_cost=10.0, capital_cost=1.0, build_limit=0.0)
    sc = one_zone([50.0, 55.0, 55.0], gens=[gas], rsv=0.0, queue_limits_enabled=True)
    sol = pl.run_cooptimized(sc)
    assert sol.unserved.sum() == pytest.approx(10.0, rel=1e-9)
    ue_gwh, npv, share = mt.reliability_metrics(sol, sc)
    w = sum(1.072 ** -t for t in range(5))
    assert ue_gwh == pytest.approx(10.0 * 5 / 1000.0, rel=1e-9)
    assert npv == pytest.approx(10.0 * 5000.0 * w, rel=1e-9)
    assert share == pytest.approx(10.0 / 160.0, rel=1e-9)
    once = mt.reliability_metrics(sol, sc, weighting="operating_year")
    assert once[0] == pytest.approx(0.01, rel=1e-9) and once[2] == pytest.approx(share, rel=1e-12)


def test_unknown_weighting():
    sc = one_zone([1.0])
    with pytest.raises(mt.MetricsError):
        mt.reliability_metrics(plan(sc), sc, weighting="calendar")


# -- emissions -------------------------------------------------------------------

def test_gas_emissions_per_epoch():
    gas = gen_tech("gas", 1, 1, 1, emission_rate=0.4)
    sc = one_zone([1.0], gens=[gas])
    # 100 GWh in the modeled year, standing in for 5 years
    sol = plan(sc, gen_dispatch=np.full((1, 1, 1, 1), 100_000.0))
    assert mt.emissions(sol, sc) == pytest.approx(0.2, rel=1e-12)


def test_renewable_only_emits_nothing():
    solar = gen_tech("solar", 1, 1, 2, emission_rate=0.0)
    sc = one_zone([5.0, 5.0], gens=[solar])
    assert mt.emissions(plan(sc, gen_dispatch=5.0), sc) == 0.0


def test_tutorial_emissions_hand_sum():
    sc = tutorial()
    sol = pl.run_cooptimized(sc)
    total = 0.0
    for e, ep in enumerate(sc.epochs):
        for z in range(len(sc.zones)):
            for k, g in enumerate(sc.gen_techs):
                for h in range(sc.n_hours):
                    total += sol.gen_dispatch[e, z, k, h] * g.emission_rate * ep.duration
    assert mt.emissions(sol, sc) == pytest.approx(total / 1e6, rel=1e-12)
    assert total > 0


def test_missing_rate_counts_zero_with_warning():
    gas = gen_tech("gas", 1, 1, 1, emission_rate=np.nan)
    sc = one_zone([1.0], gens=[gas])
    rep = mt.report(plan(sc, gen_dispatch=1.0), sc)
    assert rep.emissions_mt == 0.0
    assert len(rep.warnings) == 1 and "gas" in rep.warnings[0]


# -- net load --------------------------------------------------------------------

def test_isolated_zone_nets_to_zero():
    gas = gen_tech("gas", 1, 1, 4, capacity=100.0, var_cost=5.0)
    sc = one_zone([30.0, 60.0, 45.0, 80.0], gens=[gas], rsv=0.0)
    sol = pl.run_cooptimized(sc)
    assert mt.net_load_by_zone(sol, sc)["A"] == pytest.approx(0.0, abs=1e-6)


def importer():
    plant = gen_tech("plant", 1, 2, 2, capital_cost=np.array([[10.0, 30.0]]))
    line = CorridorSpec("AB", "A", "B", 0.0, 0.0, 10.0, cost_per_mw_mile=1.0)
    sc = two_zone([0.0, 0.0], [50.0, 100.0], line, gens=[plant], discount_rate=0.0, rsv=0.0)
    return dataclasses.replace(sc, epochs=epochs(1, duration=1))


def test_importer_net_load_is_average_import():
    sc = importer()
    sol = pl.run_cooptimized(sc)
    net = mt.net_load_by_zone(sol, sc)
    imports = sol.flow[0, 0].mean()  # A -> B
    assert imports == pytest.approx(75.0, rel=1e-9)
    assert net["B"] == pytest.approx(imports, rel=1e-9)
    assert net["A"] == pytest.approx(-imports, rel=1e-9)


def test_net_loads_cancel_without_reserve():
    sc = tutorial().with_options(rsv=0.0)
    sol = pl.run_cooptimized(sc)
    assert sum(mt.net_load_by_zone(sol, sc).values()) == pytest.approx(0.0, abs=1e-6)
    for e in sol.epochs:
        assert sum(mt.net_load_by_zone(sol, sc, epoch=e).values()) == pytest.approx(0.0, abs=1e-6)


# -- report and comparison -------------------------------------------------------

@pytest.fixture(scope="module")
def remote_pair():
    sc = remote_generation()
    return sc, pl.run_sequential(sc), pl.run_cooptimized(sc)


def test_report_uses_solver_objective(remote_pair):
    sc, seq, co = remote_pair
    for sol in (seq, co):
        rep = mt.report(sol, sc)
        assert rep.npv_system_cost == pytest.approx(sol.objective, rel=1e-6)
        assert rep.npv_transmission_cost == sol.breakdown["line_invest"]
        for name, value in rep.rows():
            if not name.startswith("net_load"):
                assert value >= 0, name


def test_sequential_builds_more_transmission(remote_pair):
    sc, seq, co = remote_pair
    assert mt.transmission_gw_miles(seq, sc) >= mt.transmission_gw_miles(co, sc)


def test_compare_deltas(remote_pair):
    sc, seq, co = remote_pair
    table = mt.compare(seq, co, sc)
    assert list(table.columns) == ["metric", "sequential", "cooptimized", "delta", "pct_diff"]
    row = table.set_index("metric").loc["transmission_gw_miles"]
    assert row.delta < 0
    assert row.delta == pytest.approx(row.cooptimized - row.sequential)
    cost = table.set_index("metric").loc["npv_system_cost"]
    assert cost.pct_diff <= 0


def test_compare_identical_is_all_zero(remote_pair):
    sc, _, co = remote_pair
    table = mt.compare(co, co, sc)
    assert (table.delta == 0).all()
    assert (table.pct_diff.fillna(0) == 0).all()


def test_compare_rejects_other_scenario(remote_pair):
    sc, seq, _ = remote_pair
    other = pl.run_cooptimized(tutorial())
    with pytest.raises(mt.MetricsError):
        mt.compare(seq, other, sc)
    with pytest.raises(mt.MetricsError):
        mt.report(other, sc)


def test_writers(tmp_path, remote_pair):
    sc, seq, co = remote_pair
    reports = {"sequential": mt.report(seq, sc), "coopt": mt.report(co, sc)}
    path = mt.write_metrics(reports["coopt"], tmp_path / "coopt")
    df = pd.read_csv(path)
    assert dict(zip(df.metric, df.value))["npv_system_cost"] == pytest.approx(co.objective, rel=1e-12)
    assert not (tmp_path / "coopt" / "metrics_warnings.txt").exists()

    csv_path, txt_path = mt.write_comparison(mt.compare(seq, co, sc), tmp_path)
    assert len(pd.read_csv(csv_path)) == len(reports["coopt"].rows())
    assert txt_path.read_text().splitlines()[0].split() == ["metric", "sequential", "cooptimized", "delta", "pct"]

    net = pd.read_csv(mt.write_netload(reports, sc, tmp_path))
    assert len(net) == 2 * len(sc.zones)
    assert list(net.columns) == ["mode", "zone", "lat", "lon", "net_load_mw"]

    (doc_path, _) = mt.write_plotdata({"sequential": seq, "coopt": co}, sc, tmp_path)
    doc = json.loads(doc_path.read_text())
    assert [c["corridor"] for c in doc["corridors"]] == [c.id for c in sc.corridors]
    assert doc["gw_miles_by_epoch"][-1] == pytest.approx(mt.transmission_gw_miles(seq, sc))
