import csv
import dataclasses
import filecmp
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from coplan.cli import bundled_scenario_path
from coplan.scenario import PolicySpec, ScenarioError, validate
from coplan.scenario_io import load_scenario, write_scenario
from coplan.synthetic import random_scenario, tutorial

TUTORIAL = bundled_scenario_path("tutorial")

MINIMAL = {
    "epochs.csv": "epoch,start_year_offset,duration,label\n0,0,5,first\n",
    "zones.csv": "zone,lat,lon\nA,,\n",
    "gen_techs.csv": "tech,emission_rate,all_re,re,pv,wind,offshore_wind\ngas,0.4,0,0,0,0,0\n",
    "gen_capacity.csv": (
        "epoch,zone,tech,capacity_mw,var_cost,capital_cost,crf,elcc,build_limit_mw\n0,A,gas,200,30,1000,0.1,0.9,\n"
    ),
    "load.csv": "epoch,zone,hour,mw\n0,A,0,100\n0,A,1,120\n",
    "options.json": '{"rsv": 0.15}\n',
}


def write_files(root: Path, files: dict) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (root / name).write_text(text, encoding="utf-8")
    return root


def test_minimal_directory(tmp_path):
    sc = load_scenario(write_files(tmp_path / "s", MINIMAL))
    assert len(sc.zones) == 1 and len(sc.corridors) == 0
    assert sc.n_hours == 2
    gas = sc.gen("gas")
    assert gas.capacity.tolist() == [[200.0]]
    assert np.isnan(gas.build_limit[0])
    assert np.all(gas.cap_factor == 1.0)
    assert validate(sc).ok


def test_tutorial_counts_and_validity():
    sc = load_scenario(TUTORIAL)
    assert len(sc.zones) == 3
    assert len(sc.corridors) == 2
    assert len(sc.gen_techs) == 2
    assert len(sc.epochs) == 2 and sc.n_hours == 24
    assert validate(sc).ok


def test_tutorial_fields_match_source_files():
    sc = load_scenario(TUTORIAL)
    with open(TUTORIAL / "load.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            e, z, h = int(row["epoch"]), sc.zone_index(row["zone"]), int(row["hour"])
            assert sc.load[e, z, h] == float(row["mw"])
    with open(TUTORIAL / "gen_capacity.csv", newline="") as fh:
        for row in csv.DictReader(fh):
            g = sc.gen(row["tech"])
            e, z = int(row["epoch"]), sc.zone_index(row["zone"])
            assert g.capacity[e, z] == float(row["capacity_mw"])
            assert g.var_cost[e, z] == float(row["var_cost"])
            assert g.capital_cost[e, z] == float(row["capital_cost"])
            limit = row["build_limit_mw"]
            assert (math.isnan(g.build_limit[z]) and limit == "") or g.build_limit[z] == float(limit)
    with open(TUTORIAL / "corridors.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [c.id for c in sc.corridors] == [r["corridor"] for r in rows]
    assert sc.corridors[1].cap_reverse == float(rows[1]["cap_reverse_mw"])


def test_tutorial_matches_builder():
    assert load_scenario(TUTORIAL) == tutorial()


def test_dangling_zone_reference(tmp_path):
    files = dict(MINIMAL)
    files["corridors.csv"] = (
        "corridor,from_zone,to_zone,cap_forward_mw,cap_reverse_mw,length_miles,cost_per_mw_mile,crf,"
        "max_reinforcement_factor\nL1,A,ZX,100,100,50,2076,0.1,\n"
    )
    with pytest.raises(ScenarioError, match="ZX") as info:
        load_scenario(write_files(tmp_path / "s", files))
    assert info.value.file == "corridors.csv"
    assert info.value.row == 2


def test_missing_required_file(tmp_path):
    files = dict(MINIMAL)
    del files["load.csv"]
    with pytest.raises(ScenarioError) as info:
        load_scenario(write_files(tmp_path / "s", files))
    assert info.value.file == "load.csv"


def test_malformed_number_is_located(tmp_path):
    files = dict(MINIMAL)
    files["load.csv"] = "epoch,zone,hour,mw\n0,A,0,100\n0,A,1,lots\n"
    with pytest.raises(ScenarioError, match="malformed") as info:
        load_scenario(write_files(tmp_path / "s", files))
    assert (info.value.file, info.value.row) == ("load.csv", 3)


def test_series_length_mismatch(tmp_path):
    files = dict(MINIMAL)
    files["gen_capfactors.csv"] = "epoch,zone,tech,hour,value\n0,A,gas,0,0.5\n"
    with pytest.raises(ScenarioError) as info:
        load_scenario(write_files(tmp_path / "s", files))
    assert info.value.file == "gen_capfactors.csv"


def test_capacity_factor_out_of_range_reported_once():
    sc = tutorial()
    solar = sc.gen("solar")
    cf = solar.cap_factor.copy()
    cf[1, 2, 12] = 1.2
    bad = dataclasses.replace(sc, gen_techs=(sc.gen_techs[0], dataclasses.replace(solar, cap_factor=cf)))
    report = validate(bad)
    assert len(report) == 1
    (v,) = list(report)
    assert v.location.endswith("cap_factor[epoch=1, zone=C, hour=12]")
    assert "1.2" in v.message


def test_target_state_without_zone_reported_once():
    sc = tutorial()
    targets = dict(sc.policies.capacity_targets)
    targets[(1, "VA", "storage")] = 10.0
    bad = dataclasses.replace(sc, policies=dataclasses.replace(sc.policies, capacity_targets=targets))
    report = validate(bad)
    assert len(report) == 1
    assert "VA" in list(report)[0].message


def test_blank_emission_rate_reads_as_unknown(tmp_path):
    files = dict(MINIMAL)
    files["gen_techs.csv"] = "tech,emission_rate,all_re,re,pv,wind,offshore_wind\ngas,,0,0,0,0,0\n"
    sc = load_scenario(write_files(tmp_path / "s", files))
    assert math.isnan(sc.gen("gas").emission_rate)
    assert validate(sc).ok


def test_round_trip_is_byte_stable(tmp_path):
    write_scenario(load_scenario(TUTORIAL), tmp_path / "copy")
    cmp = filecmp.dircmp(TUTORIAL, tmp_path / "copy")
    assert not cmp.diff_files and not cmp.left_only and not cmp.right_only


@settings(max_examples=15, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(seed=st.integers(0, 10_000))
def test_round_trip_random_scenarios(tmp_path_factory, seed):
    sc = random_scenario(seed, n_hours=24)
    root = tmp_path_factory.mktemp("rt")
    write_scenario(sc, root)
    back = load_scenario(root)
    assert back == sc
    assert validate(back).ok


def test_empty_policies_default():
    assert PolicySpec().target_states("storage") == []


def test_truncation_scales_regional_requirements():
    sc = tutorial()
    short = sc.truncate_hours(12)
    assert short.n_hours == 12 and short.gen("solar").cap_factor.shape[2] == 12
    for (e, p), v in sc.policies.regional_rps.items():
        share = sc.load[e, :, :12].sum() / sc.load[e].sum()
        assert short.policies.regional_rps[(e, p)] == pytest.approx(v * share, rel=1e-12)
    assert sc.truncate_hours(24) is sc
    with pytest.raises(ValueError):
        sc.truncate_hours(0)
