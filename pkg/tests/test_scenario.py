# tests/test_scenario.py
import json
from fractions import Fraction

import pytest

from coding.bits import Bits
from core.config import Settings
from core.errors import ConfigError
from core.scenario import (
    SweepGrid, default_t, dump_scenario, load_grid, load_scenario, parse_grid, parse_scenario,
)


def _text(**kw) -> str:
    return json.dumps({"protocol": "REC", "n": 4, "t": 1, "ell": 16, **kw})


def test_defaults_and_normalisation():
    s = parse_scenario(_text(protocol="ca1", ca_backend="ca2", eps=0.5))
    assert s.protocol == "CA1"
    assert s.ca_backend == "CA2"
    assert s.eps == "1/2"
    assert s.params().eps == Fraction(1, 2)
    assert s.adversary.strategy == "fifo"
    assert s.seed_list() == [0]


def test_broken_json_reports_position():
    with pytest.raises(ConfigError, match=r"cfg.json:2:\d+"):
        parse_scenario('{\n  "protocol": \n}', "cfg.json")


@pytest.mark.parametrize("patch, match", [
    ({"t": 2}, "REC krever t < n/3"),
    ({"protocol": "XYZ"}, "Ukjent protokoll"),
    ({"adversary": {"strategy": "chaos"}}, "adversary.strategy"),
    ({"colour": "red"}, "colour"),
    ({"inputs": {"value": "zz"}}, "Ugyldig inputverdi"),
    ({"inputs": {"family": "explicit", "explicit": [{"party": 9, "value": "1"}]}}, "ukjent part"),
])
def test_invalid_scenarios(patch, match):
    with pytest.raises(ConfigError, match=match):
        parse_scenario(_text(**patch))


def test_binary_values_for_ba():
    s = parse_scenario(_text(protocol="BA", inputs={"value": "1"}))
    assert [i.value for i in s.build_inputs(0)] == [1, 1, 1, 1]
    with pytest.raises(ConfigError, match="0 eller 1"):
        parse_scenario(_text(protocol="BA", inputs={"value": "2"}))


def test_input_families():
    s = parse_scenario(_text(n=7, t=2, inputs={"family": "minority", "value": "abcd", "stagger": 2}))
    plan = s.build_inputs(0)
    assert [i.party for i in plan] == [1, 2, 3]
    assert [i.at for i in plan] == [0, 2, 4]
    assert {i.value for i in plan} == {Bits(0xABCD, 16)}

    split = parse_scenario(_text(n=6, inputs={"family": "split", "classes": 3})).build_inputs(5)
    values = [i.value for i in split]
    assert len(set(values)) == 3
    assert values[0] == values[3]

    explicit = parse_scenario(_text(inputs={"family": "explicit", "explicit": [
        {"party": 2, "value": "ff", "at": 9}]})).build_inputs(0)
    assert [(i.party, i.value, i.at) for i in explicit] == [(2, Bits(0xFF, 16), 9)]

    assert parse_scenario(_text(inputs={"family": "none"})).build_inputs(0) == []


def test_random_inputs_depend_only_on_seed():
    s = parse_scenario(_text())
    assert s.build_inputs(3) == s.build_inputs(3)
    assert s.build_inputs(3) != s.build_inputs(4)


def test_default_t():
    assert default_t("REC", 10) == 3
    assert default_t("CA2", 10, "1") == 2
    assert default_t("EXT", 9, "1/2", "CA2") == 2


def test_dump_roundtrip():
    s = parse_scenario(_text(seed=7, seeds=3))
    assert parse_scenario(dump_scenario(s)) == s
    assert s.seed_list() == [7, 8, 9]


def test_grid_points_and_unique_names():
    grid = parse_grid(json.dumps({
        "base": json.loads(_text(name="g")),
        "n": [4, 7], "seeds": [0, 1], "strategies": ["fifo", "random-fair"], "fairness": [2],
    }))
    points = list(grid.points())
    assert len(points) == 2 * 2 * 2
    assert {p["t"] for p in points if p["n"] == 7} == {2}
    names = {grid.scenario_for(p).name for p in points if p["seed"] == 0}
    assert len(names) == 4
    s = grid.scenario_for(points[0])
    assert s.fairness_k == 2 * 16
    assert s.seeds == 1


def test_empty_grid_axis():
    grid = SweepGrid.model_validate({"base": json.loads(_text()), "n": []})
    assert list(grid.points()) == []


def test_grid_point_violating_threshold_fails_on_validation():
    grid = parse_grid(json.dumps({"base": json.loads(_text()), "n": [4], "t": [2]}))
    (point,) = grid.points()
    with pytest.raises(ValueError):
        grid.scenario_for(point)


def test_load_from_files(tmp_path):
    (tmp_path / "s.json").write_text(_text(), encoding="utf-8")
    (tmp_path / "g.json").write_text(json.dumps({"base": json.loads(_text())}), encoding="utf-8")
    assert load_scenario(tmp_path / "s.json").protocol == "REC"
    assert len(list(load_grid(tmp_path / "g.json").points())) == 1


def test_settings_parse_constant_maps(monkeypatch):
    monkeypatch.setenv("ABA__MESSAGE_CONSTANTS_RAW", "ca1:9, ext:4, bad, rec:x")
    monkeypatch.setenv("ABA__BIT_CONSTANTS_RAW", "CA1:1.5")
    monkeypatch.setenv("ABA__FAIRNESS_FACTOR", "3")
    s = Settings()
    assert s.message_constants == {"CA1": 9, "EXT": 4}
    assert s.bit_constants == {"CA1": 1.5}
    assert s.simulator_settings()["fairness_factor"] == 3
