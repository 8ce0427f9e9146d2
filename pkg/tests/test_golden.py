# tests/test_golden.py
from pathlib import Path

import pytest

from core.scenario import load_scenario
from protocol.registry import PROTOCOL_MAP
from scripts.harness import golden_check, run_scenario, trace_file

GOLDEN_DIR = Path(__file__).parent / "golden"
CASES = sorted(p.stem for p in GOLDEN_DIR.glob("*.json"))


def test_one_golden_scenario_per_protocol():
    protocols = sorted(load_scenario(GOLDEN_DIR / f"{case}.json").protocol for case in CASES)
    assert protocols == sorted(PROTOCOL_MAP)


@pytest.mark.parametrize("case", CASES)
def test_trace_matches_golden(request, case):
    scenario = load_scenario(GOLDEN_DIR / f"{case}.json")
    update = request.config.getoption("--update-golden")
    report = run_scenario(scenario)
    target = trace_file(GOLDEN_DIR, scenario, report.seed)
    if not update and not target.is_file():
        pytest.skip(f"mangler {target.name}; skriv med pytest --update-golden")
    result = golden_check(report, GOLDEN_DIR, update=update)
    assert result.ok, result.detail
