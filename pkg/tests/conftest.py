# tests/conftest.py
from typing import Any, Callable

import numpy as np
import pytest

from core.params import ProtocolParams
from core.scenario import Scenario
from protocol.base import PartyContext
from scripts.harness import RunReport, run_scenario


def pytest_addoption(parser: pytest.Parser) -> None:
    parser.addoption("--update-golden", action="store_true", help="Skriv gullsporene i tests/golden på nytt")


def scenario_of(protocol: str, n: int = 4, t: int = 1, **kw: Any) -> Scenario:
    return Scenario.model_validate({"protocol": protocol, "n": n, "t": t, "ell": kw.pop("ell", 16), **kw})


def party_context(index: int = 1, n: int = 4, t: int = 1, ell: int = 16, **kw: Any) -> PartyContext:
    return PartyContext(index=index, params=ProtocolParams(n=n, t=t, ell=ell, **kw),
                        rng=np.random.default_rng(index))


def failed(report: RunReport) -> list[str]:
    return [f"{a.name}: {a.detail}" for a in report.audits if not a.ok]


@pytest.fixture
def run() -> Callable[..., RunReport]:
    """Kjør et scenario og returner rapporten; feilede revisorer vises i assert-meldingen."""

    def _run(protocol: str, n: int = 4, t: int = 1, seed: int = 0, **kw: Any) -> RunReport:
        return run_scenario(scenario_of(protocol, n, t, **kw), seed)

    return _run
