# tests/test_sweeps.py
from typing import Any

import pytest

from core.scenario import SweepGrid, default_t
from network.adversary import STRATEGY_MAP
from scripts.harness import SweepResult, sweep

pytestmark = pytest.mark.slow

STRATEGIES = list(STRATEGY_MAP)
SEEDS = list(range(1000))
KCA_SEEDS = list(range(100))


def _sweep(base: dict[str, Any], **axes: Any) -> SweepResult:
    n = base["n"]
    base = {"ell": 64, "lam": 32, "t": default_t(base["protocol"], n, base.get("eps", "1"),
                                                 base.get("ca_backend", "CA1")), **base}
    return sweep(SweepGrid.model_validate({"base": base, **axes}), write_traces=False)


def _assert_clean(result: SweepResult) -> None:
    frame = result.frame
    assert not frame.empty
    bad = frame[~frame["ok"].astype(bool)]
    assert bad.empty, bad[["protocol", "n", "t", "ell", "strategy", "seed", "failed", "error"]].head(10).to_string()


@pytest.mark.parametrize("protocol", ["SRA", "CA1"])
def test_statistical_suite(protocol):
    result = _sweep({"protocol": protocol, "n": 4},
                    n=[4, 7, 10, 13], ell=[64, 1024], strategies=STRATEGIES, seeds=SEEDS)
    _assert_clean(result)


@pytest.mark.parametrize("classes", [1, 2, 3])
@pytest.mark.parametrize("eps", ["1", "1/2"])
@pytest.mark.parametrize("protocol", ["KCA", "CA2", "PRA"])
def test_perfect_suite(protocol, eps, classes):
    result = _sweep({"protocol": protocol, "n": 8, "eps": eps, "inputs": {"family": "split", "classes": classes}},
                    n=[8, 12, 16], strategies=STRATEGIES, seeds=KCA_SEEDS)
    _assert_clean(result)


@pytest.mark.parametrize("family", ["common", "split"])
@pytest.mark.parametrize("backend", ["oracle", "coin"])
def test_ext_end_to_end(backend, family):
    result = _sweep({"protocol": "EXT", "n": 7, "ba_backend": backend, "inputs": {"family": family}},
                    n=[7, 10], strategies=STRATEGIES, seeds=SEEDS)
    _assert_clean(result)


def test_complexity_envelopes_hold_as_n_and_ell_grow():
    ells = [2**8, 2**10, 2**12, 2**14]
    for protocol in ("CA1", "EXT"):
        result = _sweep({"protocol": protocol, "n": 7}, n=[7, 10, 13], ell=ells, seeds=[0])
        _assert_clean(result)
        fit = result.fits[protocol]
        assert fit.constant > 0
        assert fit.within, fit.max_deviation


@pytest.mark.parametrize("protocol", ["SRA", "PRA", "KCA"])
def test_depth_does_not_grow_with_ell(protocol):
    result = _sweep({"protocol": protocol, "n": 7}, n=[7, 10, 13], ell=[2**8, 2**10, 2**12], seeds=[0])
    _assert_clean(result)
    assert result.depth_stable
    assert result.ok
