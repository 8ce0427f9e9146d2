# tests/test_binary_ba.py
import numpy as np
import pytest

from conftest import failed, party_context
from core.errors import ContractViolation
from core.params import ProtocolParams
from protocol.binary_ba import ORACLE, CoinBa, OracleBa
from protocol.base import Message, MsgKind, PartyContext, ServiceCall


@pytest.mark.parametrize("bit", ["0", "1"])
@pytest.mark.parametrize("backend", ["coin", "oracle"])
def test_unanimous_input_is_decided(run, bit, backend):
    report = run("BA", ba_backend=backend, inputs={"value": bit})
    assert report.ok, failed(report)
    assert report.trace.first_outputs(report.trace.root) == {p: int(bit) for p in range(1, 5)}


@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_coin_ba_agrees_on_split_input(run, seed):
    report = run("BA", n=7, t=2, seed=seed, ba_backend="coin", inputs={"family": "split"},
                 adversary={"strategy": "random-fair"})
    assert report.ok, failed(report)
    assert len(set(report.trace.first_outputs(report.trace.root).values())) == 1


def test_coin_ba_with_silent_minority(run):
    report = run("BA", n=7, t=2, ba_backend="coin", inputs={"value": "1"}, adversary={"strategy": "silent"})
    assert report.ok, failed(report)
    assert set(report.trace.first_outputs(report.trace.root).values()) == {1}


def test_oracle_uses_tie_break_on_split(run):
    report = run("BA", ba_backend="oracle", inputs={"family": "split"})
    assert report.ok, failed(report)
    assert set(report.trace.first_outputs(report.trace.root).values()) == {0}


def test_coin_is_common_and_logged(run):
    trace = run("BA", ba_backend="coin", inputs={"family": "split"}).trace
    coins = [ev for ev in trace.events if ev["type"] == "coin"]
    assert coins
    assert len({(tuple(ev["path"]), ev["round"]) for ev in coins}) == len(coins)


def test_binary_input_only():
    with pytest.raises(ContractViolation):
        CoinBa(party_context()).acquire(2)
    with pytest.raises(ContractViolation):
        OracleBa(party_context()).acquire(True)


def test_oracle_ba_calls_service_and_waits_for_decide():
    m = OracleBa(party_context())
    actions = m.acquire(1)
    assert actions == [ServiceCall("oracle_ba", 1)]
    assert m.deliver(2, (), Message(MsgKind.DECIDE, 1, 1)) == []
    m.deliver(ORACLE, (), Message(MsgKind.DECIDE, 0, 1))
    assert m.outputs == [0]
    assert m.terminated


def test_coin_ba_decide_amplification():
    m = CoinBa(party_context(index=1, n=4, t=1))
    m.deliver(2, (), Message(MsgKind.DECIDE, 1, 1))
    actions = m.deliver(3, (), Message(MsgKind.DECIDE, 1, 1))
    assert any(a.message == Message(MsgKind.DECIDE, 1, 1) for a in actions if hasattr(a, "message"))
    assert m.outputs == []
    m.deliver(3, (), Message(MsgKind.DECIDE, 1, 1))
    assert m.outputs == []
    m.deliver(4, (), Message(MsgKind.DECIDE, 1, 1))
    assert m.outputs == [1]
    assert m.terminated


def test_coin_ba_stops_at_round_cap():
    ctx = PartyContext(index=1, params=ProtocolParams(n=4, t=1, ell=1), rng=np.random.default_rng(0),
                       coin=lambda path, r: 0, settings={"coin_max_rounds": 1})
    m = CoinBa(ctx)
    m.acquire(1)
    for src in (1, 2, 3):
        m.deliver(src, (), Message(MsgKind.EST, (1, 1), 1))
    for src in (1, 2, 3):
        m.deliver(src, (), Message(MsgKind.AUX, (1, 1), 1))
    for src in (1, 2, 3):
        m.deliver(src, (), Message(MsgKind.CONF, (1, (1,)), 2))
    # mynten ga 0, så 1 besluttes ikke, og runde 2 ligger over taket
    assert m.capped
    assert m.decided is None
    assert m.round == 1
