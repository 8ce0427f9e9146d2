# tests/test_reliable_agreement.py
import pytest

from coding.bits import Bits
from conftest import failed, party_context
from protocol.base import Message, MsgKind
from protocol.pra import Pra
from protocol.sra import Sra

V = Bits(0x5EED, 16)


@pytest.mark.parametrize("protocol", ["SRA", "PRA"])
def test_common_input_gives_common_output(run, protocol):
    report = run(protocol, inputs={"value": "5eed"})
    assert report.ok, failed(report)
    assert report.trace.first_outputs(report.trace.root) == {p: V for p in range(1, 5)}


def test_sra_message_count_and_depth(run):
    trace = run("SRA", inputs={"value": "5eed"}).trace
    # n^2 KEY (egen inkludert) og n(n-1) HASH
    assert trace.totals().messages == 16 + 12
    assert trace.causal_depth == 2


def test_pra_one_round(run):
    report = run("PRA", inputs={"value": "5eed"})
    assert report.trace.totals().messages == 16
    assert report.trace.causal_depth == 1
    assert report.complexity.depth_ok is True


@pytest.mark.parametrize("protocol", ["SRA", "PRA"])
def test_split_input_gives_no_output(run, protocol):
    report = run(protocol, inputs={"family": "split"})
    assert report.ok, failed(report)
    assert report.trace.first_outputs(report.trace.root) == {}
    liveness = next(a for a in report.audits if a.name == "liveness")
    assert not liveness.applicable


@pytest.mark.parametrize("protocol", ["SRA", "PRA"])
@pytest.mark.parametrize("strategy", ["equivocator", "collision-seeker", "silent"])
def test_byzantine_minority_cannot_break_validity(run, protocol, strategy):
    report = run(protocol, seed=2, inputs={"value": "5eed"}, adversary={"strategy": strategy})
    assert report.ok, failed(report)
    assert report.trace.first_outputs(report.trace.root) == {p: V for p in (1, 2, 3)}


def test_pra_needs_eps_threshold():
    from core.scenario import Scenario
    from pydantic import ValidationError

    with pytest.raises(ValidationError, match="PRA krever"):
        Scenario.model_validate({"protocol": "PRA", "n": 4, "t": 1, "eps": "3/2"})


def test_sra_buffers_hash_until_key():
    m = Sra(party_context(index=1))
    m.acquire(V)
    peer = Sra(party_context(index=2))
    key_actions = peer.acquire(V)
    peer_key = key_actions[0].message.body
    # svar fra P2 på P1 sin nøkkel
    reply = peer.deliver(1, (), Message(MsgKind.KEY, m.hx.key, m.hx.kappa))
    hash_msg = reply[0].message
    assert m.deliver(2, (), hash_msg) == []
    assert 2 in m.hx.pending
    m.deliver(2, (), Message(MsgKind.KEY, peer_key, m.hx.kappa))
    assert m.agreeing == {1, 2}


def test_pra_counts_each_sender_once():
    m = Pra(party_context(index=1, eps=1))
    m.acquire(V)
    sym = m.codeword[1]
    m.deliver(2, (), Message(MsgKind.SYM, sym, m.code.symbol_bits))
    m.deliver(2, (), Message(MsgKind.SYM, sym, m.code.symbol_bits))
    assert m.agreeing == {1, 2}
    assert m.outputs == []
    m.deliver(3, (), Message(MsgKind.SYM, m.codeword[2], m.code.symbol_bits))
    assert m.outputs == [V]
