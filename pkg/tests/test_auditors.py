# tests/test_auditors.py
from fractions import Fraction

import pytest

from audit import properties
from audit.predicates import core_dichotomy
from core.params import ProtocolParams
from network.trace import Trace
from scripts.harness import audit_trace, suite_for
from conftest import scenario_of

ROOT = ("x",)


class TraceBuilder:
    """Håndlaget spor for revisortester."""

    def __init__(self, n: int = 4, t: int = 1):
        self.trace = Trace()
        self.step = 0
        self.seq = 0
        self.trace.record({"type": "header", "step": 0, "n": n, "t": t, "root": list(ROOT)})

    def _rec(self, **event):
        self.step += 1
        self.trace.record({"step": self.step, **event})
        return self

    def acquire(self, party, value, path=ROOT):
        return self._rec(type="acquire", party=party, path=list(path), value=value, forced=False)

    def output(self, party, value, path=ROOT):
        return self._rec(type="output", party=party, path=list(path), value=value, meta=None)

    def terminate(self, party, path=ROOT):
        return self._rec(type="terminate", party=party, path=list(path))

    def corrupt(self, party):
        return self._rec(type="corrupt", party=party, behavior="test")

    def send(self, src, dst, kind="BOT", body=None, bits=1, honest=True, path=ROOT):
        self.seq += 1
        return self._rec(type="send", seq=self.seq, src=src, dst=dst, path=list(path), kind=kind,
                         body=body, bits=bits, honest=honest, depth=1, group=None)


def test_validity_needs_common_input():
    b = TraceBuilder()
    for p in range(1, 5):
        b.acquire(p, "v")
    b.output(1, "v").output(2, None)
    result = properties.validity(b.trace, ROOT)
    assert not result.ok and "2" in result.detail
    split = TraceBuilder().acquire(1, "v").acquire(2, "w").acquire(3, "v").acquire(4, "v")
    assert not properties.validity(split.trace, ROOT).applicable


def test_corrupted_party_ignored_by_validity():
    b = TraceBuilder()
    for p in range(1, 5):
        b.acquire(p, "v")
    b.corrupt(4).output(4, "evil").output(1, "v")
    assert properties.validity(b.trace, ROOT).ok


def test_weak_consistency_and_consistency():
    b = TraceBuilder().output(1, "a").output(2, None).output(3, "a")
    assert properties.weak_consistency(b.trace, ROOT).ok
    assert not properties.consistency(b.trace, ROOT).ok
    b.output(4, "b")
    assert not properties.weak_consistency(b.trace, ROOT).ok
    assert properties.weak_consistency(b.trace, ROOT, k=2).ok


def test_single_output():
    b = TraceBuilder().output(1, "a").output(1, "a")
    assert not properties.single_output(b.trace, ROOT).ok


def test_totality_and_termination():
    b = TraceBuilder()
    for p in range(1, 5):
        b.acquire(p, 0)
    b.terminate(1)
    assert not properties.totality(b.trace, ROOT).ok
    for p in (2, 3, 4):
        b.terminate(p)
    assert properties.totality(b.trace, ROOT).ok
    assert properties.termination(b.trace, ROOT).ok
    b.send(1, 2)
    late = properties.termination(b.trace, ROOT)
    assert not late.ok and "sent etter" in late.detail


def test_intrusion_tolerance():
    b = TraceBuilder().acquire(1, "a").acquire(2, "b").output(1, "b").output(2, None)
    assert properties.intrusion_tolerance(b.trace, ROOT).ok
    b.output(3, "c")
    assert not properties.intrusion_tolerance(b.trace, ROOT).ok


def test_liveness_common_only():
    b = TraceBuilder().acquire(1, "a").acquire(2, "b")
    assert not properties.liveness(b.trace, ROOT, common_only=True).applicable
    result = properties.liveness(b.trace, ROOT)
    assert not result.ok and "[1, 2]" in result.detail


def test_kca_weak_liberal_support_warns():
    params = ProtocolParams(n=8, t=1, ell=8, eps=Fraction(1))
    b = TraceBuilder(n=8, t=1).acquire(1, "a").acquire(2, "b").corrupt(2).output(1, "b")
    result = properties.kca_weak(b.trace, params, ROOT)
    assert result.ok
    assert result.warning
    assert result.data["support"]["b"] == {"conservative": 0, "liberal": 1}


def test_kca_weak_without_support_fails():
    params = ProtocolParams(n=8, t=1, ell=8, eps=Fraction(1))
    b = TraceBuilder(n=8, t=1).acquire(1, "a").output(1, "z")
    assert not properties.kca_weak(b.trace, params, ROOT).ok


def test_counter_soundness_detects_tampering():
    b = TraceBuilder().send(1, 2, bits=5).send(4, 1, honest=False, bits=3)
    assert properties.counter_soundness(b.trace).ok
    b.trace.honest_counters[ROOT].bits += 1
    assert not properties.counter_soundness(b.trace).ok


def test_ext_onlyvstar():
    ca, rec = ROOT + ("ca",), ROOT + ("rec",)
    b = TraceBuilder().output(1, "v", ca).output(2, None, ca).acquire(1, "v", rec)
    assert properties.ext_onlyvstar(b.trace, ROOT).ok
    b.acquire(2, "w", rec)
    assert not properties.ext_onlyvstar(b.trace, ROOT).ok


def test_core_dichotomy_needs_bottoms_when_predicate_fails():
    params = ProtocolParams(n=4, t=1, ell=8)
    b = TraceBuilder().acquire(1, "a").acquire(2, "b").acquire(3, "c").acquire(4, "d")
    result = core_dichotomy(b.trace, "CA1", params, ROOT)
    assert not result.ok
    for p in (1, 2):
        b.send(p, 3, kind="BOT")
    assert core_dichotomy(b.trace, "CA1", params, ROOT).ok


def test_suite_filter_rejects_unknown_audit():
    with pytest.raises(ValueError, match="Ukjente revisorer"):
        suite_for(scenario_of("SRA", audits=["validity", "magic"]))
    assert list(suite_for(scenario_of("SRA", audits=["validity"]))) == ["validity"]


def test_audit_reads_scenario_from_header(run):
    report = run("SRA")
    again = Trace.from_jsonl(report.trace.to_jsonl())
    results, complexity = audit_trace(again)
    assert [r.as_row() for r in results] == [r.as_row() for r in report.audits]
    assert complexity.messages == report.complexity.messages


def test_audit_without_scenario_header_fails():
    with pytest.raises(ValueError, match="mangler scenario"):
        audit_trace(TraceBuilder().trace)


def _without_rec_input(trace: Trace, party: int) -> Trace:
    rec = list(trace.root + ("rec",))
    out = Trace()
    for ev in trace.events:
        if ev["type"] in ("acquire", "input") and ev["party"] == party and list(ev["path"]) == rec:
            continue
        out.record(ev)
    return out


def test_core_dichotomy_needs_every_supporter_in_rec(run):
    report = run("CA1")
    params = report.scenario.params()
    trace = report.trace
    assert core_dichotomy(trace, "CA1", params, trace.root).ok
    result = core_dichotomy(_without_rec_input(trace, 1), "CA1", params, trace.root)
    assert not result.ok
    assert "uten REC-input: [1]" in result.detail
