# src/audit/properties.py
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Optional

from coding.rs import CodeParams, encode
from core.params import ProtocolParams
from network.trace import Path, Trace

log = logging.getLogger(__name__)


@dataclass
class AuditResult:
    """
    Resultat fra én revisor.
    ok: hard dom (False feiler kjøringen)
    warning: myk avvik; feiler bare med --strict
    applicable: False når forutsetningen for egenskapen ikke holder i sporet
    """
    name: str
    ok: bool = True
    detail: str = ""
    warning: bool = False
    applicable: bool = True
    data: dict[str, Any] = field(default_factory=dict)

    def as_row(self) -> dict[str, Any]:
        return {"audit": self.name, "ok": self.ok, "warning": self.warning,
                "applicable": self.applicable, "detail": self.detail}


def _fmt(value: Any) -> str:
    return "⊥" if value is None else str(value)


def _all_acquired(trace: Trace, path: Path) -> bool:
    return all((p, path) in trace.acquired for p in trace.honest)


# ---------------------- Generelle egenskaper ----------------------

def validity(trace: Trace, path: Path) -> AuditResult:
    """Felles ærlig input v: ingen ærlig ⊥ og alle utdata lik v."""
    inputs = trace.input_values(path)
    values = set(inputs.values())
    if len(inputs) < len(trace.honest) or len(values) != 1:
        return AuditResult("validity", applicable=False, detail="ingen felles ærlig input")
    v = values.pop()
    bad = {p: y for p, y in trace.first_outputs(path).items() if y != v}
    if bad:
        return AuditResult("validity", ok=False, detail=f"utdata ≠ input: {sorted(bad)}")
    return AuditResult("validity")


def weak_consistency(trace: Trace, path: Path, k: int = 1, name: str = "weak_consistency") -> AuditResult:
    """Høyst k ulike ærlige ikke-⊥ utdata."""
    distinct = {y for y in trace.first_outputs(path).values() if y is not None}
    if len(distinct) > k:
        return AuditResult(name, ok=False, detail=f"{len(distinct)} ulike ikke-⊥ utdata (maks {k})",
                           data={"distinct": len(distinct), "bound": k})
    return AuditResult(name, data={"distinct": len(distinct), "bound": k})


def consistency(trace: Trace, path: Path) -> AuditResult:
    """Alle ærlige utdata like (⊥ regnes som en verdi)."""
    outs = trace.first_outputs(path)
    if len(set(outs.values())) > 1:
        summary = ", ".join(f"P{p}={_fmt(y)}" for p, y in sorted(outs.items()))
        return AuditResult("consistency", ok=False, detail=summary)
    return AuditResult("consistency")


def single_output(trace: Trace, path: Path) -> AuditResult:
    """Ingen ærlig part gir ut to ganger på samme instans."""
    twice = [p for p in trace.honest if len(trace.outputs.get((p, path), ())) > 1]
    return AuditResult("single_output", ok=not twice, detail=f"flere utdata: {twice}" if twice else "")


def liveness(trace: Trace, path: Path, common_only: bool = False) -> AuditResult:
    """
    Hver ærlig part som fikk input har gitt utdata før stillstand.
    common_only: kreves bare ved felles ærlig input (pålitelig enighet).
    """
    if common_only and len(set(trace.input_values(path).values())) != 1:
        return AuditResult("liveness", applicable=False, detail="ingen felles ærlig input")
    if trace.capped:
        return AuditResult("liveness", ok=False, detail="hendelsestak nådd")
    missing = [p for p in trace.honest if (p, path) in trace.acquired and not trace.outputs.get((p, path))]
    return AuditResult("liveness", ok=not missing, detail=f"uten utdata: {missing}" if missing else "")


def termination(trace: Trace, path: Path) -> AuditResult:
    """Alle ærlige terminerer, og ingen ærlig sender noe på instansen etter terminering."""
    if not _all_acquired(trace, path):
        return AuditResult("termination", applicable=False, detail="ikke alle ærlige fikk input")
    missing = [p for p in trace.honest if (p, path) not in trace.terminated]
    late = [
        ev["seq"] for ev in trace.sends()
        if ev["honest"] and (ev["src"], path) in trace.terminated
        and tuple(ev["path"])[:len(path)] == path
        and ev["step"] > trace.terminated[(ev["src"], path)]
    ]
    if missing or late:
        return AuditResult("termination", ok=False, detail=f"uten terminering: {missing} sent etter: {late[:5]}")
    return AuditResult("termination")


def totality(trace: Trace, path: Path) -> AuditResult:
    """Terminerer én ærlig part, terminerer alle ærlige."""
    done = [p for p in trace.honest if (p, path) in trace.terminated]
    if done and len(done) < len(trace.honest):
        rest = sorted(set(trace.honest) - set(done))
        return AuditResult("totality", ok=False, detail=f"ikke terminert: {rest}")
    return AuditResult("totality")


def intrusion_tolerance(trace: Trace, path: Path) -> AuditResult:
    """Hvert ærlige utdata er ⊥ eller en ærlig input."""
    honest_inputs = set(trace.input_values(path).values())
    bad = [p for p, y in trace.first_outputs(path).items() if y is not None and y not in honest_inputs]
    return AuditResult("intrusion_tolerance", ok=not bad, detail=f"fremmede utdata: {bad}" if bad else "")


# ---------------------- REC ----------------------

def rec_candidate(trace: Trace, path: Path) -> Optional[Any]:
    values = set(trace.input_values(path).values())
    return values.pop() if len(values) == 1 else None


def rec_validity(trace: Trace, params: ProtocolParams, path: Path) -> AuditResult:
    """
    Med én kandidat v* er hver MINE fra ærlig P_i symbol i av Enc(v*) og hver
    YOURS til P_j symbol j. Uten ærlig input gir ingen ærlig part ut.
    """
    values = set(trace.input_values(path).values())
    if len(values) > 1:
        return AuditResult("rec_validity", applicable=False, detail="flere kandidater")
    if not values:
        outs = trace.first_outputs(path)
        return AuditResult("rec_validity", ok=not outs, detail=f"utdata uten input: {sorted(outs)}" if outs else "")
    v_star = values.pop()
    code = CodeParams.for_message(params.ell, params.n, params.n - 2 * params.t)
    cw = encode(v_star, code)
    bad: list[int] = []
    for ev in trace.sends(path):
        if not trace.honest_at(ev["src"], ev["step"]) or ev["src"] == 0:
            continue
        if ev["kind"] == "MINE" and ev["body"] != cw[ev["src"] - 1]:
            bad.append(ev["seq"])
        elif ev["kind"] == "YOURS" and ev["body"] != cw[ev["dst"] - 1]:
            bad.append(ev["seq"])
    outs = [p for p, y in trace.first_outputs(path).items() if y != v_star]
    if bad or outs:
        return AuditResult("rec_validity", ok=False, detail=f"avvikende sendinger: {bad[:5]} utdata: {outs}")
    return AuditResult("rec_validity")


def rec_liveness(trace: Trace, path: Path) -> AuditResult:
    """Minst t+1 ærlige fikk v*: alle ærlige gir ut og terminerer."""
    holders = trace.input_values(path)
    if len(holders) < trace.t + 1 or len(set(holders.values())) != 1:
        return AuditResult("rec_liveness", applicable=False, detail="færre enn t+1 ærlige med v*")
    if trace.capped:
        return AuditResult("rec_liveness", ok=False, detail="hendelsestak nådd")
    missing = [p for p in trace.honest if (p, path) not in trace.terminated]
    return AuditResult("rec_liveness", ok=not missing, detail=f"ikke terminert: {missing}" if missing else "")


# ---------------------- KCA ----------------------

def kca_weak(trace: Trace, params: ProtocolParams, path: Path) -> AuditResult:
    """
    Høyst ceil(8/sigma) ulike ikke-⊥ utdata, og hvert utdata y støttet av minst
    sigma*n/8 ærlige parter med input y. Konservativ telling: ærlige gjennom hele
    sporet. Liberal telling: ærlige da input ble mottatt. Den liberale er dommen;
    konservativt avvik gir advarsel.
    """
    bound = params.kca_weak_bound
    outs = trace.first_outputs(path)
    distinct = sorted({y for y in outs.values() if y is not None}, key=repr)
    need = params.sigma * params.n / 8
    support: dict[str, dict[str, int]] = {}
    failed: list[str] = []
    warned: list[str] = []
    for y in distinct:
        holders = [p for p in trace.parties if trace.inputs.get((p, path)) and trace.inputs[(p, path)][0] == y]
        conservative = sum(1 for p in holders if p not in trace.corrupted)
        liberal = sum(1 for p in holders if trace.honest_at(p, trace.input_step[(p, path)]))
        support[str(y)] = {"conservative": conservative, "liberal": liberal}
        if liberal < need:
            failed.append(str(y))
        elif conservative < need:
            warned.append(str(y))
    ok = len(distinct) <= bound and not failed
    detail = f"ulike={len(distinct)} grense={bound} krav={float(need):.2f}"
    if failed:
        detail += f" svak støtte: {failed}"
    return AuditResult("kca_weak", ok=ok, warning=bool(warned), detail=detail,
                       data={"distinct": len(distinct), "bound": bound, "support": support})


# ---------------------- EXT ----------------------

def ext_onlyvstar(trace: Trace, path: Path) -> AuditResult:
    """Alle ærlige REC-input i EXT er lik det unike ærlige ikke-⊥ CA-utdataet."""
    ca_out = {y for y in trace.first_outputs(path + ("ca",)).values() if y is not None}
    rec_in = set(trace.input_values(path + ("rec",)).values())
    if len(ca_out) > 1:
        return AuditResult("ext_onlyvstar", ok=False, detail=f"{len(ca_out)} ulike ikke-⊥ CA-utdata")
    if rec_in and rec_in != ca_out:
        return AuditResult("ext_onlyvstar", ok=False, detail="REC-input avviker fra CA-utdata")
    return AuditResult("ext_onlyvstar")


def ext_some_terminates_ba(trace: Trace, path: Path) -> AuditResult:
    """Fikk alle ærlige input, terminerer minst én ærlig part BA."""
    if not _all_acquired(trace, path):
        return AuditResult("ext_some_ba", applicable=False, detail="ikke alle ærlige fikk input")
    ba = path + ("ba",)
    some = any((p, ba) in trace.terminated for p in trace.honest)
    return AuditResult("ext_some_ba", ok=some, detail="" if some else "ingen ærlig terminerte BA")


def ba_input_exclusive(trace: Trace, path: Path) -> AuditResult:
    ba = path + ("ba",)
    twice = [p for p in trace.honest if len(trace.inputs.get((p, ba), ())) > 1]
    return AuditResult("ba_input_exclusive", ok=not twice, detail=f"to BA-input: {twice}" if twice else "")


def counter_soundness(trace: Trace) -> AuditResult:
    """Tellerne stemmer med en uavhengig opptelling fra loggen."""
    hm, hb, bm, bb = trace.recount()
    honest, byz = trace.totals(), trace.totals(honest=False)
    ok = (hm, hb, bm, bb) == (honest.messages, honest.bits, byz.messages, byz.bits)
    return AuditResult("counter_soundness", ok=ok, detail="" if ok else "tellere avviker fra loggen")
