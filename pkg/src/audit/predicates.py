# src/audit/predicates.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Optional

from audit.properties import AuditResult
from coding.rs import CodeParams, encode
from core.params import ProtocolParams
from network.trace import Path, Trace

log = logging.getLogger(__name__)


@dataclass
class CorePredicateReport:
    """
    k-kjernepredikatet: minst k ærlige parter har samme verdi (CA1: input,
    CA2: KCA-utdata) og har aldri multicastet ⊥.
    """
    k: int
    witness: Optional[Any] = None
    holding: bool = False
    supporters: frozenset[int] = frozenset()
    bot_senders: frozenset[int] = frozenset()


@dataclass
class CollisionReport:
    """Per ærlig part P_i: mengden E_i av kolliderende ærlige parter."""
    bound: int
    sets: dict[int, frozenset[int]] = field(default_factory=dict)

    @property
    def max_size(self) -> int:
        return max((len(s) for s in self.sets.values()), default=0)

    @property
    def ok(self) -> bool:
        return self.max_size <= self.bound


def _bot_senders(trace: Trace, path: Path) -> frozenset[int]:
    honest = set(trace.honest)
    return frozenset(ev["src"] for ev in trace.sends(path, "BOT") if ev["src"] in honest)


def core_threshold(protocol: str, params: ProtocolParams) -> int:
    """CA1: t+1. CA2: ceil((n-t)/2)."""
    if protocol.upper() == "CA1":
        return params.t + 1
    if protocol.upper() == "CA2":
        return math.ceil((params.n - params.t) / 2)
    raise ValueError(f"Ukjent CA-variant '{protocol}'. Gyldige: CA1, CA2")


def _core_values(trace: Trace, protocol: str, path: Path) -> dict[int, Any]:
    if protocol.upper() == "CA1":
        return trace.input_values(path)
    return trace.first_outputs(path + ("kca",))


def core_predicate(trace: Trace, protocol: str, k: int, path: Path) -> CorePredicateReport:
    """
    Regn ut kjernepredikatet fra sann ærlig input (CA1) eller ærlige KCA-utdata
    (CA2) og ⊥-multicastene på CA-instansen.
    """
    if not trace.header:
        raise ValueError("Sporet mangler header-post")
    bots = _bot_senders(trace, path)
    values = _core_values(trace, protocol, path)
    groups: dict[Any, set[int]] = {}
    for p, v in values.items():
        if v is not None and p not in bots:
            groups.setdefault(v, set()).add(p)
    if not groups:
        return CorePredicateReport(k=k, bot_senders=bots)
    witness, supporters = max(groups.items(), key=lambda item: (len(item[1]), -min(item[1])))
    return CorePredicateReport(
        k=k, witness=witness, holding=len(supporters) >= k,
        supporters=frozenset(supporters), bot_senders=bots,
    )


def core_dichotomy(trace: Trace, protocol: str, params: ProtocolParams, path: Path) -> AuditResult:
    """
    Holder predikatet med vitne v*, gir en ærlig part REC input hvis og bare
    hvis den er v*-holder, og inputen er v*. Holder det ikke, har minst t+1
    ærlige multicastet ⊥.
    """
    name = f"core_dichotomy_{protocol.lower()}"
    k = core_threshold(protocol, params)
    report = core_predicate(trace, protocol, k, path)
    values = _core_values(trace, protocol, path)
    rec_inputs = trace.input_values(path + ("rec",))
    data = {"k": k, "holding": report.holding, "supporters": len(report.supporters),
            "bot_senders": len(report.bot_senders)}
    complete = all(trace.inputs.get((p, path)) for p in trace.honest)
    if not complete or trace.capped:
        return AuditResult(name, applicable=False, detail="ufullstendig spor", data=data)
    if report.holding:
        wrong = [p for p, v in rec_inputs.items() if v != report.witness or values.get(p) != report.witness]
        if wrong:
            return AuditResult(name, ok=False, detail=f"REC-input uten vitneverdi: {wrong}", data=data)
        # hver v*-holder uten ⊥ når |A ∪ C| >= n-t i et stille spor og skal mate REC
        missing = sorted(p for p in report.supporters if p not in rec_inputs)
        if missing:
            return AuditResult(name, ok=False, detail=f"v*-holdere uten REC-input: {missing}", data=data)
        return AuditResult(name, data=data)
    if len(report.bot_senders) < params.t + 1:
        return AuditResult(name, ok=False, detail=f"predikatet feiler, men bare {len(report.bot_senders)} ærlige ⊥",
                           data=data)
    return AuditResult(name, data=data)


def collision_audit(trace: Trace, params: ProtocolParams, path: Path) -> CollisionReport:
    """
    E_i = ærlige P_j med z_j ∉ {⊥, z_i} der P_j sitt symbol j i Enc_delta(z_j)
    er lik symbol j i Enc_delta(z_i). Grensen er floor((n-3t-1)/2).
    """
    code = CodeParams.for_message(params.ell, params.n, params.ca2_delta)
    z = trace.first_outputs(path + ("kca",))
    enc = {v: encode(v, code) for v in set(z.values()) if v is not None}
    report = CollisionReport(bound=params.collision_bound)
    for i, zi in z.items():
        if zi is None:
            continue
        own = enc[zi]
        report.sets[i] = frozenset(
            j for j, zj in z.items()
            if zj is not None and zj != zi and enc[zj][j - 1] == own[j - 1]
        )
    if not report.ok:
        log.warning("Kollisjonsgrense brutt | max=%d bound=%d", report.max_size, report.bound)
    return report


def collision_result(trace: Trace, params: ProtocolParams, path: Path) -> AuditResult:
    report = collision_audit(trace, params, path)
    return AuditResult("collision_bound", ok=report.ok,
                       detail=f"max|E_i|={report.max_size} grense={report.bound}",
                       data={"max": report.max_size, "bound": report.bound})


def no_bot_on(trace: Trace, path: Path) -> AuditResult:
    """Ingen ærlig part multicaster ⊥ på CA-instansen (gjelder ved felles input)."""
    bots = _bot_senders(trace, path)
    return AuditResult("no_honest_bot", ok=not bots, detail=f"⊥ fra {sorted(bots)}" if bots else "")
