# scripts/harness.py
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

import pandas as pd
from pydantic import ValidationError

from audit import predicates, properties
from audit.complexity import (
    DEPTH_BOUNDS, FITTED, ComplexityReport, EnvelopeFit, complexity_audit, depth_independent_of_ell,
    fit_envelope,
)
from audit.properties import AuditResult
from core.config import settings
from core.params import ProtocolParams
from core.scenario import Scenario, SweepGrid
from network.adversary import resolve_strategy
from network.simulator import Simulator
from network.trace import Path as InstancePath, Trace
from protocol.registry import make_factory

log = logging.getLogger("runner")

Auditor = Callable[[Trace, ProtocolParams, InstancePath], AuditResult]


# ---------------------- Revisorsett per protokoll ----------------------

def _p(fn: Callable[..., AuditResult], **kw: Any) -> Auditor:
    """Tilpass en revisor som bare tar (trace, path)."""
    return lambda trace, params, path: fn(trace, path, **kw)


def _kca_inner(trace: Trace, params: ProtocolParams, path: InstancePath) -> AuditResult:
    result = properties.kca_weak(trace, params, path + ("kca",))
    result.name = "kca_weak_inner"
    return result


AUDIT_SUITES: dict[str, dict[str, Auditor]] = {
    "REC": {
        "rec_validity": properties.rec_validity,
        "rec_liveness": _p(properties.rec_liveness),
        "totality": _p(properties.totality),
        "single_output": _p(properties.single_output),
    },
    "SRA": {
        "validity": _p(properties.validity),
        "consistency": _p(properties.weak_consistency, k=1, name="consistency"),
        "liveness": _p(properties.liveness, common_only=True),
        "single_output": _p(properties.single_output),
    },
    "PRA": {
        "validity": _p(properties.validity),
        "consistency": _p(properties.weak_consistency, k=1, name="consistency"),
        "liveness": _p(properties.liveness, common_only=True),
        "single_output": _p(properties.single_output),
    },
    "KCA": {
        "validity": _p(properties.validity),
        "kca_weak": properties.kca_weak,
        "liveness": _p(properties.liveness),
        "single_output": _p(properties.single_output),
    },
    "CA1": {
        "validity": _p(properties.validity),
        "weak_consistency": _p(properties.weak_consistency),
        "liveness": _p(properties.liveness),
        "single_output": _p(properties.single_output),
        "core_dichotomy": lambda trace, params, path: predicates.core_dichotomy(trace, "CA1", params, path),
    },
    "CA2": {
        "validity": _p(properties.validity),
        "weak_consistency": _p(properties.weak_consistency),
        "liveness": _p(properties.liveness),
        "single_output": _p(properties.single_output),
        "core_dichotomy": lambda trace, params, path: predicates.core_dichotomy(trace, "CA2", params, path),
        "collision_bound": predicates.collision_result,
        "kca_weak_inner": _kca_inner,
    },
    "EXT": {
        "validity": _p(properties.validity),
        "consistency": _p(properties.consistency),
        "intrusion_tolerance": _p(properties.intrusion_tolerance),
        "termination": _p(properties.termination),
        "totality": _p(properties.totality),
        "single_output": _p(properties.single_output),
        "ext_onlyvstar": _p(properties.ext_onlyvstar),
        "ext_some_ba": _p(properties.ext_some_terminates_ba),
        "ba_input_exclusive": _p(properties.ba_input_exclusive),
    },
    "BA": {
        "validity": _p(properties.validity),
        "consistency": _p(properties.consistency),
        "termination": _p(properties.termination),
        "totality": _p(properties.totality),
        "single_output": _p(properties.single_output),
    },
}


def suite_for(scenario: Scenario) -> dict[str, Auditor]:
    suite = dict(AUDIT_SUITES[scenario.protocol])
    if scenario.wrap and scenario.protocol in ("CA1", "CA2"):
        suite["intrusion_tolerance"] = _p(properties.intrusion_tolerance)
    if scenario.audits is not None:
        unknown = sorted(set(scenario.audits) - set(suite) - {"counter_soundness", "complexity"})
        if unknown:
            raise ValueError(f"Ukjente revisorer {unknown}. Gyldige: {', '.join(suite)}, counter_soundness, complexity")
        suite = {k: v for k, v in suite.items() if k in scenario.audits}
    return suite


def _complexity_result(trace: Trace, scenario: Scenario,
                       params: ProtocolParams) -> tuple[AuditResult, Optional[ComplexityReport]]:
    key = scenario.protocol
    if key == "BA":
        return AuditResult("complexity", applicable=False, detail="ingen bitform for binær BA"), None
    # dybdegrensen gjelder fifo med all input ved steg 0
    fifo = scenario.adversary.strategy == "fifo" and scenario.inputs.at == 0 and scenario.inputs.stagger == 0
    report = complexity_audit(
        trace, params, key,
        bit_constant=settings.bit_constants.get(key),
        message_constants=settings.message_constants or None,
        check_depth=fifo and scenario.inputs.family != "explicit",
    )
    detail = (f"msgs={report.messages}/{report.message_bound} bits={report.bits} "
              f"ratio={report.ratio:.3f} depth={report.depth}")
    ok = report.messages_ok and report.depth_ok is not False
    return AuditResult("complexity", ok=ok, warning=report.bits_ok is False, detail=detail,
                       data={"messages": report.messages, "bits": report.bits, "ratio": report.ratio}), report


def audit_trace(trace: Trace, scenario: Optional[Scenario] = None) -> tuple[list[AuditResult], Optional[ComplexityReport]]:
    """
    Kjør revisorene for protokollen på et ferdig spor. Uten scenario leses det
    fra header-posten, slik at et eksportert spor kan revideres alene.
    """
    if scenario is None:
        raw = trace.header.get("scenario")
        if raw is None:
            raise ValueError("Sporet mangler scenario i header-posten")
        scenario = Scenario.model_validate(raw)
    params = scenario.params()
    path = trace.root
    results: list[AuditResult] = []
    for name, auditor in suite_for(scenario).items():
        try:
            results.append(auditor(trace, params, path))
        except Exception as e:
            log.exception("Revisor feilet | audit=%s", name)
            results.append(AuditResult(name, ok=False, detail=f"unntak: {e}"))
    report: Optional[ComplexityReport] = None
    if scenario.audits is None or "counter_soundness" in scenario.audits:
        results.append(properties.counter_soundness(trace))
    if scenario.audits is None or "complexity" in scenario.audits:
        result, report = _complexity_result(trace, scenario, params)
        results.append(result)
    for r in results:
        if not r.ok:
            log.error("Revisjon feilet | audit=%s | %s", r.name, r.detail)
        elif r.warning:
            log.warning("Revisjon advarsel | audit=%s | %s", r.name, r.detail)
        else:
            log.debug("Revisjon ok | audit=%s applicable=%s", r.name, r.applicable)
    return results, report


# ---------------------- Enkeltkjøring ----------------------

@dataclass
class RunReport:
    scenario: Scenario
    seed: int
    trace: Trace
    audits: list[AuditResult] = field(default_factory=list)
    complexity: Optional[ComplexityReport] = None
    trace_path: Optional[Path] = None

    @property
    def ok(self) -> bool:
        return all(a.ok for a in self.audits)

    @property
    def warnings(self) -> list[str]:
        return [a.name for a in self.audits if a.warning]

    def passed(self, strict: bool = False) -> bool:
        return self.ok and not (strict and self.warnings)

    def row(self) -> dict[str, Any]:
        s = self.scenario
        summary = self.trace.summary()
        c = self.complexity
        return {
            "protocol": s.protocol, "n": s.n, "t": s.t, "ell": s.ell, "eps": s.eps, "lam": s.lam,
            "ca_backend": s.ca_backend, "ba_backend": s.ba_backend,
            "strategy": s.adversary.strategy, "K": self.trace.header.get("fairness_k"), "seed": self.seed,
            "messages": summary["messages_total"], "bits": summary["bits_total"],
            "byz_messages": summary["byz_messages"], "byz_bits": summary["byz_bits"],
            "layer_messages": c.messages if c else None, "layer_bits": c.bits if c else None,
            "envelope": c.envelope if c else None, "depth": summary["causal_depth"],
            "forced": summary["forced"], "capped": summary["capped"],
            "ok": self.ok, "warnings": ";".join(self.warnings),
            "failed": ";".join(a.name for a in self.audits if not a.ok), "error": "",
        }


def simulate(scenario: Scenario, seed: int) -> Trace:
    """Bygg maskiner, inputplan og motstander for ett frø og kjør til stillstand."""
    params = scenario.params()
    factory = make_factory(scenario.protocol, params, scenario.ca_backend, scenario.ba_backend, scenario.wrap)
    adv = scenario.adversary
    strategy = resolve_strategy(adv.strategy, targets=adv.targets, **adv.params)
    sim = Simulator(
        params=params,
        factory=factory,
        inputs=scenario.build_inputs(seed),
        strategy=strategy,
        seed=seed,
        fairness_k=scenario.fairness_k,
        event_cap=scenario.event_cap or settings.event_cap,
        settings=settings.simulator_settings(),
        header={"scenario": scenario.model_dump(mode="json")},
    )
    return sim.run()


def trace_file(out_dir: Path, scenario: Scenario, seed: int) -> Path:
    return out_dir / f"{scenario.name}-seed{seed}.jsonl"


def run_scenario(scenario: Scenario, seed: Optional[int] = None, out_dir: Optional[Path | str] = None) -> RunReport:
    """
    Én kjøring: simuler, revider og (med out_dir) skriv spor, revisjonsrapport
    og tellersammendrag.
    """
    seed = scenario.seed if seed is None else int(seed)
    trace = simulate(scenario, seed)
    audits, complexity = audit_trace(trace, scenario)
    report = RunReport(scenario=scenario, seed=seed, trace=trace, audits=audits, complexity=complexity)
    if out_dir is not None:
        base = Path(out_dir)
        report.trace_path = trace.write(trace_file(base, scenario, seed))
        audit_path = base / f"{scenario.name}-seed{seed}.audit.json"
        audit_path.write_text(json.dumps({
            "schema_version": scenario.schema_version,
            "ok": report.ok,
            "audits": [a.as_row() for a in audits],
            "summary": trace.summary(),
        }, indent=2, sort_keys=True, default=str), encoding="utf-8")
    log.info("Kjøring ferdig | scenario=%s protocol=%s seed=%d ok=%s warnings=%d",
             scenario.name, scenario.protocol, seed, report.ok, len(report.warnings))
    return report


def golden_check(report: RunReport, golden_dir: Path | str, update: bool = False) -> AuditResult:
    """Byte-sammenlign sporet med lagret gullspor (eller skriv det med update=True)."""
    target = trace_file(Path(golden_dir), report.scenario, report.seed)
    text = report.trace.to_jsonl()
    if update:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text, encoding="utf-8")
        log.info("Gullspor oppdatert | path=%s", target)
        return AuditResult("golden", detail=f"skrevet {target}")
    if not target.is_file():
        return AuditResult("golden", ok=False, detail=f"mangler gullspor {target}")
    same = target.read_text(encoding="utf-8") == text
    return AuditResult("golden", ok=same, detail="" if same else f"avvik mot {target}")


# ---------------------- Sveip ----------------------

SWEEP_COLUMNS = [
    "protocol", "n", "t", "ell", "eps", "lam", "ca_backend", "ba_backend", "strategy", "K", "seed",
    "messages", "bits", "byz_messages", "byz_bits", "layer_messages", "layer_bits", "envelope",
    "depth", "forced", "capped", "ok", "warnings", "failed", "error",
]


@dataclass
class SweepResult:
    frame: pd.DataFrame
    fits: dict[str, EnvelopeFit] = field(default_factory=dict)
    depth_stable: bool = True
    csv_path: Optional[Path] = None

    @property
    def ok(self) -> bool:
        if self.frame.empty:
            return True
        fitted_ok = all(f.within for k, f in self.fits.items() if k in FITTED)
        return bool(self.frame["ok"].all()) and fitted_ok and self.depth_stable


def sweep(grid: SweepGrid, out_dir: Optional[Path | str] = None, write_traces: bool = True) -> SweepResult:
    """
    Én rad per gridpunkt. Feil i enkeltpunkter registreres i raden og sveipet
    fortsetter. Med out_dir skrives sweep.csv (alltid med header) og eventuelt spor.
    """
    rows: list[dict[str, Any]] = []
    base_dir = Path(out_dir) if out_dir is not None else None
    trace_dir = base_dir / "traces" if base_dir is not None and write_traces else None
    for point in grid.points():
        try:
            scenario = grid.scenario_for(point)
            report = run_scenario(scenario, point["seed"], trace_dir)
            rows.append(report.row())
        except (ValidationError, ValueError) as e:
            log.warning("Gridpunkt avvist | point=%s | %s", point, e)
            rows.append(_error_row(grid.base, point, str(e).splitlines()[0]))
        except Exception as e:
            log.exception("Gridpunkt feilet | point=%s", point)
            rows.append(_error_row(grid.base, point, f"{type(e).__name__}: {e}"))
    frame = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    result = SweepResult(frame=frame)
    result.fits = fit_report(frame)
    result.depth_stable = _depth_stable(frame)
    if base_dir is not None:
        base_dir.mkdir(parents=True, exist_ok=True)
        result.csv_path = base_dir / "sweep.csv"
        frame.to_csv(result.csv_path, index=False)
        (base_dir / "fits.json").write_text(json.dumps(
            {k: {"constant": f.constant, "max_deviation": f.max_deviation, "within": f.within}
             for k, f in result.fits.items()}, indent=2, sort_keys=True), encoding="utf-8")
        log.info("Sveip skrevet | path=%s rows=%d", result.csv_path, len(frame))
    return result


def _error_row(base: Scenario, point: dict[str, Any], error: str) -> dict[str, Any]:
    row: dict[str, Any] = {c: None for c in SWEEP_COLUMNS}
    row.update({
        "protocol": base.protocol, "n": point["n"], "t": point["t"], "ell": point["ell"],
        "eps": point["eps"], "lam": base.lam, "ca_backend": base.ca_backend, "ba_backend": base.ba_backend,
        "strategy": point["strategy"], "seed": point["seed"], "ok": False, "warnings": "", "failed": "",
        "error": error,
    })
    return row


def fit_report(frame: pd.DataFrame) -> dict[str, EnvelopeFit]:
    """Tilpass bitkonstanten per protokoll på fifo-radene (eller alle rader uten fifo)."""
    fits: dict[str, EnvelopeFit] = {}
    usable = frame.dropna(subset=["layer_bits", "envelope"]) if not frame.empty else frame
    for protocol, rows in (usable.groupby("protocol") if not usable.empty else []):
        if protocol == "BA":
            continue
        fifo = rows[rows["strategy"] == "fifo"]
        data = fifo if not fifo.empty else rows
        data = data.assign(bits=data["layer_bits"])
        fit = fit_envelope(data)
        fits[str(protocol)] = fit
        log.info("Konvolutt tilpasset | protocol=%s c=%.3f max_dev=%.3f within=%s",
                 protocol, fit.constant, fit.max_deviation, fit.within)
    return fits


def _depth_stable(frame: pd.DataFrame) -> bool:
    if frame.empty:
        return True
    rows = frame[(frame["strategy"] == "fifo") & frame["protocol"].isin(list(DEPTH_BOUNDS))].dropna(subset=["depth"])
    return depth_independent_of_ell(rows)

