# scripts/run_sim.py
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional

import numpy as np
from pydantic import ValidationError

from audit.graph_lemma import EXHAUSTIVE_MAX_VERTICES, exhaustive_sweep, random_sweep
from core.config import settings
from core.errors import ConfigError, ThresholdError
from core.logging import setup_logging
from core.scenario import Scenario, load_grid, load_scenario
from network.trace import Trace
from scripts.harness import audit_trace, golden_check, run_scenario, sweep

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2

# ---------------------- Argumenter ----------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out-dir", type=str, help="Mappe for spor og rapporter (default settings.out_dir)")
    p.add_argument("--strict", action="store_true", help="Feil også på revisjonsadvarsler")
    p.add_argument("--log-level", type=str, help="Overstyr loggnivå (DEBUG, INFO, ...)")


def _overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=str, required=True, help="Scenario- eller grid-fil (JSON)")
    p.add_argument("--seed", type=int, help="Overstyr frø")
    p.add_argument("--fairness-K", dest="fairness_k", type=int, help="Rettferdighetsvakt K (absolutt antall steg)")
    p.add_argument("--ba-backend", type=str, choices=["oracle", "coin"], help="Binær BA for EXT")


def parse_args(argv: Optional[list[str]] = None) -> argparse.Namespace:
    p = argparse.ArgumentParser(prog="aba-sim", description="Simuler og revider asynkrone BA-protokoller")
    sub = p.add_subparsers(dest="verb", required=True)

    # Enkeltscenario
    run = sub.add_parser("run", help="Kjør ett scenario (alle frø i scenarioet)")
    _overrides(run)
    _common(run)
    run.add_argument("--golden", type=str, help="Byte-sammenlign spor mot gullspor i denne mappen")
    run.add_argument("--update-golden", action="store_true", help="Skriv gullspor i stedet for å sammenligne")

    # Sveip
    sw = sub.add_parser("sweep", help="Kjør et grid og skriv samlet CSV")
    _overrides(sw)
    _common(sw)
    sw.add_argument("--no-traces", action="store_true", help="Ikke skriv sporfil per kjøring")

    # Revisjon av eksisterende spor
    au = sub.add_parser("audit", help="Kjør revisorene på nytt for en sporfil")
    au.add_argument("trace", type=str, help="Sporfil (JSONL) med header-post")
    _common(au)

    # Graf-lemma
    lm = sub.add_parser("lemma", help="Uttømmende graf-lemma-søk")
    lm.add_argument("--max-vertices", type=int, default=EXHAUSTIVE_MAX_VERTICES, help="Største |V| (default 6)")
    lm.add_argument("--random", type=int, default=0, help="Antall tilfeldige grafer per (n, t) over grensen")
    lm.add_argument("--seed", type=int, default=0, help="Frø for tilfeldige grafer")
    _common(lm)

    return p.parse_args(argv)


# ---------------------- Verb ----------------------

def _apply_overrides(scenario: Scenario, args: argparse.Namespace) -> Scenario:
    update = {}
    if getattr(args, "seed", None) is not None:
        update["seed"] = args.seed
    if getattr(args, "fairness_k", None) is not None:
        update["fairness_k"] = args.fairness_k
    if getattr(args, "ba_backend", None):
        update["ba_backend"] = args.ba_backend
    if getattr(args, "strict", False):
        update["strict"] = True
    if not update:
        return scenario
    return Scenario.model_validate({**scenario.model_dump(mode="json"), **update})


def cmd_run(args: argparse.Namespace, out_dir: Path) -> int:
    log = logging.getLogger("runner")
    scenario = _apply_overrides(load_scenario(args.config), args)
    status = EXIT_OK
    for seed in scenario.seed_list():
        report = run_scenario(scenario, seed, out_dir)
        if args.golden:
            report.audits.append(golden_check(report, args.golden, update=args.update_golden))
        for a in report.audits:
            if not a.ok:
                log.error("❌ %s | seed=%d | %s", a.name, seed, a.detail)
        if not report.passed(scenario.strict):
            status = EXIT_FAIL
    log.info("Ferdig | scenario=%s seeds=%d status=%d", scenario.name, scenario.seeds, status)
    return status


def cmd_sweep(args: argparse.Namespace, out_dir: Path) -> int:
    log = logging.getLogger("runner")
    grid = load_grid(args.config)
    if any(getattr(args, k, None) is not None for k in ("seed", "fairness_k", "ba_backend")) or args.strict:
        grid = grid.model_copy(update={"base": _apply_overrides(grid.base, args)})
    result = sweep(grid, out_dir, write_traces=not args.no_traces)
    for name, fit in result.fits.items():
        log.info("Konstant | protocol=%s c=%.3f max_dev=%.3f", name, fit.constant, fit.max_deviation)
    failed = int((~result.frame["ok"].astype(bool)).sum()) if not result.frame.empty else 0
    warned = int((result.frame["warnings"].fillna("") != "").sum()) if not result.frame.empty else 0
    log.info("Sveip ferdig | rows=%d failed=%d warned=%d depth_stable=%s", len(result.frame), failed, warned,
             result.depth_stable)
    if not result.ok or (grid.base.strict and warned):
        return EXIT_FAIL
    return EXIT_OK


def cmd_audit(args: argparse.Namespace, out_dir: Path) -> int:
    log = logging.getLogger("runner")
    trace = Trace.read(args.trace)
    results, _ = audit_trace(trace)
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / (Path(args.trace).stem + ".reaudit.json")
    target.write_text(json.dumps([r.as_row() for r in results], indent=2, sort_keys=True), encoding="utf-8")
    ok = all(r.ok for r in results) and not (args.strict and any(r.warning for r in results))
    log.info("Revisjon ferdig | trace=%s ok=%s report=%s", args.trace, ok, target)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_lemma(args: argparse.Namespace, out_dir: Path) -> int:
    log = logging.getLogger("runner")
    report = exhaustive_sweep(max_vertices=args.max_vertices)
    violations = list(report.violations)
    if args.random:
        rng = np.random.default_rng(args.seed)
        for size in range(args.max_vertices + 1, args.max_vertices + 4):
            for t in range(0, size // 2 + 1):
                n = size + t
                if n > 3 * t:
                    violations += random_sweep(n, t, args.random, rng).violations
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "lemma.json").write_text(json.dumps({
        "graphs": report.graphs, "cases": report.cases, "skipped": report.skipped,
        "violations": violations[:100],
    }, indent=2), encoding="utf-8")
    log.info("Graf-lemma ferdig | graphs=%d cases=%d violations=%d", report.graphs, report.cases, len(violations))
    return EXIT_OK if not violations else EXIT_FAIL


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "audit": cmd_audit,
    "lemma": cmd_lemma,
}


def main(argv: Optional[list[str]] = None) -> int:
    args = parse_args(argv)
    setup_logging(args.log_level)
    log = logging.getLogger("runner")
    out_dir = Path(args.out_dir or settings.out_dir)
    log.info("🚀 aba-sim %s | out_dir=%s", args.verb, out_dir)
    try:
        return COMMANDS[args.verb](args, out_dir)
    except (ConfigError, ThresholdError, ValidationError) as e:
        log.error("Ugyldig konfigurasjon: %s", e)
        return EXIT_CONFIG
    except FileNotFoundError as e:
        log.error("Fant ikke fil: %s", e)
        return EXIT_CONFIG
    except Exception as e:
        log.exception("Uventet feil: %s", e)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
