# src/network/trace.py
from __future__ import annotations

import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path as FsPath
from typing import Any, Iterable, Iterator, Optional

import pandas as pd

from coding.bits import Bits

log = logging.getLogger(__name__)

Path = tuple[str, ...]
Key = tuple[int, Path]

EVENT_TYPES = frozenset({
    "header", "acquire", "input", "send", "deliver", "drop", "output",
    "terminate", "corrupt", "corrupt_rejected", "coin", "cap", "summary",
})


# ---------------------- JSON-koding ----------------------

def to_jsonable(value: Any) -> Any:
    """Bits -> {"bits": hex, "len": n}; tupler -> lister; Enum -> verdi."""
    if isinstance(value, Bits):
        return {"bits": value.hex(), "len": value.length}
    if isinstance(value, (tuple, list)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if hasattr(value, "value") and not isinstance(value, (int, str, float, bool)):
        return value.value
    return value


def from_jsonable(value: Any) -> Any:
    """Motsatt vei: lister blir tupler, bits-objekter blir Bits."""
    if isinstance(value, list):
        return tuple(from_jsonable(v) for v in value)
    if isinstance(value, dict):
        if set(value) == {"bits", "len"}:
            return Bits.from_hex(value["bits"], int(value["len"]))
        return {k: from_jsonable(v) for k, v in value.items()}
    return value


@dataclass
class Counter:
    messages: int = 0
    bits: int = 0

    def add(self, bits: int) -> None:
        self.messages += 1
        self.bits += bits


@dataclass
class Trace:
    """
    Ordnet hendelseslogg for én simulering med indekser som bygges av record().

    Ærlig betyr aldri korrumpert i løpet av sporet. Tellere skiller mellom
    meldinger sendt av ærlige parter (ved sendetidspunktet) og bysantinske.
    """
    events: list[dict[str, Any]] = field(default_factory=list)
    n: int = 0
    t: int = 0
    header: dict[str, Any] = field(default_factory=dict)
    acquired: dict[Key, Any] = field(default_factory=dict)
    input_step: dict[Key, int] = field(default_factory=dict)
    inputs: dict[Key, list[Any]] = field(default_factory=lambda: defaultdict(list))
    outputs: dict[Key, list[Any]] = field(default_factory=lambda: defaultdict(list))
    output_meta: dict[Key, list[Optional[dict[str, Any]]]] = field(default_factory=lambda: defaultdict(list))
    terminated: dict[Key, int] = field(default_factory=dict)
    corrupted: dict[int, int] = field(default_factory=dict)
    honest_counters: dict[Path, Counter] = field(default_factory=lambda: defaultdict(Counter))
    byz_counters: dict[Path, Counter] = field(default_factory=lambda: defaultdict(Counter))
    causal_depth: int = 0
    forced: int = 0
    capped: bool = False
    coins: dict[tuple[Path, int], int] = field(default_factory=dict)

    # ---------------- innspilling ----------------
    def record(self, event: dict[str, Any]) -> None:
        kind = event["type"]
        if kind not in EVENT_TYPES:
            raise ValueError(f"Ukjent hendelsestype '{kind}'. Gyldige: {', '.join(sorted(EVENT_TYPES))}")
        self.events.append(event)
        step = event.get("step", 0)
        if kind == "header":
            self.header = dict(event)
            self.n = int(event["n"])
            self.t = int(event["t"])
        elif kind == "acquire":
            key = (event["party"], tuple(event["path"]))
            self.acquired[key] = event["value"]
            self.input_step.setdefault(key, step)
            self.inputs[key].append(event["value"])
        elif kind == "input":
            key = (event["party"], tuple(event["path"]))
            self.input_step.setdefault(key, step)
            self.inputs[key].append(event["value"])
        elif kind == "send":
            table = self.honest_counters if event["honest"] else self.byz_counters
            table[tuple(event["path"])].add(event["bits"])
        elif kind == "deliver":
            if event.get("honest"):
                self.causal_depth = max(self.causal_depth, event["depth"])
            if event.get("forced"):
                self.forced += 1
        elif kind == "output":
            key = (event["party"], tuple(event["path"]))
            self.outputs[key].append(event["value"])
            self.output_meta[key].append(event.get("meta"))
        elif kind == "terminate":
            self.terminated.setdefault((event["party"], tuple(event["path"])), step)
        elif kind == "corrupt":
            self.corrupted.setdefault(event["party"], step)
        elif kind == "coin":
            self.coins[(tuple(event["path"]), event["round"])] = event["bit"]
        elif kind == "cap":
            self.capped = True

    # ---------------- spørringer ----------------
    @property
    def parties(self) -> range:
        return range(1, self.n + 1)

    @property
    def honest(self) -> list[int]:
        return [p for p in self.parties if p not in self.corrupted]

    def honest_at(self, party: int, step: int) -> bool:
        """Ærlig på tidspunktet step (korrupsjoner virker fra og med sitt steg)."""
        when = self.corrupted.get(party)
        return when is None or when > step

    @property
    def root(self) -> Path:
        return tuple(self.header.get("root", ()))

    def first_outputs(self, path: Path, parties: Optional[Iterable[int]] = None) -> dict[int, Any]:
        who = self.honest if parties is None else parties
        return {p: self.outputs[(p, path)][0] for p in who if self.outputs.get((p, path))}

    def input_values(self, path: Path, parties: Optional[Iterable[int]] = None) -> dict[int, Any]:
        who = self.honest if parties is None else parties
        return {p: self.inputs[(p, path)][0] for p in who if self.inputs.get((p, path))}

    def sends(self, path: Optional[Path] = None, kind: Optional[str] = None) -> Iterator[dict[str, Any]]:
        for ev in self.events:
            if ev["type"] != "send":
                continue
            if path is not None and tuple(ev["path"]) != path:
                continue
            if kind is not None and ev["kind"] != kind:
                continue
            yield ev

    # ---------------- tellere ----------------
    def totals(self, prefix: Path = (), honest: bool = True) -> Counter:
        """Summer meldinger/bit for alle stier som starter med prefix."""
        table = self.honest_counters if honest else self.byz_counters
        out = Counter()
        for path, c in table.items():
            if path[:len(prefix)] == prefix:
                out.messages += c.messages
                out.bits += c.bits
        return out

    def recount(self) -> tuple[int, int, int, int]:
        """Uavhengig opptelling fra hendelsesloggen: (msgs, bits, byz_msgs, byz_bits)."""
        hm = hb = bm = bb = 0
        for ev in self.sends():
            if ev["honest"]:
                hm, hb = hm + 1, hb + ev["bits"]
            else:
                bm, bb = bm + 1, bb + ev["bits"]
        return hm, hb, bm, bb

    def summary(self) -> dict[str, Any]:
        honest = self.totals()
        byz = self.totals(honest=False)
        return {
            "messages_total": honest.messages,
            "bits_total": honest.bits,
            "byz_messages": byz.messages,
            "byz_bits": byz.bits,
            "causal_depth": self.causal_depth,
            "forced": self.forced,
            "capped": self.capped,
            "corrupted": sorted(self.corrupted),
            "per_path": {
                "/".join(p): [c.messages, c.bits] for p, c in sorted(self.honest_counters.items())
            },
        }

    def frame(self) -> pd.DataFrame:
        """Sendehendelser som DataFrame (én rad per konvolutt)."""
        rows = [
            {"seq": ev["seq"], "step": ev["step"], "src": ev["src"], "dst": ev["dst"],
             "path": "/".join(ev["path"]), "kind": ev["kind"], "bits": ev["bits"],
             "honest": ev["honest"], "depth": ev["depth"]}
            for ev in self.sends()
        ]
        return pd.DataFrame(rows, columns=["seq", "step", "src", "dst", "path", "kind", "bits", "honest", "depth"])

    # ---------------- eksport/import ----------------
    def to_jsonl(self) -> str:
        lines = [json.dumps(to_jsonable(ev), sort_keys=True, separators=(",", ":")) for ev in self.events]
        return "\n".join(lines) + ("\n" if lines else "")

    def write(self, path: FsPath | str) -> FsPath:
        target = FsPath(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(self.to_jsonl(), encoding="utf-8")
        log.info("Spor skrevet | path=%s events=%d", target, len(self.events))
        return target

    @classmethod
    def from_jsonl(cls, text: str) -> "Trace":
        trace = cls()
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValueError(f"Ugyldig sporlinje {lineno}: {e.msg} (kolonne {e.colno})") from e
            trace.record(from_jsonable(raw))
        return trace

    @classmethod
    def read(cls, path: FsPath | str) -> "Trace":
        return cls.from_jsonl(FsPath(path).read_text(encoding="utf-8"))
