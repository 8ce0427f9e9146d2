# src/core/scenario.py
from __future__ import annotations

import itertools
import json
import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterator, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from coding.bits import Bits
from core.config import settings
from core.errors import ConfigError
from core.params import EPS_BOUND, ProtocolParams, parse_fraction
from network.adversary import STRATEGY_MAP
from network.simulator import ScheduledInput
from protocol.registry import resolve_ba_backend, resolve_ca_backend, resolve_protocol, threshold_key

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def _fraction_text(raw: Any) -> str:
    return str(parse_fraction(raw))


def default_t(protocol: str, n: int, eps: Fraction | str = "1", ca_backend: str = "CA1") -> int:
    """Største t protokollen tåler: floor((n-1)/3) eller floor(n/(3+eps))."""
    key = threshold_key(protocol, ca_backend)
    if key in EPS_BOUND:
        return math.floor(Fraction(n) / (3 + parse_fraction(eps)))
    return (n - 1) // 3


class ExplicitInput(BaseModel):
    model_config = ConfigDict(extra="forbid")

    party: int = Field(ge=1)
    value: str                  # hex for ell-bit verdier, "0"/"1" for binær BA
    at: int = Field(default=0, ge=0)


class InputSpec(BaseModel):
    """
    Hvem får input, hva og når.
      common   : alle får samme verdi
      split    : `classes` verdiklasser fordelt rundt (part i får klasse (i-1) % classes)
      minority : de første `holders` partene (default t+1) får verdien, resten ingenting
      none     : ingen input
      explicit : listen i `explicit`
    Part i får input ved steg at + (i-1)*stagger.
    """
    model_config = ConfigDict(extra="forbid")

    schema_version: int = SCHEMA_VERSION
    family: Literal["common", "split", "minority", "none", "explicit"] = "common"
    value: Optional[str] = None
    classes: int = Field(default=2, ge=1)
    holders: Optional[int] = Field(default=None, ge=0)
    at: int = Field(default=0, ge=0)
    stagger: int = Field(default=0, ge=0)
    explicit: list[ExplicitInput] = Field(default_factory=list)


class AdversarySpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: int = SCHEMA_VERSION
    strategy: str = "fifo"
    targets: Optional[list[int]] = None
    params: dict[str, Any] = Field(default_factory=dict)

    @field_validator("strategy")
    @classmethod
    def _known_strategy(cls, v: str) -> str:
        key = v.strip().lower()
        if key not in STRATEGY_MAP:
            raise ValueError(f"Ukjent strategi '{v}'. Gyldige: {', '.join(STRATEGY_MAP.keys())}")
        return key


class Scenario(BaseModel):
    """Én simulering: protokoll, parametre, input, motstander og frø."""
    model_config = ConfigDict(extra="forbid")

    schema_version: int = SCHEMA_VERSION
    name: str = "scenario"
    protocol: str
    n: int = Field(ge=1)
    t: int = Field(ge=0)
    ell: int = Field(default=64, ge=1)
    lam: int = Field(default_factory=lambda: settings.default_lambda, ge=1)
    eps: str = "1"
    ca_backend: str = "CA1"
    ba_backend: str = Field(default_factory=lambda: settings.ba_backend)
    wrap: bool = False
    inputs: InputSpec = Field(default_factory=InputSpec)
    adversary: AdversarySpec = Field(default_factory=AdversarySpec)
    seed: int = 0
    seeds: int = Field(default=1, ge=1)
    fairness_k: Optional[int] = Field(default=None, ge=1)
    event_cap: Optional[int] = Field(default=None, ge=1)
    audits: Optional[list[str]] = None
    strict: bool = False

    @field_validator("protocol")
    @classmethod
    def _known_protocol(cls, v: str) -> str:
        return resolve_protocol(v)[0]

    @field_validator("ca_backend")
    @classmethod
    def _known_ca(cls, v: str) -> str:
        return resolve_ca_backend(v)[0]

    @field_validator("ba_backend")
    @classmethod
    def _known_ba(cls, v: str) -> str:
        return resolve_ba_backend(v)[0]

    @field_validator("eps", mode="before")
    @classmethod
    def _exact_eps(cls, v: Any) -> str:
        return _fraction_text(v)

    @model_validator(mode="after")
    def _thresholds(self) -> "Scenario":
        self.params().require(self.threshold_key)
        width = self.value_width
        for item in self.inputs.explicit:
            if item.party > self.n:
                raise ValueError(f"Input til ukjent part P{item.party} (n={self.n})")
            _parse_value(item.value, width, self.binary)
        if self.inputs.value is not None:
            _parse_value(self.inputs.value, width, self.binary)
        return self

    # ---------------- avledet ----------------
    @property
    def threshold_key(self) -> str:
        return threshold_key(self.protocol, self.ca_backend, self.ba_backend)

    @property
    def binary(self) -> bool:
        return self.protocol == "BA"

    @property
    def value_width(self) -> int:
        return 1 if self.binary else self.ell

    def params(self) -> ProtocolParams:
        return ProtocolParams(n=self.n, t=self.t, ell=self.ell, lam=self.lam, eps=parse_fraction(self.eps))

    def seed_list(self) -> list[int]:
        return [self.seed + i for i in range(self.seeds)]

    def build_inputs(self, seed: int) -> list[ScheduledInput]:
        """Deterministisk inputplan for frøet; strømmen ligger etter simulatorens n+2 strømmer."""
        spec = self.inputs
        rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(self.n + 3)[self.n + 2])
        width = self.value_width

        def when(p: int) -> int:
            return spec.at + (p - 1) * spec.stagger

        if spec.family == "none":
            return []
        if spec.family == "explicit":
            return [ScheduledInput(i.party, _parse_value(i.value, width, self.binary), i.at) for i in spec.explicit]
        if spec.family == "split":
            values = _distinct_values(rng, width, spec.classes, self.binary)
            return [ScheduledInput(p, values[(p - 1) % len(values)], when(p)) for p in range(1, self.n + 1)]
        value = _parse_value(spec.value, width, self.binary) if spec.value is not None else _random_value(rng, width, self.binary)
        parties = range(1, self.n + 1)
        if spec.family == "minority":
            holders = spec.holders if spec.holders is not None else self.t + 1
            parties = range(1, min(self.n, holders) + 1)
        return [ScheduledInput(p, value, when(p)) for p in parties]


def _parse_value(raw: str, width: int, binary: bool = False) -> Any:
    if binary:
        if raw.strip() not in ("0", "1"):
            raise ValueError(f"Binær input må være 0 eller 1, fikk {raw!r}")
        return int(raw.strip())
    try:
        return Bits.from_hex(raw, width)
    except ValueError as e:
        raise ValueError(f"Ugyldig inputverdi '{raw}' for {width} bit: {e}") from e


def _random_value(rng: np.random.Generator, width: int, binary: bool) -> Any:
    if binary:
        return int(rng.integers(2))
    raw = rng.integers(0, 256, size=(width + 7) // 8, dtype=np.uint8).tobytes()
    return Bits(int.from_bytes(raw, "big") >> (8 * len(raw) - width), width)


def _distinct_values(rng: np.random.Generator, width: int, classes: int, binary: bool) -> list[Any]:
    if binary:
        return [0, 1][: max(1, min(2, classes))]
    cap = min(classes, 1 << min(width, 62))
    out: list[Any] = []
    while len(out) < cap:
        v = _random_value(rng, width, binary)
        if v not in out:
            out.append(v)
    return out


class SweepGrid(BaseModel):
    """
    Kartesisk produkt over basisscenarioet. None betyr "bruk basisverdien";
    en eksplisitt tom liste gir et tomt grid. t utledes per n når t er None.
    """
    model_config = ConfigDict(extra="forbid")

    schema_version: int = SCHEMA_VERSION
    base: Scenario
    n: Optional[list[int]] = None
    t: Optional[list[int]] = None
    ell: Optional[list[int]] = None
    eps: Optional[list[str]] = None
    seeds: Optional[list[int]] = None
    strategies: Optional[list[str]] = None
    fairness: Optional[list[int]] = None

    @field_validator("eps", mode="before")
    @classmethod
    def _exact_eps(cls, v: Any) -> Any:
        return None if v is None else [_fraction_text(x) for x in v]

    def points(self) -> Iterator[dict[str, Any]]:
        """Én dict per gridpunkt; oppdateringer til basisscenarioet pluss seed/fairness."""
        base = self.base
        ns = self.n if self.n is not None else [base.n]
        ells = self.ell if self.ell is not None else [base.ell]
        epss = self.eps if self.eps is not None else [base.eps]
        seeds = self.seeds if self.seeds is not None else base.seed_list()
        strategies = self.strategies if self.strategies is not None else [base.adversary.strategy]
        fairness = self.fairness if self.fairness is not None else [None]
        for n, ell, eps, strategy, factor, seed in itertools.product(ns, ells, epss, strategies, fairness, seeds):
            ts = self.t if self.t is not None else [
                base.t if n == base.n and eps == base.eps else default_t(base.protocol, n, eps, base.ca_backend)
            ]
            for t in ts:
                yield {"n": n, "t": t, "ell": ell, "eps": eps, "strategy": strategy,
                       "fairness": factor, "seed": seed}

    def scenario_for(self, point: dict[str, Any]) -> Scenario:
        """Validerer punktet på nytt (terskler og input) og returnerer scenarioet for ett frø."""
        data = self.base.model_dump(mode="json")
        data.update({k: point[k] for k in ("n", "t", "ell", "eps", "seed")})
        data["seeds"] = 1
        data["adversary"] = {**data["adversary"], "strategy": point["strategy"]}
        tag = f"n{point['n']}t{point['t']}l{point['ell']}e{point['eps'].replace('/', '_')}-{point['strategy']}"
        if point.get("fairness") is not None:
            data["fairness_k"] = int(point["fairness"]) * point["n"] * point["n"]
            tag += f"-f{point['fairness']}"
        data["name"] = f"{self.base.name}-{tag}"
        return Scenario.model_validate(data)


# ---------------------- Innlesing ----------------------

def _format_validation(err: ValidationError, source: str) -> str:
    parts = []
    for e in err.errors():
        where = ".".join(str(x) for x in e["loc"]) or "<rot>"
        parts.append(f"{where}: {e['msg']}")
    return f"{source}: " + "; ".join(parts)


def _load_json(text: str, source: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{source}:{e.lineno}:{e.colno}: {e.msg}") from e


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    data = _load_json(text, source)
    try:
        return Scenario.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_format_validation(e, source)) from e


def parse_grid(text: str, source: str = "<grid>") -> SweepGrid:
    data = _load_json(text, source)
    try:
        return SweepGrid.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_format_validation(e, source)) from e


def load_scenario(path: Path | str) -> Scenario:
    p = Path(path)
    return parse_scenario(p.read_text(encoding="utf-8"), str(p))


def load_grid(path: Path | str) -> SweepGrid:
    p = Path(path)
    return parse_grid(p.read_text(encoding="utf-8"), str(p))


def dump_scenario(scenario: Scenario) -> str:
    return scenario.model_dump_json(indent=2)
