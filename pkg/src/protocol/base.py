# src/protocol/base.py
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Iterator, Optional, Union

import numpy as np

from core.errors import ContractViolation
from core.params import ProtocolParams

log = logging.getLogger(__name__)

Path = tuple[str, ...]


class MsgKind(str, Enum):
    KEY = "KEY"
    HASH = "HASH"
    SYM = "SYM"
    SUC = "SUC"
    MINE = "MINE"
    YOURS = "YOURS"
    BOT = "BOT"
    # binær BA
    EST = "EST"
    AUX = "AUX"
    CONF = "CONF"
    DECIDE = "DECIDE"


@dataclass(frozen=True)
class Message:
    """
    Typet nyttelast.
    kind: meldingstype
    body: innhold (nøkkel/hash som int, symbol som tuple, bit, None for ⊥)
    bits: nyttelastens størrelse i bit (tagger og instanssti telles ikke)
    """
    kind: MsgKind
    body: Any = None
    bits: int = 0


# ---------------------- Hendelser inn ----------------------

@dataclass(frozen=True)
class Acquire:
    value: Any


@dataclass(frozen=True)
class Deliver:
    src: int
    message: Message
    path: Path = ()


Event = Union[Acquire, Deliver]


# ---------------------- Handlinger ut ----------------------
# path er relativ til maskinen som returnerer handlingen; foreldre
# prefikser barnets etikett når handlingen bobler opp.

@dataclass(frozen=True)
class Send:
    dst: int
    message: Message
    path: Path = ()


@dataclass(frozen=True)
class Multicast:
    message: Message
    path: Path = ()


@dataclass(frozen=True)
class Output:
    value: Any
    path: Path = ()
    meta: Optional[dict[str, Any]] = None


@dataclass(frozen=True)
class Terminate:
    path: Path = ()


@dataclass(frozen=True)
class SubInput:
    """Registrerer at en forelder ga input til en underinstans."""
    value: Any
    path: Path = ()


@dataclass(frozen=True)
class ServiceCall:
    """Kall til en simulator-tjeneste (orakel-BA)."""
    service: str
    body: Any
    path: Path = ()


Action = Union[Send, Multicast, Output, Terminate, SubInput, ServiceCall]


def lift(action: Action, label: str) -> Action:
    return replace(action, path=(label,) + action.path)


@dataclass
class PartyContext:
    """
    Alt en partsmaskin får fra omgivelsene.
    rng: partens egen deterministiske strøm (forket fra masterfrøet)
    coin: ideell felles mynt, (sti, runde) -> bit; kun satt når simulatoren tilbyr den
    """
    index: int
    params: ProtocolParams
    rng: np.random.Generator
    coin: Optional[Callable[[Path, int], int]] = None
    settings: dict[str, Any] = field(default_factory=dict)

    def random_bits(self, bits: int) -> int:
        raw = int.from_bytes(self.rng.bytes((bits + 7) // 8), "big")
        return raw & ((1 << bits) - 1)


class Machine(ABC):
    """
    Abstrakt base for protokollmaskiner (én per part per instans).

    Kontrakt:
      - step(event) tar en hendelse (Acquire eller Deliver) og returnerer en liste handlinger.
      - Underinstanser ligger i self.children og adresseres med etikett i instansstien.
      - Maskiner med waits_for_input=True buffrer meldinger til input er mottatt.
      - Etter Terminate behandles ingenting mer.
    """

    label: str = "machine"
    waits_for_input: bool = True
    # meldinger en spammer kan sende på denne instansen (⊥-varianter)
    bottom_messages: tuple[Message, ...] = ()

    def __init__(self, ctx: PartyContext):
        self.ctx = ctx
        self.children: dict[str, Machine] = {}
        self.acquired = False
        self.input: Any = None
        self.outputs: list[Any] = []
        self.terminated = False
        self._backlog: list[tuple[int, Message]] = []

    # --- bekvemmelighet ---
    @property
    def n(self) -> int:
        return self.ctx.params.n

    @property
    def t(self) -> int:
        return self.ctx.params.t

    @property
    def index(self) -> int:
        return self.ctx.index

    @property
    def params(self) -> ProtocolParams:
        return self.ctx.params

    @property
    def ready(self) -> bool:
        return self.acquired

    @property
    def name(self) -> str:
        return type(self).__name__

    # --- inngang ---
    def step(self, event: Event) -> list[Action]:
        if isinstance(event, Acquire):
            return self.acquire(event.value)
        return self.deliver(event.src, event.path, event.message)

    def acquire(self, value: Any) -> list[Action]:
        if self.acquired:
            raise ContractViolation(f"{self.name} hos P{self.index} fikk input to ganger")
        if self.terminated:
            return []
        self.acquired = True
        self.input = value
        actions = self.on_input(value)
        actions += self._drain_backlog()
        return actions

    def deliver(self, src: int, path: Path, message: Message) -> list[Action]:
        if self.terminated:
            return []
        if path:
            child = self.children.get(path[0])
            if child is None:
                log.debug("Ukjent instanssti ignorert | party=%d path=%s", self.index, path)
                return []
            return self._from_child(path[0], child.deliver(src, path[1:], message))
        if self.waits_for_input and not self.ready:
            self._backlog.append((src, message))
            return []
        return self.on_message(src, message)

    def _drain_backlog(self) -> list[Action]:
        actions: list[Action] = []
        while self._backlog and self.ready and not self.terminated:
            src, message = self._backlog.pop(0)
            actions += self.on_message(src, message)
        return actions

    # --- underinstanser ---
    def feed(self, label: str, value: Any) -> list[Action]:
        """Gi input til underinstansen `label`."""
        child = self.children[label]
        actions: list[Action] = [SubInput(value, (label,))]
        return actions + self._from_child(label, child.acquire(value))

    def _from_child(self, label: str, actions: list[Action]) -> list[Action]:
        out: list[Action] = []
        for action in actions:
            out.append(lift(action, label))
            if action.path:
                continue
            if isinstance(action, Output):
                out += self.on_child_output(label, action.value)
            elif isinstance(action, Terminate):
                out += self.on_child_terminate(label)
        return out

    def on_child_output(self, label: str, value: Any) -> list[Action]:
        return []

    def on_child_terminate(self, label: str) -> list[Action]:
        return []

    # --- utgang ---
    def emit_output(self, value: Any, **meta: Any) -> list[Action]:
        self.outputs.append(value)
        return [Output(value, (), meta or None)]

    def terminate(self) -> list[Action]:
        self.terminated = True
        return [Terminate(())]

    # --- protokollogikk ---
    @abstractmethod
    def on_input(self, value: Any) -> list[Action]:
        ...

    @abstractmethod
    def on_message(self, src: int, message: Message) -> list[Action]:
        ...

    # --- innsyn (full-informasjonsmotstander, revisjon) ---
    def matching_message(self, src: int) -> Optional[Message]:
        """Meldingen denne maskinen ville godta som 'matchende' fra src, hvis den finnes."""
        return None

    def walk(self, prefix: Path = ()) -> Iterator[tuple[Path, "Machine"]]:
        yield prefix, self
        for label, child in self.children.items():
            yield from child.walk(prefix + (label,))

    def find(self, path: Path) -> Optional["Machine"]:
        node: Optional[Machine] = self
        for label in path:
            if node is None:
                return None
            node = node.children.get(label)
        return node

    def snapshot(self) -> dict[str, Any]:
        """Lesbar tilstand uten RNG og barn."""
        return {
            k: v for k, v in vars(self).items()
            if not k.startswith("_") and k not in ("ctx", "children")
        }
