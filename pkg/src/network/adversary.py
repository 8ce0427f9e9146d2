# src/network/adversary.py
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from typing import TYPE_CHECKING, Any, Iterable, Optional

import numpy as np

from coding.bits import Bits
from protocol.base import Action, Message, MsgKind, Multicast, Path, Send
from network.simulator import AdversaryView, Corrupt, Decision, Envelope, Pick, Release

if TYPE_CHECKING:
    from network.simulator import Simulator

log = logging.getLogger(__name__)


# ---------------------- Bysantinsk atferd ----------------------

class Behavior:
    """
    Hva en korrumpert part gjør. Standard er å beholde ventende konvolutter
    (de blir bysantinske) og ellers være stille.

      - on_corrupt(sim, env): returner env.message for å beholde, en annen melding
        for å erstatte, eller None for å forkaste konvolutten
      - on_deliver / on_acquire / on_tick: kan sende via sim.inject
    """

    @property
    def name(self) -> str:
        return type(self).__name__

    def on_corrupt(self, sim: "Simulator", env: Envelope) -> Optional[Message]:
        return env.message

    def on_deliver(self, sim: "Simulator", party: int, env: Envelope) -> None:
        return None

    def on_acquire(self, sim: "Simulator", party: int, value: Any) -> None:
        return None

    def on_tick(self, sim: "Simulator", party: int) -> None:
        return None


class SilentBehavior(Behavior):
    """Forkaster alt som venter og sender ingenting."""

    def on_corrupt(self, sim: "Simulator", env: Envelope) -> Optional[Message]:
        return None


def _outgoing(sim: "Simulator", actions: list[Action]) -> Iterable[tuple[int, Path, Message]]:
    root = (sim.root_label,)
    for action in actions:
        if isinstance(action, Send):
            yield action.dst, root + action.path, action.message
        elif isinstance(action, Multicast):
            for dst in sim.parties:
                yield dst, root + action.path, action.message


class ScriptedBehavior(Behavior):
    """Kjører partens egen maskin og lar transform() bestemme hver utgående melding."""

    def on_acquire(self, sim: "Simulator", party: int, value: Any) -> None:
        self._emit(sim, party, sim.byzantine_step(party, "acquire", value))

    def on_deliver(self, sim: "Simulator", party: int, env: Envelope) -> None:
        self._emit(sim, party, sim.byzantine_step(party, "deliver", env))

    def _emit(self, sim: "Simulator", party: int, actions: list[Action]) -> None:
        for dst, path, message in _outgoing(sim, actions):
            out = self.transform(sim, party, dst, path, message)
            if out is not None:
                sim.inject(party, dst, path, out)

    def transform(self, sim: "Simulator", party: int, dst: int, path: Path, message: Message) -> Optional[Message]:
        return message


def garble(message: Message) -> Message:
    """En gyldig formet, men feil variant av meldingen."""
    body = message.body
    kind = message.kind
    if kind in (MsgKind.EST, MsgKind.AUX) and isinstance(body, tuple):
        return Message(kind, (body[0], 1 - body[1]), message.bits)
    if kind in (MsgKind.SUC, MsgKind.DECIDE) and body in (0, 1):
        return Message(kind, 1 - body, message.bits)
    if isinstance(body, Bits):
        return Message(kind, Bits(body.value ^ 1, body.length), message.bits)
    if isinstance(body, int) and not isinstance(body, bool):
        return Message(kind, body ^ 1, message.bits)
    if isinstance(body, tuple) and body and isinstance(body[0], tuple):
        return Message(kind, (_flip_symbol(body[0]),) + body[1:], message.bits)
    if isinstance(body, tuple) and body and isinstance(body[0], int):
        return Message(kind, _flip_symbol(body), message.bits)
    return message


def _flip_symbol(symbol: tuple[int, ...]) -> tuple[int, ...]:
    return (symbol[0] ^ 1,) + symbol[1:]


class EquivocateBehavior(ScriptedBehavior):
    """Følger protokollen, men sender for hver mottaker en feil variant med sannsynlighet prob."""

    def __init__(self, rng: np.random.Generator, prob: float = 0.5):
        self.rng = rng
        self.prob = float(prob)

    def transform(self, sim: "Simulator", party: int, dst: int, path: Path, message: Message) -> Optional[Message]:
        return garble(message) if self.rng.random() < self.prob else message


class BotSpamBehavior(Behavior):
    """Sender alle ⊥-varianter på alle instanser til alle parter, én gang."""

    def __init__(self) -> None:
        self.spammed = False

    def on_corrupt(self, sim: "Simulator", env: Envelope) -> Optional[Message]:
        return None

    def on_tick(self, sim: "Simulator", party: int) -> None:
        if self.spammed:
            return
        self.spammed = True
        for path, messages in sim.view.instances():
            for message in messages:
                for dst in sim.parties:
                    sim.inject(party, dst, path, message)


class FrontRunBehavior(Behavior):
    """Forkaster en tilfeldig delmengde av partens ventende konvolutter, og er deretter stille."""

    def __init__(self, rng: np.random.Generator, keep_prob: float = 0.5):
        self.rng = rng
        self.keep_prob = float(keep_prob)

    def on_corrupt(self, sim: "Simulator", env: Envelope) -> Optional[Message]:
        return env.message if self.rng.random() < self.keep_prob else None


class CollisionSeekBehavior(ScriptedBehavior):
    """
    Følger protokollen, men erstatter hver melding med det mottakeren ville
    godta som matchende (full informasjon). Finnes ingen slik melding ennå,
    holdes meldingen tilbake og prøves igjen på senere tikk.
    """

    HOLD_KINDS = frozenset({MsgKind.SYM, MsgKind.HASH})

    def __init__(self, patience: int = 64):
        self.patience = int(patience)
        self.held: list[tuple[int, Path, Message, int]] = []

    def transform(self, sim: "Simulator", party: int, dst: int, path: Path, message: Message) -> Optional[Message]:
        wanted = sim.view.expected(dst, path, party)
        if wanted is not None and wanted.kind is message.kind:
            return wanted
        if wanted is None and message.kind in self.HOLD_KINDS:
            self.held.append((dst, path, message, 0))
            return None
        return message

    def on_tick(self, sim: "Simulator", party: int) -> None:
        if not self.held:
            return
        still: list[tuple[int, Path, Message, int]] = []
        for dst, path, message, tries in self.held:
            wanted = sim.view.expected(dst, path, party)
            if wanted is not None and wanted.kind is message.kind:
                sim.inject(party, dst, path, wanted)
            elif tries + 1 >= self.patience:
                sim.inject(party, dst, path, message)
            else:
                still.append((dst, path, message, tries + 1))
        self.held = still


BEHAVIOR_MAP: dict[str, type[Behavior]] = {
    "silent": SilentBehavior,
    "equivocate": EquivocateBehavior,
    "bot-spam": BotSpamBehavior,
    "front-run": FrontRunBehavior,
    "collision-seek": CollisionSeekBehavior,
    "passive": Behavior,
}


def resolve_behavior(name: str, rng: np.random.Generator, **params: Any) -> Behavior:
    key = (name or "").strip().lower()
    if key not in BEHAVIOR_MAP:
        raise ValueError(f"Ukjent atferd '{name}'. Gyldige: {', '.join(BEHAVIOR_MAP.keys())}")
    cls = BEHAVIOR_MAP[key]
    if cls in (EquivocateBehavior, FrontRunBehavior):
        return cls(rng, **params)
    return cls(**params)


# ---------------------- Planleggingsstrategier ----------------------

class Strategy(ABC):
    """
    Abstrakt base for motstanderstrategier.

    Kontrakt:
      - setup(view, rng) kalles én gang før første steg; rng er motstanderens egen strøm.
      - choose_next(view) returnerer en beslutning (Pick, Release, Corrupt eller Drop)
        som refererer til noe som faktisk venter.
      - Korrupsjoner i self.queue utføres før alt annet.
    """

    name: str = "strategy"

    def __init__(self, targets: Optional[list[int]] = None, **params: Any):
        self.targets = list(targets) if targets is not None else None
        self.params = params
        self.queue: list[Decision] = []
        self.rng: np.random.Generator = np.random.default_rng(0)

    def setup(self, view: AdversaryView, rng: np.random.Generator) -> None:
        self.rng = rng
        self.on_start(view)

    def on_start(self, view: AdversaryView) -> None:
        """Hook: legg korrupsjoner i køen her."""
        return None

    def default_targets(self, view: AdversaryView) -> list[int]:
        if self.targets is not None:
            return self.targets
        return list(range(view.n - view.t + 1, view.n + 1))

    def corrupt_at_start(self, view: AdversaryView, make: Any) -> None:
        for p in self.default_targets(view):
            self.queue.append(Corrupt(p, make()))

    def choose_next(self, view: AdversaryView) -> Decision:
        if self.queue:
            return self.queue.pop(0)
        return self.schedule(view)

    @abstractmethod
    def schedule(self, view: AdversaryView) -> Decision:
        ...


class FifoStrategy(Strategy):
    """All input først, deretter levering i sendingsrekkefølge."""

    name = "fifo"

    def schedule(self, view: AdversaryView) -> Decision:
        inputs = view.eligible_inputs
        if inputs:
            return Release(inputs[0].party)
        return Pick(view.pending[0].seq)


class RandomFairStrategy(Strategy):
    """Uniformt valg blant ventende konvolutter og input; rettferdighetsvakten gjør resten."""

    name = "random-fair"

    def schedule(self, view: AdversaryView) -> Decision:
        inputs = view.eligible_inputs
        pending = view.pending
        i = int(self.rng.integers(len(inputs) + len(pending)))
        if i < len(inputs):
            return Release(inputs[i].party)
        return Pick(pending[i - len(inputs)].seq)


class SplitBrainStrategy(Strategy):
    """Utsetter alt til ofrene så lenge noe annet kan leveres."""

    name = "split-brain"

    def on_start(self, view: AdversaryView) -> None:
        victims = self.params.get("victims")
        if victims is None:
            honest = view.honest_parties()[: view.n - view.t]
            victims = honest[: max(1, len(honest) // 2)]
        self.victims = frozenset(int(v) for v in victims)

    def schedule(self, view: AdversaryView) -> Decision:
        inputs = view.eligible_inputs
        if inputs:
            return Release(inputs[0].party)
        pending = view.pending
        for env in pending:
            if env.dst not in self.victims:
                return Pick(env.seq)
        return Pick(pending[0].seq)


class EquivocatorStrategy(RandomFairStrategy):
    name = "equivocator"

    def on_start(self, view: AdversaryView) -> None:
        prob = float(self.params.get("prob", 0.5))
        self.corrupt_at_start(view, lambda: EquivocateBehavior(self.rng, prob))


class BotSpammerStrategy(FifoStrategy):
    """Korrumperer ved start, flommer ⊥ og leverer bysantinske konvolutter først."""

    name = "bot-spammer"

    def on_start(self, view: AdversaryView) -> None:
        self.corrupt_at_start(view, BotSpamBehavior)

    def schedule(self, view: AdversaryView) -> Decision:
        for env in view.pending:
            if not env.honest:
                return Pick(env.seq)
        return super().schedule(view)


class FrontRunnerStrategy(RandomFairStrategy):
    """
    Tilfeldig rettferdig planlegging, men korrumperer en avsender som har minst
    to ventende konvolutter fra samme multicast, og forkaster en delmengde av dem.
    """

    name = "front-runner"

    def schedule(self, view: AdversaryView) -> Decision:
        if view.budget > 0 and self.rng.random() < float(self.params.get("rate", 0.25)):
            victim = self._victim(view)
            if victim is not None:
                keep = float(self.params.get("keep_prob", 0.5))
                return Corrupt(victim, FrontRunBehavior(self.rng, keep))
        return super().schedule(view)

    def _victim(self, view: AdversaryView) -> Optional[int]:
        corrupted = view.corrupted
        counts: dict[tuple[int, int], int] = {}
        for env in view.pending:
            if env.honest and env.group is not None and env.src not in corrupted and env.src != 0:
                key = (env.src, env.group)
                counts[key] = counts.get(key, 0) + 1
                if counts[key] >= 2:
                    return env.src
        return None


class CollisionSeekerStrategy(RandomFairStrategy):
    name = "collision-seeker"

    def on_start(self, view: AdversaryView) -> None:
        patience = int(self.params.get("patience", 64))
        self.corrupt_at_start(view, lambda: CollisionSeekBehavior(patience))


class SilentStrategy(FifoStrategy):
    """Korrumperer målene ved start; de sier aldri noe."""

    name = "silent"

    def on_start(self, view: AdversaryView) -> None:
        self.corrupt_at_start(view, SilentBehavior)


STRATEGY_MAP: dict[str, type[Strategy]] = {
    "fifo": FifoStrategy,
    "random-fair": RandomFairStrategy,
    "split-brain": SplitBrainStrategy,
    "equivocator": EquivocatorStrategy,
    "bot-spammer": BotSpammerStrategy,
    "front-runner": FrontRunnerStrategy,
    "collision-seeker": CollisionSeekerStrategy,
    "silent": SilentStrategy,
}


def strategy_catalog() -> dict[str, type[Strategy]]:
    return dict(STRATEGY_MAP)


def resolve_strategy(name: str, **params: Any) -> Strategy:
    """
    Valider og bygg en strategi fra navn, f.eks. 'split-brain'.
    Kaster ValueError hvis ugyldig.
    """
    key = (name or "").strip().lower()
    if key not in STRATEGY_MAP:
        raise ValueError(f"Ukjent strategi '{name}'. Gyldige: {', '.join(STRATEGY_MAP.keys())}")
    return STRATEGY_MAP[key](**params)
