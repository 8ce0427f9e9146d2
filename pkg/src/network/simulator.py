# src/network/simulator.py
from __future__ import annotations

import logging
import zlib
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Callable, Iterable, Optional, Union

import numpy as np

from core.errors import ContractViolation, CorruptionBudgetExceeded
from core.params import ProtocolParams
from network.trace import Trace
from protocol.base import (
    Action, Machine, Message, MsgKind, Multicast, Output, PartyContext, Path, Send,
    ServiceCall, SubInput, Terminate,
)
from protocol.binary_ba import ORACLE, ORACLE_SERVICE

if TYPE_CHECKING:
    from network.adversary import Behavior, Strategy

log = logging.getLogger(__name__)

MachineFactory = Callable[[PartyContext], Machine]


# ---------------------- Konvolutter og input ----------------------

@dataclass
class Envelope:
    """
    Én punkt-til-punkt-melding i nettet.
    path: full instanssti (rotetikett først)
    honest: sendt av en ærlig part og ikke overtatt av motstanderen
    depth: Lamport-klokke; avsenderens klokke + 1 ved sending
    born: simulatorsteget konvolutten ble leverbar
    group: id for multicasten konvolutten hører til
    """
    seq: int
    src: int
    dst: int
    path: Path
    message: Message
    honest: bool
    depth: int
    born: int
    group: Optional[int] = None


@dataclass(frozen=True)
class ScheduledInput:
    party: int
    value: Any
    at: int = 0


# ---------------------- Beslutninger fra motstanderen ----------------------

@dataclass(frozen=True)
class Pick:
    seq: int


@dataclass(frozen=True)
class Release:
    party: int


@dataclass(frozen=True)
class Corrupt:
    party: int
    behavior: "Behavior"


@dataclass(frozen=True)
class Drop:
    """Forkast en bysantinsk konvolutt. Ærlige konvolutter kan bare forkastes via korrupsjon."""
    seq: int


Decision = Union[Pick, Release, Corrupt, Drop]


# ---------------------- Orakel-BA ----------------------

@dataclass
class OracleBaService:
    """
    Betrodd binær BA. Samler input fra ærlige parter per instanssti og avgjør
    når alle nå-ærlige parter har gitt input, eller når quorum er nådd.
    Enstemmig input gir den verdien, ellers tie_break. DECIDE sendes som ærlige
    konvolutter fra ORACLE, så motstanderen styrer leveringen.
    """
    tie_break: int = 0
    quorum: Optional[int] = None
    inputs: dict[Path, dict[int, int]] = field(default_factory=dict)
    decided: dict[Path, int] = field(default_factory=dict)

    def call(self, sim: "Simulator", party: int, path: Path, body: Any) -> None:
        if path in self.decided or not sim.is_honest(party):
            return
        self.inputs.setdefault(path, {}).setdefault(party, body)

    def poll(self, sim: "Simulator") -> None:
        for path, got in self.inputs.items():
            if path in self.decided:
                continue
            honest = [p for p in sim.parties if sim.is_honest(p)]
            present = {p: got[p] for p in honest if p in got}
            if len(present) < len(honest) and (self.quorum is None or len(present) < self.quorum):
                continue
            values = set(present.values())
            bit = values.pop() if len(values) == 1 else self.tie_break
            self.decided[path] = bit
            depth = max((sim.clock[p] for p in present), default=0) + 1
            log.debug("Orakel-BA avgjort | path=%s bit=%d inputs=%d", "/".join(path), bit, len(present))
            group = sim.next_group()
            for dst in sim.parties:
                sim.enqueue(ORACLE, dst, path, Message(MsgKind.DECIDE, bit, 1), True, depth, group)


# ---------------------- Motstanderens innsyn ----------------------

class AdversaryView:
    """
    Lesetilgang for strategier og atferder: ventende konvolutter, input som kan
    slippes, korrupsjonsbudsjett, historikk og partenes tilstand. Partenes
    RNG-strømmer er ikke tilgjengelige.
    """

    def __init__(self, sim: "Simulator"):
        self._sim = sim

    @property
    def n(self) -> int:
        return self._sim.params.n

    @property
    def t(self) -> int:
        return self._sim.params.t

    @property
    def step(self) -> int:
        return self._sim.step

    @property
    def pending(self) -> tuple[Envelope, ...]:
        return tuple(self._sim.pending.values())

    @property
    def eligible_inputs(self) -> tuple[ScheduledInput, ...]:
        return tuple(self._sim.eligible_inputs())

    @property
    def budget(self) -> int:
        return self.t - len(self._sim.corrupted)

    @property
    def corrupted(self) -> frozenset[int]:
        return frozenset(self._sim.corrupted)

    @property
    def history(self) -> tuple[dict[str, Any], ...]:
        return tuple(self._sim.trace.events)

    def honest_parties(self) -> list[int]:
        return [p for p in self._sim.parties if self._sim.is_honest(p)]

    def state(self, party: int, path: Path = ()) -> Optional[dict[str, Any]]:
        machine = self._sim.locate(party, path)
        return None if machine is None else machine.snapshot()

    def expected(self, dst: int, path: Path, src: int) -> Optional[Message]:
        """Meldingen dst ville godta som matchende fra src på instansen path."""
        machine = self._sim.locate(dst, path)
        return None if machine is None else machine.matching_message(src)

    def instances(self) -> list[tuple[Path, tuple[Message, ...]]]:
        """Alle instansstier i treet med ⊥-meldingene som kan sendes der."""
        root = self._sim.machines[1]
        return [((root.label,) + rel, m.bottom_messages) for rel, m in root.walk()]


# ---------------------- Simulatoren ----------------------

class Simulator:
    """
    Deterministisk, hendelsesdrevet asynkront nett med en adaptiv motstander.

    Hvert steg leverer én konvolutt, slipper én input, utfører én korrupsjon
    eller forkaster én bysantinsk konvolutt. En rettferdighetsvakt tvinger
    frem eldste ærlige konvolutt (eller input) når den har ventet K steg.
    Kjøringen stopper ved stillstand (ingenting venter) eller ved event_cap.
    """

    def __init__(
        self,
        params: ProtocolParams,
        factory: MachineFactory,
        inputs: Iterable[ScheduledInput],
        strategy: "Strategy",
        seed: int,
        fairness_k: Optional[int] = None,
        event_cap: Optional[int] = None,
        settings: Optional[dict[str, Any]] = None,
        header: Optional[dict[str, Any]] = None,
    ):
        self.params = params
        self.seed = int(seed)
        self.strategy = strategy
        self.settings = dict(settings or {})
        n = params.n
        self.parties = range(1, n + 1)
        self.fairness_k = int(fairness_k) if fairness_k else int(self.settings.get("fairness_factor", 16)) * n * n
        self.event_cap = int(event_cap) if event_cap else None

        schedule: dict[int, ScheduledInput] = {}
        for item in inputs:
            if not 1 <= item.party <= n:
                raise ContractViolation(f"Input til ukjent part P{item.party}")
            if item.party in schedule:
                raise ContractViolation(f"P{item.party} har mer enn én input i planen")
            schedule[item.party] = item
        self.schedule = schedule
        self.released: set[int] = set()

        # én deterministisk strøm per part, én for motstanderen, én for mynten
        streams = np.random.SeedSequence(self.seed).spawn(n + 2)
        self.adversary_rng = np.random.default_rng(streams[n])
        self._coin_entropy = int(streams[n + 1].generate_state(1)[0])

        self.trace = Trace()
        self.pending: dict[int, Envelope] = {}
        self.corrupted: dict[int, "Behavior"] = {}
        self.clock: dict[int, int] = {p: 0 for p in self.parties}
        self.step = 0
        self._seq = 0
        self._group = 0
        self.services = {
            ORACLE_SERVICE: OracleBaService(
                tie_break=int(self.settings.get("oracle_tie_break", 0)),
                quorum=self.settings.get("oracle_quorum"),
            ),
        }

        self.machines: dict[int, Machine] = {}
        for p in self.parties:
            ctx = PartyContext(
                index=p,
                params=params,
                rng=np.random.default_rng(streams[p - 1]),
                coin=self._coin_for(p),
                settings=self.settings,
            )
            self.machines[p] = factory(ctx)
        self.root_label = self.machines[1].label
        self.view = AdversaryView(self)

        self.trace.record({
            "type": "header", "step": 0, "n": n, "t": params.t, "ell": params.ell,
            "lam": params.lam, "eps": str(params.eps), "seed": self.seed,
            "root": [self.root_label], "fairness_k": self.fairness_k,
            "strategy": getattr(strategy, "name", type(strategy).__name__),
            **(header or {}),
        })

    # ---------------- hjelpere ----------------
    def is_honest(self, party: int) -> bool:
        return party == ORACLE or party not in self.corrupted

    def next_group(self) -> int:
        self._group += 1
        return self._group

    def locate(self, party: int, path: Path) -> Optional[Machine]:
        if not path or path[0] != self.root_label:
            return None
        return self.machines[party].find(path[1:])

    def eligible_inputs(self) -> list[ScheduledInput]:
        return [
            item for p, item in sorted(self.schedule.items())
            if p not in self.released and item.at <= self.step
        ]

    def _coin_for(self, party: int) -> Callable[[Path, int], int]:
        def coin(path: Path, r: int) -> int:
            key = (tuple(path), r)
            if key not in self.trace.coins:
                crc = zlib.crc32("/".join(path).encode("utf-8"))
                rng = np.random.default_rng([self._coin_entropy, r, crc])
                bit = int(rng.integers(2))
                self.trace.record({
                    "type": "coin", "step": self.step, "party": party,
                    "path": list(path), "round": r, "bit": bit,
                })
            return self.trace.coins[key]
        return coin

    # ---------------- sending ----------------
    def enqueue(self, src: int, dst: int, path: Path, message: Message, honest: bool,
                depth: int, group: Optional[int] = None) -> Envelope:
        self._seq += 1
        env = Envelope(self._seq, src, dst, tuple(path), message, honest, depth, self.step, group)
        self.pending[env.seq] = env
        self.trace.record({
            "type": "send", "step": self.step, "seq": env.seq, "src": src, "dst": dst,
            "path": list(env.path), "kind": message.kind.value, "body": message.body,
            "bits": message.bits, "honest": honest, "depth": depth, "group": group,
        })
        return env

    def inject(self, src: int, dst: int, path: Path, message: Message) -> Optional[Envelope]:
        """Bysantinsk sending fra en korrumpert part."""
        if src not in self.corrupted:
            raise ContractViolation(f"P{src} er ikke korrumpert og kan ikke brukes til injeksjon")
        if not 1 <= dst <= self.params.n:
            return None
        return self.enqueue(src, dst, path, message, False, self.clock[src] + 1)

    def _apply(self, party: int, actions: list[Action]) -> None:
        for action in actions:
            full = (self.root_label,) + action.path
            if isinstance(action, Send):
                self.enqueue(party, action.dst, full, action.message, True, self.clock[party] + 1)
            elif isinstance(action, Multicast):
                group = self.next_group()
                for dst in self.parties:
                    self.enqueue(party, dst, full, action.message, True, self.clock[party] + 1, group)
            elif isinstance(action, Output):
                self.trace.record({
                    "type": "output", "step": self.step, "party": party, "path": list(full),
                    "value": action.value, "meta": action.meta,
                })
            elif isinstance(action, Terminate):
                self.trace.record({"type": "terminate", "step": self.step, "party": party, "path": list(full)})
            elif isinstance(action, SubInput):
                self.trace.record({
                    "type": "input", "step": self.step, "party": party, "path": list(full),
                    "value": action.value,
                })
            elif isinstance(action, ServiceCall):
                service = self.services.get(action.service)
                if service is None:
                    raise ContractViolation(f"Ukjent simulatortjeneste '{action.service}'")
                service.call(self, party, full, action.body)

    def byzantine_step(self, party: int, event: str, *args: Any) -> list[Action]:
        """
        Kjør den opprinnelige maskinen til en korrumpert part og returner rå
        handlinger (ingenting registreres). event er "acquire" eller "deliver".
        """
        machine = self.machines[party]
        try:
            if event == "acquire":
                return machine.acquire(args[0])
            env: Envelope = args[0]
            return machine.deliver(env.src, env.path[1:], env.message)
        except ContractViolation:
            log.debug("Bysantinsk maskin avviste hendelse | party=%d event=%s", party, event)
            return []

    # ---------------- korrupsjon ----------------
    def corrupt(self, party: int, behavior: "Behavior") -> None:
        if party in self.corrupted:
            return
        if not 1 <= party <= self.params.n:
            raise ContractViolation(f"Kan ikke korrumpere ukjent part P{party}")
        if len(self.corrupted) >= self.params.t:
            raise CorruptionBudgetExceeded(f"Budsjett t={self.params.t} brukt opp, P{party} avvist")
        self.corrupted[party] = behavior
        self.trace.record({"type": "corrupt", "step": self.step, "party": party,
                           "behavior": getattr(behavior, "name", type(behavior).__name__)})
        log.debug("Korrupsjon | party=%d behavior=%s", party, type(behavior).__name__)
        for env in [e for e in self.pending.values() if e.src == party and e.honest]:
            replacement = behavior.on_corrupt(self, env)
            if replacement is env.message:
                env.honest = False
                continue
            self._drop(env, reason="front-run")
            if replacement is not None:
                self.enqueue(party, env.dst, env.path, replacement, False, env.depth, env.group)

    def _drop(self, env: Envelope, reason: str) -> None:
        del self.pending[env.seq]
        self.trace.record({"type": "drop", "step": self.step, "seq": env.seq, "reason": reason})

    # ---------------- levering ----------------
    def _deliver(self, env: Envelope, forced: bool) -> None:
        del self.pending[env.seq]
        self.trace.record({
            "type": "deliver", "step": self.step, "seq": env.seq, "src": env.src, "dst": env.dst,
            "honest": env.honest and self.is_honest(env.dst), "depth": env.depth, "forced": forced,
        })
        self.clock[env.dst] = max(self.clock[env.dst], env.depth)
        if env.dst in self.corrupted:
            self.corrupted[env.dst].on_deliver(self, env.dst, env)
            return
        if not env.path or env.path[0] != self.root_label:
            log.debug("Ukjent rotinstans ignorert | dst=%d path=%s", env.dst, env.path)
            return
        actions = self.machines[env.dst].deliver(env.src, env.path[1:], env.message)
        self._apply(env.dst, actions)

    def _release(self, item: ScheduledInput, forced: bool) -> None:
        self.released.add(item.party)
        path = [self.root_label]
        self.trace.record({
            "type": "acquire", "step": self.step, "party": item.party, "path": path,
            "value": item.value, "forced": forced,
        })
        if item.party in self.corrupted:
            self.corrupted[item.party].on_acquire(self, item.party, item.value)
            return
        self._apply(item.party, self.machines[item.party].acquire(item.value))

    # ---------------- rettferdighet ----------------
    def _overdue(self) -> Optional[Decision]:
        k = self.fairness_k
        # pending er ordnet på seq, og born vokser med seq
        oldest = next((env for env in self.pending.values() if env.honest), None)
        if oldest is not None and self.step - oldest.born < k:
            oldest = None
        late = [i for i in self.eligible_inputs() if self.step - i.at >= k]
        if late and (oldest is None or late[0].at <= oldest.born):
            return Release(late[0].party)
        return Pick(oldest.seq) if oldest is not None else None

    def _execute(self, decision: Decision, forced: bool) -> None:
        if isinstance(decision, Pick):
            env = self.pending.get(decision.seq)
            if env is None:
                raise ContractViolation(f"Ingen ventende konvolutt med seq={decision.seq}")
            self._deliver(env, forced)
        elif isinstance(decision, Release):
            item = self.schedule.get(decision.party)
            if item is None or decision.party in self.released or item.at > self.step:
                raise ContractViolation(f"Ingen input for P{decision.party} kan slippes nå")
            self._release(item, forced)
        elif isinstance(decision, Corrupt):
            try:
                self.corrupt(decision.party, decision.behavior)
            except CorruptionBudgetExceeded as e:
                log.warning("Korrupsjon avvist | party=%d reason=%s", decision.party, e)
                self.trace.record({"type": "corrupt_rejected", "step": self.step, "party": decision.party})
        elif isinstance(decision, Drop):
            env = self.pending.get(decision.seq)
            if env is None:
                raise ContractViolation(f"Ingen ventende konvolutt med seq={decision.seq}")
            if env.honest:
                raise ContractViolation(f"Ærlig konvolutt seq={env.seq} kan bare forkastes via korrupsjon")
            self._drop(env, reason="adversary")
        else:
            raise ContractViolation(f"Ukjent beslutning {decision!r}")

    # ---------------- hovedløkke ----------------
    def run(self) -> Trace:
        log.info("Simulering starter | n=%d t=%d seed=%d K=%d strategy=%s", self.params.n, self.params.t,
                 self.seed, self.fairness_k, getattr(self.strategy, "name", "?"))
        self.strategy.setup(self.view, self.adversary_rng)
        while True:
            for service in self.services.values():
                service.poll(self)
            future = [i for p, i in self.schedule.items() if p not in self.released and i.at > self.step]
            if not self.pending and not self.eligible_inputs():
                if not future:
                    break
                # ingenting å gjøre før neste planlagte input
                self.step = min(i.at for i in future)
                continue
            if self.event_cap is not None and self.step >= self.event_cap:
                log.warning("Hendelsestak nådd | step=%d pending=%d", self.step, len(self.pending))
                self.trace.record({"type": "cap", "step": self.step, "pending": len(self.pending)})
                break
            forced = self._overdue()
            if forced is not None:
                self._execute(forced, True)
            else:
                self._execute(self.strategy.choose_next(self.view), False)
            for party, behavior in list(self.corrupted.items()):
                behavior.on_tick(self, party)
            self.step += 1
        self.trace.record({"type": "summary", "step": self.step, **self.trace.summary()})
        log.info("Simulering ferdig | steps=%d msgs=%d bits=%d depth=%d capped=%s", self.step,
                 self.trace.totals().messages, self.trace.totals().bits, self.trace.causal_depth,
                 self.trace.capped)
        return self.trace
