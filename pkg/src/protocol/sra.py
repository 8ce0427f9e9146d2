# src/protocol/sra.py
from __future__ import annotations

import logging
from typing import Any, Optional

from coding.auh import digest, joint_key
from protocol.base import Action, Machine, Message, MsgKind, Multicast, PartyContext, Send

log = logging.getLogger(__name__)


class HashExchange:
    """
    Nøkkel- og hashutveksling delt av SRA og CA1.

    Egen nøkkel trekkes når input er mottatt. Første KEY fra P_j gir felles
    nøkkel og svar med HASH; første HASH fra P_j buffres til felles nøkkel finnes.
    """

    def __init__(self, machine: Machine):
        self.machine = machine
        self.hp = machine.params.hash_params
        self.kappa = self.hp.kappa
        self.key: Optional[int] = None
        self.joint: dict[int, int] = {}
        self.pending: dict[int, int] = {}
        self.seen_hash: set[int] = set()

    def start(self) -> list[Action]:
        self.key = self.machine.ctx.random_bits(self.kappa)
        return [Multicast(Message(MsgKind.KEY, self.key, self.kappa))]

    def own_digest(self, peer: int) -> int:
        return digest(self.joint[peer], self.machine.input, self.hp)

    def on_key(self, src: int, body: Any) -> tuple[list[Action], Optional[int]]:
        """Returnerer (handlinger, buffret hash fra src som nå kan sjekkes)."""
        if src == self.machine.index or src in self.joint:
            return [], None
        if not isinstance(body, int) or not 0 <= body < (1 << self.kappa):
            return [], None
        self.joint[src] = joint_key(self.key, body, self.kappa)
        reply = Send(src, Message(MsgKind.HASH, self.own_digest(src), self.hp.digest_bits))
        return [reply], self.pending.pop(src, None)

    def on_hash(self, src: int, body: Any) -> Optional[int]:
        """Første gyldige HASH fra src; None hvis den skal ignoreres eller buffres."""
        if src == self.machine.index or src in self.seen_hash:
            return None
        if not isinstance(body, int) or not 0 <= body < (1 << self.hp.digest_bits):
            return None
        self.seen_hash.add(src)
        if src not in self.joint:
            self.pending[src] = body
            return None
        return body

    def matches(self, src: int, value: int) -> bool:
        return value == self.own_digest(src)

    def expected(self, src: int) -> Optional[Message]:
        if src not in self.joint or self.machine.input is None:
            return None
        return Message(MsgKind.HASH, self.own_digest(src), self.hp.digest_bits)


class Sra(Machine):
    """Statistisk pålitelig enighet: gi ut v_i når n-t parter har matchende hash."""

    label = "sra"

    def __init__(self, ctx: PartyContext):
        super().__init__(ctx)
        self.hx = HashExchange(self)
        self.agreeing: set[int] = {self.index}

    def on_input(self, value: Any) -> list[Action]:
        return self.hx.start() + self._check_done()

    def on_message(self, src: int, message: Message) -> list[Action]:
        if message.kind is MsgKind.KEY:
            actions, buffered = self.hx.on_key(src, message.body)
            if buffered is not None:
                actions += self._classify(src, buffered)
            return actions
        if message.kind is MsgKind.HASH:
            value = self.hx.on_hash(src, message.body)
            return [] if value is None else self._classify(src, value)
        return []

    def _classify(self, src: int, value: int) -> list[Action]:
        if self.hx.matches(src, value):
            self.agreeing.add(src)
        return self._check_done()

    def _check_done(self) -> list[Action]:
        if not self.outputs and len(self.agreeing) >= self.n - self.t:
            return self.emit_output(self.input)
        return []

    def matching_message(self, src: int) -> Optional[Message]:
        return self.hx.expected(src)
