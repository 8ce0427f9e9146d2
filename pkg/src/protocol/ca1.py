# src/protocol/ca1.py
from __future__ import annotations

import logging
from typing import Any, Optional

from protocol.base import Action, Machine, Message, MsgKind, Multicast, PartyContext
from protocol.rec import Rec
from protocol.sra import HashExchange, Sra

log = logging.getLogger(__name__)

BOT = Message(MsgKind.BOT, None, 1)


class Ca1(Machine):
    """
    Statistisk crusader-enighet for t < n/3.

    Matchende hash gir A, ikke-matchende gir B. Ved |B| = t+1 multicastes ⊥ og
    utdata blir ⊥; ved |C| = t+1 mottatte ⊥ blir utdata ⊥. Når |A ∪ C| >= n-t
    gis v_i til REC; REC-utdata går til SRA, og SRA-utdata blir utdata hvis
    ingenting er gitt ut før.
    """

    label = "ca1"
    bottom_messages = (BOT,)

    def __init__(self, ctx: PartyContext):
        super().__init__(ctx)
        self.hx = HashExchange(self)
        self.a: set[int] = {self.index}
        self.b: set[int] = set()
        self.c: set[int] = set()
        self.bot_sent = False
        self.rec_fed = False
        self.sra_value: Optional[Any] = None
        self.children = {"rec": Rec(ctx), "sra": Sra(ctx)}

    def on_input(self, value: Any) -> list[Action]:
        return self.hx.start() + self._maybe_feed_rec() + self._maybe_output_sra()

    def on_message(self, src: int, message: Message) -> list[Action]:
        if message.kind is MsgKind.KEY:
            actions, buffered = self.hx.on_key(src, message.body)
            if buffered is not None:
                actions += self._classify(src, buffered)
            return actions
        if message.kind is MsgKind.HASH:
            value = self.hx.on_hash(src, message.body)
            return [] if value is None else self._classify(src, value)
        if message.kind is MsgKind.BOT:
            return self._on_bot(src)
        return []

    def _classify(self, src: int, value: int) -> list[Action]:
        if self.hx.matches(src, value):
            self.a.add(src)
            return self._maybe_feed_rec()
        self.b.add(src)
        if len(self.b) != self.t + 1:
            return []
        log.debug("CA1 ⊥ | party=%d B=%d", self.index, len(self.b))
        self.bot_sent = True
        actions: list[Action] = [Multicast(BOT)]
        if not self.outputs:
            actions += self.emit_output(None)
        return actions

    def _on_bot(self, src: int) -> list[Action]:
        if src in self.c:
            return []
        self.c.add(src)
        actions: list[Action] = []
        if len(self.c) == self.t + 1 and not self.outputs:
            actions += self.emit_output(None)
        return actions + self._maybe_feed_rec()

    def _maybe_feed_rec(self) -> list[Action]:
        if self.rec_fed or len(self.a | self.c) < self.n - self.t:
            return []
        self.rec_fed = True
        return self.feed("rec", self.input)

    def on_child_output(self, label: str, value: Any) -> list[Action]:
        if label == "rec":
            return self.feed("sra", value)
        if label == "sra":
            self.sra_value = value
            return self._maybe_output_sra()
        return []

    def _maybe_output_sra(self) -> list[Action]:
        # SRA kan bli ferdig før egen input er mottatt; utdata venter på input
        if self.sra_value is None or self.outputs or not self.acquired:
            return []
        return self.emit_output(self.sra_value)

    def matching_message(self, src: int) -> Optional[Message]:
        return self.hx.expected(src)
