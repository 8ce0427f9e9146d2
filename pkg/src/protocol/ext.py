# src/protocol/ext.py
from __future__ import annotations

import logging
from typing import Any, Callable, Optional

from core.errors import ContractViolation
from protocol.base import Action, Machine, Message, MsgKind, Multicast, PartyContext
from protocol.rec import Rec
from protocol.wrap import IntrusionWrap

log = logging.getLogger(__name__)

BOT = Message(MsgKind.BOT, None, 1)

MachineFactory = Callable[[PartyContext], Machine]


class Ext(Machine):
    """
    Utvidelsesprotokollen: én CA-instans (alltid inntrengningstolerant innpakket),
    én REC-instans og én binær BA.

    CA-utdata v* != ⊥ går til REC. CA-utdata ⊥ gir ⊥-multicast og BA-input 0,
    det samme gjør ⊥ fra t+1 parter. Når REC gir v*, settes y_i og BA får 1.
    BA-utdata 0 gir utdata ⊥; BA-utdata 1 gir y_i så snart den er kjent.
    """

    label = "ext"
    waits_for_input = False
    bottom_messages = (BOT,)

    def __init__(self, ctx: PartyContext, ca: MachineFactory, ba: MachineFactory):
        super().__init__(ctx)
        self.y: Optional[Any] = None
        self.ca_output_seen = False
        self.ba_input: Optional[int] = None
        self.ba_output: Optional[int] = None
        self.bot_sent = False
        self.bot_senders: set[int] = set()
        self.children = {
            "ca": IntrusionWrap(ca(ctx)),
            "rec": Rec(ctx),
            "ba": ba(ctx),
        }

    def on_input(self, value: Any) -> list[Action]:
        return self.feed("ca", value)

    def on_message(self, src: int, message: Message) -> list[Action]:
        if message.kind is not MsgKind.BOT or src in self.bot_senders:
            return []
        self.bot_senders.add(src)
        if len(self.bot_senders) == self.t + 1:
            return self._input_ba(0)
        return []

    def _input_ba(self, bit: int) -> list[Action]:
        if self.ba_input is not None:
            return []
        self.ba_input = bit
        log.debug("EXT BA-input | party=%d bit=%d", self.index, bit)
        return self.feed("ba", bit)

    def on_child_output(self, label: str, value: Any) -> list[Action]:
        if label == "ca":
            if self.ca_output_seen:
                raise ContractViolation(f"CA ga utdata to ganger hos P{self.index}")
            self.ca_output_seen = True
            if value is not None:
                return self.feed("rec", value)
            actions: list[Action] = []
            if not self.bot_sent:
                self.bot_sent = True
                actions.append(Multicast(BOT))
            return actions + self._input_ba(0)
        if label == "rec":
            self.y = value
            return self._input_ba(1) + self._maybe_finish()
        if label == "ba":
            self.ba_output = value
        return []

    def on_child_terminate(self, label: str) -> list[Action]:
        if label != "ba" or self.terminated:
            return []
        if self.ba_output == 0:
            return self.emit_output(None) + self.terminate()
        return self._maybe_finish()

    def _maybe_finish(self) -> list[Action]:
        if self.terminated or self.ba_output != 1 or self.y is None:
            return []
        if not self.children["ba"].terminated:
            return []
        return self.emit_output(self.y) + self.terminate()
