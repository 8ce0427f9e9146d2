# src/protocol/rec.py
from __future__ import annotations

import logging
from collections import Counter
from typing import Any, Optional

from coding.bits import Bits
from coding.rs import CodeParams, Codeword, Symbol, decode, encode
from protocol.base import Action, Machine, Message, MsgKind, Multicast, PartyContext, Send

log = logging.getLogger(__name__)


class Rec(Machine):
    """
    Rekonstruksjon med online feilretting.

    Hver part sender sitt eget MINE-symbol til alle og YOURS-symbol j til P_j.
    Parter uten input lærer verdien ved å dekode MINE-symbolene de mottar, og
    aksepterer bare en dekoding som stemmer med minst n-t mottatte symboler.
    Utdata og terminering kommer når y er satt og YOURS er mottatt fra 2t+1 parter.
    """

    label = "rec"
    waits_for_input = False

    def __init__(self, ctx: PartyContext):
        super().__init__(ctx)
        self.code = CodeParams.for_message(self.params.ell, self.n, self.n - 2 * self.t)
        self.z: list[Optional[Symbol]] = [None] * self.n
        self.y: Optional[Bits] = None
        self.sent_mine = False
        self.sent_yours = False
        self.yours: dict[int, Symbol] = {}
        self._yours_count: Counter[Symbol] = Counter()

    def _sym(self, kind: MsgKind, symbol: Symbol) -> Message:
        return Message(kind, symbol, self.code.symbol_bits)

    def _share(self, cw: Codeword) -> list[Action]:
        actions: list[Action] = []
        if not self.sent_mine:
            self.sent_mine = True
            actions.append(Multicast(self._sym(MsgKind.MINE, cw[self.index - 1])))
        if not self.sent_yours:
            self.sent_yours = True
            actions += [Send(j, self._sym(MsgKind.YOURS, cw[j - 1])) for j in range(1, self.n + 1)]
        return actions

    def on_input(self, value: Any) -> list[Action]:
        return self._share(encode(value, self.code)) + self._maybe_finish()

    def on_message(self, src: int, message: Message) -> list[Action]:
        if not self.code.is_symbol(message.body):
            log.debug("Ugyldig REC-symbol ignorert | party=%d src=%d", self.index, src)
            return []
        symbol: Symbol = message.body
        actions: list[Action] = []
        if message.kind is MsgKind.YOURS:
            if src in self.yours:
                return []
            self.yours[src] = symbol
            self._yours_count[symbol] += 1
            if self._yours_count[symbol] >= self.t + 1 and not self.sent_mine:
                self.sent_mine = True
                actions.append(Multicast(self._sym(MsgKind.MINE, symbol)))
        elif message.kind is MsgKind.MINE:
            if self.y is None and self.z[src - 1] is None:
                self.z[src - 1] = symbol
                actions += self._try_decode()
        else:
            return []
        return actions + self._maybe_finish()

    def _try_decode(self) -> list[Action]:
        stored = sum(1 for s in self.z if s is not None)
        if stored < self.n - self.t:
            return []
        candidate = decode(Codeword(tuple(self.z)), self.code)
        if candidate is None:
            return []
        cw = encode(candidate, self.code)
        matches = sum(1 for mine, expected in zip(self.z, cw) if mine == expected)
        if matches < self.n - self.t:
            log.debug("REC-kandidat forkastet | party=%d matches=%d", self.index, matches)
            return []
        self.y = candidate
        return self._share(cw)

    def _maybe_finish(self) -> list[Action]:
        if self.y is None or self.terminated or len(self.yours) < 2 * self.t + 1:
            return []
        return self.emit_output(self.y) + self.terminate()
