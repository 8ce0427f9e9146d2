# src/protocol/kca.py
from __future__ import annotations

import logging
from typing import Any, Optional

from coding.rs import CodeParams, Codeword, encode
from protocol.base import Action, Machine, Message, MsgKind, Multicast, PartyContext, Send

log = logging.getLogger(__name__)


class Kca(Machine):
    """
    k-crusader-enighet med k = ceil(8/sigma).

    Runde 1: P_i sender (s_i, s_j) fra Enc_delta(v_i) til hver P_j.
    Runde 2: SUC 1 når n-2t par matchet (og færre enn t+1 ikke gjorde det),
    SUC 0 når t+1 par ikke matchet. Utdata v_i ved |M1 ∩ S1| >= n-2t,
    ⊥ ved |M0 ∪ S0| >= t+1; første utdata vinner og maskinen kjører videre.
    """

    label = "kca"
    bottom_messages = (Message(MsgKind.SUC, 0, 1),)

    def __init__(self, ctx: PartyContext):
        super().__init__(ctx)
        self.delta = self.params.kca_delta
        self.code = CodeParams.for_message(self.params.ell, self.n, self.delta)
        self.codeword: Optional[Codeword] = None
        self.m0: set[int] = set()
        self.m1: set[int] = set()
        self.s0: set[int] = set()
        self.s1: set[int] = set()
        self.suc_sent: Optional[int] = None

    def _pair_ok(self, body: Any) -> bool:
        return (isinstance(body, tuple) and len(body) == 2
                and all(self.code.is_symbol(s) for s in body))

    def on_input(self, value: Any) -> list[Action]:
        self.codeword = encode(value, self.code)
        own = self.codeword[self.index - 1]
        bits = 2 * self.code.symbol_bits
        return [
            Send(j, Message(MsgKind.SYM, (own, self.codeword[j - 1]), bits))
            for j in range(1, self.n + 1)
        ]

    def on_message(self, src: int, message: Message) -> list[Action]:
        actions: list[Action] = []
        if message.kind is MsgKind.SYM:
            if src in self.m0 or src in self.m1 or not self._pair_ok(message.body):
                return []
            expected = (self.codeword[src - 1], self.codeword[self.index - 1])
            matched = message.body == expected
            (self.m1 if matched else self.m0).add(src)
            actions += self._maybe_suc(matched)
        elif message.kind is MsgKind.SUC:
            if src in self.s0 or src in self.s1 or message.body not in (0, 1):
                return []
            (self.s1 if message.body == 1 else self.s0).add(src)
        else:
            return []
        return actions + self._maybe_output()

    def _maybe_suc(self, matched: bool) -> list[Action]:
        # vaktene sjekkes bare når mengden de teller vokser, så hver likhet slår til høyst én gang
        n, t = self.n, self.t
        bit: Optional[int] = None
        if matched and len(self.m1) == n - 2 * t and len(self.m0) < t + 1:
            bit = 1
        elif not matched and len(self.m0) == t + 1 and len(self.m1) < n - 2 * t:
            bit = 0
        if bit is None:
            return []
        self.suc_sent = bit
        log.debug("KCA SUC | party=%d bit=%d M0=%d M1=%d", self.index, bit, len(self.m0), len(self.m1))
        return [Multicast(Message(MsgKind.SUC, bit, 1))]

    def _maybe_output(self) -> list[Action]:
        if self.outputs:
            return []
        if len(self.m1 & self.s1) >= self.n - 2 * self.t:
            return self.emit_output(self.input)
        if len(self.m0 | self.s0) >= self.t + 1:
            return self.emit_output(None)
        return []

    def matching_message(self, src: int) -> Optional[Message]:
        if self.codeword is None:
            return None
        pair = (self.codeword[src - 1], self.codeword[self.index - 1])
        return Message(MsgKind.SYM, pair, 2 * self.code.symbol_bits)
