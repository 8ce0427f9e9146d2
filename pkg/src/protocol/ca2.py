# src/protocol/ca2.py
from __future__ import annotations

import logging
from typing import Any, Optional

from coding.rs import CodeParams, Codeword, encode
from protocol.base import Action, Machine, Message, MsgKind, Multicast, PartyContext
from protocol.kca import Kca
from protocol.pra import Pra
from protocol.rec import Rec

log = logging.getLogger(__name__)

BOT = Message(MsgKind.BOT, None, 1)
SYM_BOT = Message(MsgKind.SYM, None, 1)


class Ca2(Machine):
    """
    Perfekt crusader-enighet for t <= n/(3+eps).

    v_i går først gjennom KCA. Er KCA-utdata z_i = ⊥, multicastes SYM ⊥ og ⊥,
    utdata blir ⊥ og symbolutvekslingen ignoreres videre. Ellers kodes z_i med
    delta = ceil(sigma(n-3t)/16) og flyten er som i CA1, med symboler i stedet
    for hasher og PRA i stedet for SRA. REC får z_i som input.
    """

    label = "ca2"
    bottom_messages = (SYM_BOT, BOT)

    def __init__(self, ctx: PartyContext):
        super().__init__(ctx)
        self.delta = self.params.ca2_delta
        self.code = CodeParams.for_message(self.params.ell, self.n, self.delta)
        self.z: Optional[Any] = None
        self.z_known = False
        self.codeword: Optional[Codeword] = None
        self.a: set[int] = {self.index}
        self.b: set[int] = set()
        self.c: set[int] = set()
        self.seen: set[int] = set()
        self.bot_sent = False
        self.rec_fed = False
        self.pra_value: Optional[Any] = None
        self.children = {"kca": Kca(ctx), "rec": Rec(ctx), "pra": Pra(ctx)}

    @property
    def ready(self) -> bool:
        # meldinger buffres til KCA har gitt z_i
        return self.z_known

    @property
    def stopped(self) -> bool:
        return self.z_known and self.z is None

    def on_input(self, value: Any) -> list[Action]:
        return self.feed("kca", value) + self._maybe_output_pra()

    def on_child_output(self, label: str, value: Any) -> list[Action]:
        if label == "kca" and not self.z_known:
            return self._on_kca(value)
        if label == "rec":
            return self.feed("pra", value)
        if label == "pra":
            self.pra_value = value
            return self._maybe_output_pra()
        return []

    def _maybe_output_pra(self) -> list[Action]:
        if self.pra_value is None or self.outputs or not self.acquired:
            return []
        return self.emit_output(self.pra_value)

    def _on_kca(self, z: Any) -> list[Action]:
        self.z = z
        self.z_known = True
        if z is None:
            log.debug("CA2 KCA ga ⊥ | party=%d", self.index)
            self.bot_sent = True
            actions: list[Action] = [Multicast(SYM_BOT), Multicast(BOT)]
            if not self.outputs:
                actions += self.emit_output(None)
            self._backlog.clear()
            return actions
        self.codeword = encode(z, self.code)
        own = Message(MsgKind.SYM, self.codeword[self.index - 1], self.code.symbol_bits)
        actions = [Multicast(own)] + self._maybe_feed_rec()
        return actions + self._drain_backlog()

    def on_message(self, src: int, message: Message) -> list[Action]:
        if self.stopped:
            return []
        if message.kind is MsgKind.SYM:
            return self._on_sym(src, message.body)
        if message.kind is MsgKind.BOT:
            return self._on_bot(src)
        return []

    def _on_sym(self, src: int, body: Any) -> list[Action]:
        if src == self.index or src in self.seen:
            return []
        if body is not None and not self.code.is_symbol(body):
            return []
        self.seen.add(src)
        # SYM ⊥ teller som ikke-matchende
        if body is not None and body == self.codeword[src - 1]:
            self.a.add(src)
            return self._maybe_feed_rec()
        self.b.add(src)
        if len(self.b) != self.t + 1:
            return []
        log.debug("CA2 ⊥ | party=%d B=%d", self.index, len(self.b))
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
        if self.rec_fed or self.z is None or len(self.a | self.c) < self.n - self.t:
            return []
        self.rec_fed = True
        return self.feed("rec", self.z)

    def matching_message(self, src: int) -> Optional[Message]:
        if self.codeword is None:
            return None
        return Message(MsgKind.SYM, self.codeword[src - 1], self.code.symbol_bits)
