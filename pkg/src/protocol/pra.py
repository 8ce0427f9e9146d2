# src/protocol/pra.py
from __future__ import annotations

from typing import Any, Optional

from coding.rs import CodeParams, Codeword, encode
from protocol.base import Action, Machine, Message, MsgKind, Multicast, PartyContext


class Pra(Machine):
    """Perfekt pålitelig enighet: ett symbol per part, kode med k = n-3t."""

    label = "pra"

    def __init__(self, ctx: PartyContext):
        super().__init__(ctx)
        self.code = CodeParams.for_message(self.params.ell, self.n, self.n - 3 * self.t)
        self.codeword: Optional[Codeword] = None
        self.agreeing: set[int] = {self.index}
        self.seen: set[int] = set()

    def on_input(self, value: Any) -> list[Action]:
        self.codeword = encode(value, self.code)
        own = Message(MsgKind.SYM, self.codeword[self.index - 1], self.code.symbol_bits)
        return [Multicast(own)] + self._check_done()

    def on_message(self, src: int, message: Message) -> list[Action]:
        if message.kind is not MsgKind.SYM or src == self.index or src in self.seen:
            return []
        if not self.code.is_symbol(message.body):
            return []
        self.seen.add(src)
        if message.body == self.codeword[src - 1]:
            self.agreeing.add(src)
        return self._check_done()

    def _check_done(self) -> list[Action]:
        if not self.outputs and len(self.agreeing) >= self.n - self.t:
            return self.emit_output(self.input)
        return []

    def matching_message(self, src: int) -> Optional[Message]:
        if self.codeword is None:
            return None
        return Message(MsgKind.SYM, self.codeword[src - 1], self.code.symbol_bits)
