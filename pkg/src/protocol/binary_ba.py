# src/protocol/binary_ba.py
from __future__ import annotations

import logging
from collections import defaultdict
from typing import Any, Optional

from core.errors import ContractViolation
from protocol.base import Action, Machine, Message, MsgKind, Multicast, PartyContext, ServiceCall

log = logging.getLogger(__name__)

# avsenderindeks for meldinger fra simulatorens orakel
ORACLE = 0
ORACLE_SERVICE = "oracle_ba"
DEFAULT_MAX_ROUNDS = 64


def _is_bit(value: Any) -> bool:
    return value in (0, 1) and not isinstance(value, bool)


class OracleBa(Machine):
    """
    Testdobbel for binær BA. Input sendes til simulatorens orakeltjeneste, som
    avgjør én bit og sender DECIDE til alle; utdata og terminering skjer ved
    DECIDE fra orakelet.
    """

    label = "ba"
    waits_for_input = False

    def on_input(self, value: Any) -> list[Action]:
        if not _is_bit(value):
            raise ContractViolation(f"Binær BA tar bare 0 eller 1, fikk {value!r}")
        return [ServiceCall(ORACLE_SERVICE, value)]

    def on_message(self, src: int, message: Message) -> list[Action]:
        if src != ORACLE or message.kind is not MsgKind.DECIDE or not _is_bit(message.body):
            return []
        if self.outputs:
            return []
        return self.emit_output(message.body) + self.terminate()


class CoinBa(Machine):
    """
    Rundebasert binær BA med ideell felles mynt.

    Hver runde: BV-kringkasting av EST (videresend ved t+1, bin_values ved 2t+1),
    AUX med første verdi i bin_values, CONF med bin_values når n-t AUX er dekket,
    og mynt når n-t CONF er dekket. values = {v}: est = v, og v besluttes hvis v
    er lik mynten; ellers est = mynt. Besluttede parter sender DECIDE; t+1 like
    DECIDE videresendes, 2t+1 gir utdata og terminering.
    """

    label = "ba"
    waits_for_input = False

    def __init__(self, ctx: PartyContext):
        super().__init__(ctx)
        self.max_rounds = int(ctx.settings.get("coin_max_rounds", DEFAULT_MAX_ROUNDS))
        self.round = 0
        self.est: Optional[int] = None
        self.decided: Optional[int] = None
        self.decided_round: Optional[int] = None
        self.est_sent: dict[int, set[int]] = defaultdict(set)
        self.est_recv: dict[tuple[int, int], set[int]] = defaultdict(set)
        self.bin_values: dict[int, set[int]] = defaultdict(set)
        self.aux_sent: set[int] = set()
        self.aux_recv: dict[int, dict[int, int]] = defaultdict(dict)
        self.conf_sent: set[int] = set()
        self.conf_recv: dict[int, dict[int, tuple[int, ...]]] = defaultdict(dict)
        self.decide_sent = False
        self.decide_recv: dict[int, set[int]] = defaultdict(set)
        self.capped = False

    # ---------------- input ----------------
    def on_input(self, value: Any) -> list[Action]:
        if not _is_bit(value):
            raise ContractViolation(f"Binær BA tar bare 0 eller 1, fikk {value!r}")
        self.est = value
        return self._start_round(1)

    def _start_round(self, r: int) -> list[Action]:
        if r > self.max_rounds:
            if not self.capped:
                self.capped = True
                log.warning("coin_ba nådde rundetaket | party=%d max_rounds=%d", self.index, self.max_rounds)
            return []
        self.round = r
        actions = self._send_est(r, self.est)
        if self.bin_values[r] and r not in self.aux_sent:
            actions += self._send_aux(r, min(self.bin_values[r]))
        return actions + self._progress()

    def _send_est(self, r: int, b: int) -> list[Action]:
        if b in self.est_sent[r]:
            return []
        self.est_sent[r].add(b)
        return [Multicast(Message(MsgKind.EST, (r, b), 1))]

    def _send_aux(self, r: int, b: int) -> list[Action]:
        self.aux_sent.add(r)
        return [Multicast(Message(MsgKind.AUX, (r, b), 1))]

    # ---------------- meldinger ----------------
    def _round_bit(self, body: Any) -> Optional[tuple[int, int]]:
        if not isinstance(body, tuple) or len(body) != 2:
            return None
        r, b = body
        if not isinstance(r, int) or isinstance(r, bool) or not 1 <= r <= self.max_rounds or not _is_bit(b):
            return None
        return r, b

    def on_message(self, src: int, message: Message) -> list[Action]:
        kind = message.kind
        if kind is MsgKind.DECIDE:
            return self._on_decide(src, message.body)
        if kind is MsgKind.CONF:
            return self._on_conf(src, message.body)
        parsed = self._round_bit(message.body)
        if parsed is None:
            return []
        r, b = parsed
        if kind is MsgKind.EST:
            return self._on_est(src, r, b)
        if kind is MsgKind.AUX:
            if src in self.aux_recv[r]:
                return []
            self.aux_recv[r][src] = b
            return self._progress()
        return []

    def _on_est(self, src: int, r: int, b: int) -> list[Action]:
        senders = self.est_recv[(r, b)]
        if src in senders:
            return []
        senders.add(src)
        actions: list[Action] = []
        if len(senders) >= self.t + 1:
            actions += self._send_est(r, b)
        if len(senders) >= 2 * self.t + 1 and b not in self.bin_values[r]:
            self.bin_values[r].add(b)
            if r == self.round and r not in self.aux_sent:
                actions += self._send_aux(r, b)
        return actions + self._progress()

    def _on_conf(self, src: int, body: Any) -> list[Action]:
        if not isinstance(body, tuple) or len(body) != 2:
            return []
        r, values = body
        if not isinstance(r, int) or isinstance(r, bool) or not 1 <= r <= self.max_rounds:
            return []
        if not isinstance(values, tuple) or not values or not all(_is_bit(v) for v in values):
            return []
        if src in self.conf_recv[r]:
            return []
        self.conf_recv[r][src] = tuple(sorted(set(values)))
        return self._progress()

    def _on_decide(self, src: int, body: Any) -> list[Action]:
        if not _is_bit(body) or any(src in s for s in self.decide_recv.values()):
            return []
        self.decide_recv[body].add(src)
        count = len(self.decide_recv[body])
        actions: list[Action] = []
        if count >= self.t + 1 and not self.decide_sent:
            actions += self._send_decide(body)
        if count >= 2 * self.t + 1 and not self.outputs:
            actions += self.emit_output(body, round=self.decided_round) + self.terminate()
        return actions

    def _send_decide(self, b: int) -> list[Action]:
        self.decide_sent = True
        return [Multicast(Message(MsgKind.DECIDE, b, 1))]

    # ---------------- runde-fremdrift ----------------
    def _progress(self) -> list[Action]:
        r = self.round
        if r < 1 or self.terminated or self.capped:
            return []
        bins = self.bin_values[r]
        actions: list[Action] = []
        if r in self.aux_sent and r not in self.conf_sent:
            covered = [v for v in self.aux_recv[r].values() if v in bins]
            if len(covered) < self.n - self.t:
                return []
            self.conf_sent.add(r)
            actions.append(Multicast(Message(MsgKind.CONF, (r, tuple(sorted(bins))), 2)))
        if r not in self.conf_sent:
            return actions
        confs = [vals for vals in self.conf_recv[r].values() if set(vals) <= bins]
        if len(confs) < self.n - self.t:
            return actions
        values = set().union(*confs)
        coin = self.ctx.coin((self.label,), r) if self.ctx.coin else 0
        if len(values) == 1:
            v = next(iter(values))
            self.est = v
            if v == coin and self.decided is None:
                self.decided = v
                self.decided_round = r
                log.debug("coin_ba beslutning | party=%d round=%d bit=%d", self.index, r, v)
                if not self.decide_sent:
                    actions += self._send_decide(v)
        else:
            self.est = coin
        return actions + self._start_round(r + 1)
