# src/protocol/registry.py
from __future__ import annotations

from functools import partial
from typing import Callable, Optional, Tuple

from core.params import ProtocolParams
from protocol.base import Machine, PartyContext
from protocol.binary_ba import CoinBa, OracleBa
from protocol.ca1 import Ca1
from protocol.ca2 import Ca2
from protocol.ext import Ext
from protocol.kca import Kca
from protocol.pra import Pra
from protocol.rec import Rec
from protocol.sra import Sra
from protocol.wrap import IntrusionWrap

MachineFactory = Callable[[PartyContext], Machine]

# Protokoller som kan kjøres som rotinstans
PROTOCOL_MAP: dict[str, type[Machine]] = {
    "REC": Rec,
    "SRA": Sra,
    "PRA": Pra,
    "KCA": Kca,
    "CA1": Ca1,
    "CA2": Ca2,
    "EXT": Ext,
    "BA": CoinBa,
}

# CA-varianter EXT kan bygge på
CA_BACKENDS: dict[str, type[Machine]] = {
    "CA1": Ca1,
    "CA2": Ca2,
}

# binær BA: "oracle" er en simulatortjeneste, "coin" en ekte protokoll med ideell mynt
BA_BACKENDS: dict[str, type[Machine]] = {
    "oracle": OracleBa,
    "coin": CoinBa,
}


def _resolve(table: dict[str, type[Machine]], key: str, what: str, upper: bool = True) -> Tuple[str, type[Machine]]:
    norm = (key or "").strip()
    norm = norm.upper() if upper else norm.lower()
    if norm not in table:
        raise ValueError(f"Ukjent {what} '{key}'. Gyldige: {', '.join(table.keys())}")
    return norm, table[norm]


def resolve_protocol(key: str) -> Tuple[str, type[Machine]]:
    """
    Valider og oversett en nøkkel som 'ca1' -> ('CA1', Ca1).
    Kaster ValueError hvis ugyldig.
    """
    return _resolve(PROTOCOL_MAP, key, "protokoll")


def resolve_ca_backend(key: str) -> Tuple[str, type[Machine]]:
    return _resolve(CA_BACKENDS, key, "CA-variant")


def resolve_ba_backend(key: str) -> Tuple[str, type[Machine]]:
    return _resolve(BA_BACKENDS, key, "BA-backend", upper=False)


def threshold_key(protocol: str, ca_backend: str = "CA1", ba_backend: str = "oracle") -> str:
    """Nøkkelen ProtocolParams.require bruker for terskelsjekk."""
    proto, _ = resolve_protocol(protocol)
    if proto == "EXT":
        ca, _ = resolve_ca_backend(ca_backend)
        return f"EXT+{ca}"
    if proto == "BA":
        return "COIN_BA"
    return proto


def make_factory(
    protocol: str,
    params: ProtocolParams,
    ca_backend: str = "CA1",
    ba_backend: str = "oracle",
    wrap: bool = False,
) -> MachineFactory:
    """
    Bygg en fabrikk PartyContext -> rotmaskin. Terskelen sjekkes her, før noe kjøres.
    wrap=True pakker en frittstående CA inn i IntrusionWrap.
    """
    params.require(threshold_key(protocol, ca_backend, ba_backend))
    proto, cls = resolve_protocol(protocol)
    factory: Optional[MachineFactory] = None
    if proto == "EXT":
        _, ca_cls = resolve_ca_backend(ca_backend)
        _, ba_cls = resolve_ba_backend(ba_backend)
        factory = partial(Ext, ca=ca_cls, ba=ba_cls)
    elif proto == "BA":
        _, factory = resolve_ba_backend(ba_backend)
    else:
        factory = cls
    if wrap and proto in CA_BACKENDS:
        inner = factory
        return lambda ctx: IntrusionWrap(inner(ctx))
    return factory
