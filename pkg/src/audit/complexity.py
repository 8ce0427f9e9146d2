# src/audit/complexity.py
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import pandas as pd

from core.params import ProtocolParams
from network.trace import Counter, Path, Trace

log = logging.getLogger(__name__)

# meldinger per part-par (c1 i c1*n^2), talt fra protokollenes sendinger
MESSAGE_CONSTANTS: dict[str, int] = {
    "REC": 2,
    "SRA": 2,
    "PRA": 1,
    "KCA": 2,
    "CA1": 7,
    "CA2": 7,
    "EXT": 3,
}

# kausal dybde under fifo med all input sluppet først
DEPTH_BOUNDS: dict[str, int] = {
    "SRA": 2,
    "PRA": 1,
    "KCA": 2,
}

# protokoller der bitkonstanten tilpasses og sjekkes mot toleransen
FITTED = frozenset({"CA1", "EXT"})
FIT_TOLERANCE = 0.25


def _log2(x: Fraction | float) -> float:
    return math.log2(float(x))


def bit_envelope(protocol: str, params: ProtocolParams) -> float:
    """
    Den asymptotiske bitformen for protokollen, uten konstant.
    For EXT er dette overhead-formen (CA og BA ikke medregnet).
    """
    n, ell, lam = params.n, params.ell, params.lam
    sigma, eps = params.sigma, params.eps
    eps_term = max(1.0, _log2(1 / eps)) if eps > 0 else 1.0
    key = protocol.upper()
    if key in ("REC", "EXT"):
        return ell * n + n * n
    if key == "CA1":
        return ell * n + n * n * (lam + _log2(n))
    if key in ("CA2", "KCA"):
        return float(ell * n / sigma**2) + n * n * eps_term
    if key == "PRA":
        return float(ell * n / sigma) + n * n * eps_term
    if key == "SRA":
        return n * n * params.kappa
    raise ValueError(f"Ukjent protokoll for bitform '{protocol}'. Gyldige: REC, SRA, PRA, KCA, CA1, CA2, EXT")


def measured(trace: Trace, protocol: str, root: Optional[Path] = None) -> Counter:
    """Ærlige meldinger/bit for protokollen; for EXT bare EXT-laget og dets REC."""
    root = root or trace.root
    total = trace.totals(root)
    if protocol.upper() != "EXT":
        return total
    out = Counter(total.messages, total.bits)
    for sub in ("ca", "ba"):
        part = trace.totals(root + (sub,))
        out.messages -= part.messages
        out.bits -= part.bits
    return out


@dataclass
class ComplexityReport:
    protocol: str
    n: int
    ell: int
    messages: int
    bits: int
    message_bound: int
    envelope: float
    ratio: float
    depth: int
    messages_ok: bool
    depth_ok: Optional[bool] = None
    bits_ok: Optional[bool] = None

    @property
    def ok(self) -> bool:
        return self.messages_ok and self.depth_ok is not False and self.bits_ok is not False


def complexity_audit(trace: Trace, params: ProtocolParams, protocol: str,
                     bit_constant: Optional[float] = None,
                     message_constants: Optional[dict[str, int]] = None,
                     check_depth: bool = False) -> ComplexityReport:
    """
    Sjekker meldinger <= c1*n^2 (telt, ikke tilpasset) og, hvis en bitkonstant
    er gitt, bit <= c2*(1 + toleranse)*form. Dybden sjekkes bare når sporet er
    kjørt med fifo og all input først.
    """
    key = protocol.upper()
    c1 = (message_constants or MESSAGE_CONSTANTS).get(key)
    count = measured(trace, key)
    n = params.n
    bound = c1 * n * n if c1 is not None else 0
    envelope = bit_envelope(key, params)
    ratio = count.bits / envelope if envelope else 0.0
    report = ComplexityReport(
        protocol=key, n=n, ell=params.ell, messages=count.messages, bits=count.bits,
        message_bound=bound, envelope=envelope, ratio=ratio, depth=trace.causal_depth,
        messages_ok=c1 is None or count.messages <= bound,
    )
    if check_depth and key in DEPTH_BOUNDS:
        report.depth_ok = trace.causal_depth <= DEPTH_BOUNDS[key]
    if bit_constant is not None:
        report.bits_ok = ratio <= bit_constant * (1 + FIT_TOLERANCE)
    if not report.ok:
        log.warning("Kompleksitet utenfor ramme | protocol=%s n=%d ell=%d msgs=%d/%d ratio=%.3f depth=%d",
                    key, n, params.ell, count.messages, bound, ratio, trace.causal_depth)
    return report


@dataclass
class EnvelopeFit:
    constant: float
    max_deviation: float
    within: bool


def fit_envelope(rows: pd.DataFrame, tolerance: float = FIT_TOLERANCE) -> EnvelopeFit:
    """
    Tilpass konstanten på minste gridpunkt (minste n, så minste ell) og sjekk at
    alle rader ligger innen ±toleranse av den. rows trenger kolonnene n, ell, bits, envelope.
    """
    if rows.empty:
        return EnvelopeFit(constant=0.0, max_deviation=0.0, within=True)
    ordered = rows.sort_values(["n", "ell"])
    first = ordered.iloc[0]
    c = float(first["bits"]) / float(first["envelope"])
    ratios = ordered["bits"].astype(float) / ordered["envelope"].astype(float)
    deviation = float((ratios / c - 1.0).abs().max())
    return EnvelopeFit(constant=c, max_deviation=deviation, within=deviation <= tolerance)


def depth_independent_of_ell(rows: pd.DataFrame) -> bool:
    """Kausal dybde er lik for alle ell ved fast (protocol, n)."""
    if rows.empty:
        return True
    return bool((rows.groupby(["protocol", "n"])["depth"].nunique() <= 1).all())
