# src/coding/rs.py
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional

from coding.bits import Bits
from coding.gf import GaloisField, galois_field
from core.errors import ContractViolation, UnsupportedWidth

log = logging.getLogger(__name__)

# Kroppsbredder for kodealfabetet. Et symbol på a bit er en vektor av a/w
# kroppselementer ("lanes"), alle evaluert i de samme punktene 1..n.
FIELD_WIDTHS = (4, 8, 16)

Symbol = tuple[int, ...]
MISSING = None
FAILURE = None


def field_width_for(n: int) -> int:
    """Minste kroppsbredde w med 2^w > n."""
    for w in FIELD_WIDTHS:
        if (1 << w) > n:
            return w
    raise UnsupportedWidth(f"Ingen kroppsbredde i {FIELD_WIDTHS} har 2^w > n={n}")


def symbol_bits_for(ell: int, n: int, k: int) -> int:
    """
    Minste støttede symbolbredde a med 2^a > n og k*a >= ell.

    Støttede bredder er multipler av kroppsbredden for n, så a = w * ceil(ceil(ell/k) / w).
    """
    if ell < 1 or n < 1 or k < 1:
        raise ContractViolation(f"ell, n og k må være >= 1 (fikk {ell}, {n}, {k})")
    w = field_width_for(n)
    per_symbol = -(-ell // k)
    return w * max(1, -(-per_symbol // w))


@dataclass(frozen=True)
class CodeParams:
    n: int
    k: int
    msg_len: int
    symbol_bits: int

    def __post_init__(self) -> None:
        if self.n < 1 or self.k < 1 or self.msg_len < 1:
            raise ContractViolation(f"n, k og ell må være >= 1: {self}")
        if self.k > self.n:
            raise ContractViolation(f"k={self.k} er større enn n={self.n}")
        w = field_width_for(self.n)
        if self.symbol_bits < w or self.symbol_bits % w:
            raise ContractViolation(f"symbol_bits={self.symbol_bits} må være en positiv multippel av {w}")
        if self.k * self.symbol_bits < self.msg_len:
            raise ContractViolation(f"k*a={self.k * self.symbol_bits} < ell={self.msg_len}")

    @classmethod
    def for_message(cls, ell: int, n: int, k: int) -> "CodeParams":
        return cls(n=n, k=k, msg_len=ell, symbol_bits=symbol_bits_for(ell, n, k))

    @property
    def field_width(self) -> int:
        return field_width_for(self.n)

    @property
    def lanes(self) -> int:
        return self.symbol_bits // self.field_width

    @property
    def padded_len(self) -> int:
        return self.k * self.symbol_bits

    def is_symbol(self, value: object) -> bool:
        """Sjekk form og verdiområde for et mottatt symbol."""
        if not isinstance(value, tuple) or len(value) != self.lanes:
            return False
        top = 1 << self.field_width
        return all(isinstance(x, int) and 0 <= x < top for x in value)


@dataclass(frozen=True)
class Codeword:
    """n symboler; None (MISSING) står for et manglende symbol."""
    symbols: tuple[Optional[Symbol], ...]

    def __len__(self) -> int:
        return len(self.symbols)

    def __getitem__(self, index: int) -> Optional[Symbol]:
        return self.symbols[index]

    def __iter__(self) -> Iterator[Optional[Symbol]]:
        return iter(self.symbols)

    @property
    def missing(self) -> int:
        return sum(1 for s in self.symbols if s is None)


# ---------------------- Lineær algebra over GF(2^w) ----------------------

@lru_cache(maxsize=None)
def _vandermonde(n: int, k: int, width: int) -> tuple[tuple[int, ...], ...]:
    gf = galois_field(width)
    return tuple(tuple(gf.pow(i + 1, j) for j in range(k)) for i in range(n))


def _solve(rows: list[list[int]], rhs: list[int], gf: GaloisField) -> Optional[list[int]]:
    """Gauss-Jordan; frie variabler settes til 0. None hvis systemet er inkonsistent."""
    mul = gf.mul
    m = len(rows)
    ncols = len(rows[0]) if rows else 0
    aug = [row[:] + [b] for row, b in zip(rows, rhs)]
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        if r == m:
            break
        piv = next((i for i in range(r, m) if aug[i][col]), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        scale = gf.inv(aug[r][col])
        aug[r] = [mul(v, scale) for v in aug[r]]
        for i in range(m):
            if i != r and aug[i][col]:
                f = aug[i][col]
                aug[i] = [a ^ mul(f, b) for a, b in zip(aug[i], aug[r])]
        pivots.append(col)
        r += 1
    if any(aug[i][ncols] for i in range(r, m)):
        return None
    solution = [0] * ncols
    for i, col in enumerate(pivots):
        solution[col] = aug[i][ncols]
    return solution


@lru_cache(maxsize=1024)
def _interpolation_matrix(xs: tuple[int, ...], width: int) -> tuple[tuple[int, ...], ...]:
    """Invers Vandermonde-matrise: koeffisienter = M * verdier i punktene xs."""
    gf = galois_field(width)
    k = len(xs)
    vander = [[gf.pow(x, j) for j in range(k)] for x in xs]
    columns = []
    for c in range(k):
        unit = [1 if r == c else 0 for r in range(k)]
        col = _solve(vander, unit, gf)
        if col is None:
            raise ContractViolation(f"Singulær Vandermonde-matrise for punktene {xs}")
        columns.append(col)
    return tuple(tuple(columns[c][r] for c in range(k)) for r in range(k))


def _poly_eval(coeffs: list[int], x: int, gf: GaloisField) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = gf.mul(acc, x) ^ c
    return acc


def _poly_divmod(num: list[int], den: list[int], gf: GaloisField) -> tuple[list[int], list[int]]:
    num = num[:]
    dd = max(i for i, c in enumerate(den) if c)
    lead_inv = gf.inv(den[dd])
    quot = [0] * max(len(num) - dd, 1)
    for i in range(len(num) - 1, dd - 1, -1):
        coef = num[i]
        if coef:
            f = gf.mul(coef, lead_inv)
            quot[i - dd] = f
            for j in range(dd + 1):
                num[i - dd + j] ^= gf.mul(f, den[j])
    return quot, num[:dd]


def _berlekamp_welch(xs: list[int], ys: list[int], k: int, e: int,
                     gf: GaloisField) -> Optional[list[int]]:
    """
    Finn P med grad < k som stemmer med (xs, ys) i alle unntatt høyst e punkter.
    Ukjente: Q (grad < e+k) og monisk E (grad e), med Q(x) = y*E(x) i hvert punkt.
    """
    mul = gf.mul
    rows: list[list[int]] = []
    rhs: list[int] = []
    for x, y in zip(xs, ys):
        powers = [1]
        for _ in range(e + k):
            powers.append(mul(powers[-1], x))
        rows.append(powers[:e + k] + [mul(y, powers[i]) for i in range(e)])
        rhs.append(mul(y, powers[e]))
    sol = _solve(rows, rhs, gf)
    if sol is None:
        return None
    q = sol[:e + k]
    locator = sol[e + k:] + [1]
    quot, rem = _poly_divmod(q, locator, gf)
    if any(rem) or any(quot[k:]):
        return None
    return (quot + [0] * k)[:k]


# ---------------------- Enc / Dec ----------------------

@lru_cache(maxsize=4096)
def encode(m: Bits, p: CodeParams) -> Codeword:
    """
    Enc_k: meldingen fylles med nuller til k*a bit og deles i k symboler
    (MSB-først). Lane l av symbol j er koeffisient j i polynomet p_l; part i
    får symbolet (p_0(i), ..., p_{L-1}(i)) for evalueringspunkt i = 1..n.
    Ikke-systematisk layout.
    """
    if m.length != p.msg_len:
        raise ContractViolation(f"Meldingslengde {m.length} != ell={p.msg_len}")
    w = p.field_width
    lanes = p.lanes
    k = p.k
    flat = m.zero_extend(p.padded_len).chunks(w)
    gf = galois_field(w)
    mul = gf.mul
    symbols = []
    for row in _vandermonde(p.n, k, w):
        sym = []
        for lane in range(lanes):
            acc = 0
            for j in range(k):
                c = flat[j * lanes + lane]
                if c:
                    acc ^= mul(row[j], c)
            sym.append(acc)
        symbols.append(tuple(sym))
    return Codeword(tuple(symbols))


def decode(c: Codeword, p: CodeParams) -> Optional[Bits]:
    """
    Dec_k med feil og slettinger: gir riktig melding når 2c + d <= n - k.
    Symboler med feil form regnes som slettede. Returnerer None (FAILURE)
    når ingen kandidat finnes eller fyllbitene ikke er null.
    """
    if len(c) != p.n:
        raise ContractViolation(f"Kodeord har {len(c)} symboler, forventet {p.n}")
    present = [(i, s) for i, s in enumerate(c.symbols) if s is not None and p.is_symbol(s)]
    k = p.k
    if len(present) < k:
        return FAILURE
    budget = len(present) - k
    w = p.field_width
    gf = galois_field(w)
    xs = [i + 1 for i, _ in present]
    interp = _interpolation_matrix(tuple(xs[:k]), w)
    mul = gf.mul

    by_lane: list[list[int]] = []
    for lane in range(p.lanes):
        ys = [s[lane] for _, s in present]
        coeffs = []
        for row in interp:
            acc = 0
            for m_rc, y in zip(row, ys):
                if m_rc and y:
                    acc ^= mul(m_rc, y)
            coeffs.append(acc)
        mismatches = sum(1 for q in range(k, len(xs)) if _poly_eval(coeffs, xs[q], gf) != ys[q])
        if 2 * mismatches > budget:
            coeffs = _berlekamp_welch(xs, ys, k, budget // 2, gf)
            if coeffs is None:
                return FAILURE
        by_lane.append(coeffs)

    flat = [by_lane[lane][j] for j in range(k) for lane in range(p.lanes)]
    full = Bits.from_chunks(flat, w)
    pad = p.padded_len - p.msg_len
    if pad and full.value & ((1 << pad) - 1):
        return FAILURE
    return Bits(full.value >> pad, p.msg_len)
