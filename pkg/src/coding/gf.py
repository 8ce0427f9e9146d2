# src/coding/gf.py
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

from core.errors import ContractViolation, UnsupportedWidth

log = logging.getLogger(__name__)

MAX_WIDTH = 256
TABLE_MAX_WIDTH = 16

# Lavvekts irredusible polynomer fra Seroussis tabell (HPL-98-135).
# Nøkkel = grad w, verdi = hele polynomet inkl. x^w.
PINNED_MODULI: dict[int, int] = {
    4: 0x13,                     # x^4 + x + 1
    8: 0x11B,                    # x^8 + x^4 + x^3 + x + 1
    16: 0x1002B,                 # x^16 + x^5 + x^3 + x + 1
    32: (1 << 32) | 0x8D,        # x^32 + x^7 + x^3 + x^2 + 1
    64: (1 << 64) | 0x1B,        # x^64 + x^4 + x^3 + x + 1
    128: (1 << 128) | 0x87,      # x^128 + x^7 + x^2 + x + 1
    256: (1 << 256) | 0x425,     # x^256 + x^10 + x^5 + x^2 + 1
}


# ---------------------- Polynomer over GF(2) ----------------------

def _degree(poly: int) -> int:
    return poly.bit_length() - 1


def _clmul(a: int, b: int) -> int:
    """Bærefri multiplikasjon av to GF(2)-polynomer."""
    result = 0
    while b:
        if b & 1:
            result ^= a
        a <<= 1
        b >>= 1
    return result


def _poly_mod(a: int, m: int) -> int:
    dm = _degree(m)
    while a and _degree(a) >= dm:
        a ^= m << (_degree(a) - dm)
    return a


def _poly_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, _poly_mod(a, b)
    return a


def is_irreducible(poly: int) -> bool:
    """
    Ben-Or-test: f av grad d er irredusibel hvis gcd(f, x^(2^i) - x) = 1
    for alle 1 <= i <= d/2.
    """
    d = _degree(poly)
    if d < 1:
        return False
    x = 0b10
    h = x
    for _ in range(d // 2):
        h = _poly_mod(_clmul(h, h), poly)
        if _poly_gcd(poly, h ^ x) != 1:
            return False
    return True


@lru_cache(maxsize=None)
def modulus_for(width: int) -> int:
    """Fast irredusibelt polynom for bredden; tabellen først, ellers minste irredusible."""
    if not 1 <= width <= MAX_WIDTH:
        raise UnsupportedWidth(f"Bredde {width} støttes ikke (1..{MAX_WIDTH})")
    if width in PINNED_MODULI:
        return PINNED_MODULI[width]
    top = 1 << width
    for low in range(top):
        candidate = top | low
        if is_irreducible(candidate):
            log.debug("Fant modulus | width=%d poly=%#x", width, candidate)
            return candidate
    raise UnsupportedWidth(f"Fant ikke irredusibelt polynom av grad {width}")


def _prime_factors(value: int) -> list[int]:
    out: list[int] = []
    p = 2
    while p * p <= value:
        if value % p == 0:
            out.append(p)
            while value % p == 0:
                value //= p
        p += 1
    if value > 1:
        out.append(value)
    return out


# ---------------------- Kroppen ----------------------

class GaloisField:
    """
    GF(2^w) med heltall som elementer.

    Multiplikasjon er skift-og-XOR med reduksjon modulo `modulus`. For w <= 16
    brukes log/antilog-tabeller i stedet; `mul_generic` er alltid tilgjengelig
    for kryssjekk.
    """

    def __init__(self, width: int):
        self.width = width
        self.order = 1 << width
        self.modulus = modulus_for(width)
        self._exp: list[int] | None = None
        self._log: list[int] | None = None
        if 2 <= width <= TABLE_MAX_WIDTH:
            self._build_tables()
            self.mul = self._mul_table
            self.inv = self._inv_table
        else:
            self.mul = self.mul_generic
            self.inv = self._inv_generic

    @property
    def has_tables(self) -> bool:
        return self._exp is not None

    def __call__(self, value: int) -> "FieldElem":
        return FieldElem(value, self.width)

    def __repr__(self) -> str:
        return f"GaloisField(width={self.width}, modulus={self.modulus:#x})"

    def mul_generic(self, a: int, b: int) -> int:
        result = 0
        top = self.order
        mod = self.modulus
        while b:
            if b & 1:
                result ^= a
            b >>= 1
            a <<= 1
            if a & top:
                a ^= mod
        return result

    def pow(self, a: int, e: int) -> int:
        result = 1
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def _inv_generic(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 har ingen multiplikativ invers")
        return self.pow(a, self.order - 2)

    def _build_tables(self) -> None:
        group = self.order - 1
        primes = _prime_factors(group)
        generator = next(
            g for g in range(2, self.order)
            if all(self._pow_generic(g, group // p) != 1 for p in primes)
        )
        exp = [0] * (2 * group)
        log_ = [0] * self.order
        x = 1
        for i in range(group):
            exp[i] = x
            exp[i + group] = x
            log_[x] = i
            x = self.mul_generic(x, generator)
        self._exp = exp
        self._log = log_

    def _pow_generic(self, a: int, e: int) -> int:
        result = 1
        while e:
            if e & 1:
                result = self.mul_generic(result, a)
            a = self.mul_generic(a, a)
            e >>= 1
        return result

    def _mul_table(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[self._log[a] + self._log[b]]

    def _inv_table(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 har ingen multiplikativ invers")
        return self._exp[(self.order - 1) - self._log[a]]


@lru_cache(maxsize=None)
def galois_field(width: int) -> GaloisField:
    return GaloisField(width)


@dataclass(frozen=True)
class FieldElem:
    value: int
    width: int

    def __post_init__(self) -> None:
        if not 1 <= self.width <= MAX_WIDTH:
            raise UnsupportedWidth(f"Bredde {self.width} støttes ikke (1..{MAX_WIDTH})")
        if self.value < 0 or self.value >> self.width:
            raise ContractViolation(f"{self.value:#x} er ikke et element i GF(2^{self.width})")

    def __add__(self, other: "FieldElem") -> "FieldElem":
        return add(self, other)

    __sub__ = __add__

    def __mul__(self, other: "FieldElem") -> "FieldElem":
        return mul(self, other)

    def inverse(self) -> "FieldElem":
        return inv(self)

    def __bool__(self) -> bool:
        return self.value != 0


def _same_width(a: FieldElem, b: FieldElem) -> None:
    if a.width != b.width:
        raise ContractViolation(f"Breddekonflikt: {a.width} != {b.width}")


def add(a: FieldElem, b: FieldElem) -> FieldElem:
    _same_width(a, b)
    return FieldElem(a.value ^ b.value, a.width)


def mul(a: FieldElem, b: FieldElem) -> FieldElem:
    _same_width(a, b)
    return FieldElem(galois_field(a.width).mul(a.value, b.value), a.width)


def inv(a: FieldElem) -> FieldElem:
    return FieldElem(galois_field(a.width).inv(a.value), a.width)
