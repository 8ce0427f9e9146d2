# src/core/params.py
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from coding.auh import HashParams
from core.errors import ContractViolation, ThresholdError

# Protokoller som krever t < n/3, og de som krever t <= n/(3+eps).
ONE_THIRD = frozenset({"REC", "SRA", "CA1", "EXT", "EXT+CA1", "COIN_BA"})
EPS_BOUND = frozenset({"PRA", "KCA", "CA2", "EXT+CA2"})


def parse_fraction(raw: str | int | float | Fraction) -> Fraction:
    """Eksakt rasjonal fra '1', '1/2', 0.5 eller Fraction."""
    if isinstance(raw, Fraction):
        return raw
    if isinstance(raw, float):
        return Fraction(raw).limit_denominator(10**6)
    try:
        return Fraction(str(raw).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ContractViolation(f"Ugyldig rasjonal: {raw!r}") from e


@dataclass(frozen=True)
class ProtocolParams:
    """
    (n, t, eps, lam, ell) og avledede størrelser.
    sigma = min(1, eps); kappa fra hashing; delta-verdiene for KCA og CA2.
    """
    n: int
    t: int
    ell: int
    lam: int = 32
    eps: Fraction = field(default=Fraction(1))

    def __post_init__(self) -> None:
        if self.n < 1 or self.t < 0 or self.ell < 1 or self.lam < 1:
            raise ContractViolation(f"Ugyldige parametre: n={self.n} t={self.t} ell={self.ell} lam={self.lam}")
        if not isinstance(self.eps, Fraction):
            object.__setattr__(self, "eps", parse_fraction(self.eps))

    @property
    def sigma(self) -> Fraction:
        return min(Fraction(1), self.eps)

    @property
    def hash_params(self) -> HashParams:
        return HashParams(lam=self.lam, msg_len=self.ell, parties=self.n)

    @property
    def kappa(self) -> int:
        return self.hash_params.kappa

    @property
    def kca_delta(self) -> int:
        return max(1, math.ceil(self.sigma * (self.n - 3 * self.t) / 5))

    @property
    def ca2_delta(self) -> int:
        return max(1, math.ceil(self.sigma * (self.n - 3 * self.t) / 16))

    @property
    def kca_weak_bound(self) -> int:
        """Maks antall ulike ærlige ikke-⊥ KCA-utdata: ceil(8/sigma)."""
        return math.ceil(Fraction(8) / self.sigma)

    @property
    def collision_bound(self) -> int:
        return (self.n - 3 * self.t - 1) // 2

    def one_third_ok(self) -> bool:
        return 3 * self.t < self.n

    def eps_ok(self) -> bool:
        return self.eps > 0 and self.t * (3 + self.eps) <= self.n

    def require(self, protocol: str) -> "ProtocolParams":
        """Kast ThresholdError hvis t ikke passer protokollens terskel."""
        key = protocol.upper()
        if key in EPS_BOUND:
            if not self.eps_ok():
                raise ThresholdError(
                    f"{key} krever t <= n/(3+eps) og eps > 0 (n={self.n} t={self.t} eps={self.eps})"
                )
        elif key in ONE_THIRD:
            if not self.one_third_ok():
                raise ThresholdError(f"{key} krever t < n/3 (n={self.n} t={self.t})")
        else:
            raise ContractViolation(f"Ukjent protokoll for terskelsjekk: {protocol}")
        return self
