# src/coding/auh.py
from __future__ import annotations

from dataclasses import dataclass

from coding.bits import Bits
from coding.gf import MAX_WIDTH, galois_field
from core.errors import ContractViolation, UnsupportedWidth


def _ceil_log2(value: int) -> int:
    """Eksakt ceil(log2(value)) for heltall >= 1."""
    return (value - 1).bit_length()


def kappa(lam: int, ell: int, n: int) -> int:
    """
    Nøkkel-/hashlengde: ceil(lam + log2(ell * n^2) + 1).
    lam er et heltall, så taket flyttes inn i log-leddet og regnes eksakt.
    """
    if lam < 1 or ell < 1 or n < 1:
        raise ContractViolation(f"lam, ell og n må være >= 1 (fikk {lam}, {ell}, {n})")
    k = lam + 1 + _ceil_log2(ell * n * n)
    if k > MAX_WIDTH:
        raise UnsupportedWidth(f"kappa={k} overstiger maks kroppsbredde {MAX_WIDTH}")
    return k


@dataclass(frozen=True)
class HashParams:
    lam: int
    msg_len: int
    parties: int

    @property
    def kappa(self) -> int:
        return kappa(self.lam, self.msg_len, self.parties)

    @property
    def hashes(self) -> bool:
        """Under kappa bit sendes råverdien i stedet for en hash."""
        return self.msg_len >= self.kappa

    @property
    def digest_bits(self) -> int:
        return self.kappa if self.hashes else self.msg_len


def pad(m: Bits, kappa_: int) -> Bits:
    """Fyll med nuller på slutten til lengden er delelig med kappa."""
    if m.length < 1:
        raise ContractViolation("Kan ikke padde en tom streng")
    blocks = -(-m.length // kappa_)
    return m.zero_extend(blocks * kappa_)


def keyed_hash(key: int, m: Bits, kappa_: int) -> int:
    """
    h(k, m) = sum_j s_j * k^j over GF(2^kappa), der s_0, s_1, ... er
    kappa-bits blokker av m (MSB-først). Regnes med Horner.
    """
    if m.length % kappa_:
        raise ContractViolation(f"Lengde {m.length} er ikke delelig med kappa={kappa_} (pad først)")
    if key < 0 or key >> kappa_:
        raise ContractViolation(f"Nøkkel {key:#x} er bredere enn {kappa_} bit")
    gf = galois_field(kappa_)
    acc = 0
    for block in reversed(m.chunks(kappa_)):
        acc = gf.mul(acc, key) ^ block
    return acc


def joint_key(k_i: int, k_j: int, kappa_: int) -> int:
    """Felles nøkkel k_{i,j} = (k_i + k_j) mod 2^kappa."""
    if k_i >> kappa_ or k_j >> kappa_ or k_i < 0 or k_j < 0:
        raise ContractViolation(f"Nøkler må være < 2^{kappa_}")
    return (k_i + k_j) % (1 << kappa_)


def digest(key: int, value: Bits, params: HashParams) -> int:
    """Det som sendes i en HASH-melding: hash av paddet verdi, eller verdien selv når ell < kappa."""
    if not params.hashes:
        return value.value
    k = params.kappa
    return keyed_hash(key, pad(value, k), k)
