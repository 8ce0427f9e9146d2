# src/coding/bits.py
from __future__ import annotations

from dataclasses import dataclass

from core.errors import ContractViolation


@dataclass(frozen=True, order=True)
class Bits:
    """
    Bitstreng med eksplisitt lengde.

    value tolkes MSB-først: første bit i strengen er den mest signifikante biten
    av value. Lengden er en del av identiteten, så 0b01 med lengde 2 og 0b1 med
    lengde 1 er forskjellige strenger.
    """
    value: int
    length: int

    def __post_init__(self) -> None:
        if self.length < 0:
            raise ContractViolation(f"Negativ bitlengde: {self.length}")
        if self.value < 0 or self.value >> self.length:
            raise ContractViolation(f"Verdi {self.value:#x} får ikke plass i {self.length} bit")

    @classmethod
    def zeros(cls, length: int) -> "Bits":
        return cls(0, length)

    @classmethod
    def from_hex(cls, text: str, length: int) -> "Bits":
        raw = text.strip().lower()
        if raw.startswith("0x"):
            raw = raw[2:]
        return cls(int(raw or "0", 16), length)

    def hex(self) -> str:
        return format(self.value, "x")

    def zero_extend(self, length: int) -> "Bits":
        """Legg til nullbiter på slutten til total lengde `length`."""
        if length < self.length:
            raise ContractViolation(f"Kan ikke forlenge {self.length} bit til {length}")
        return Bits(self.value << (length - self.length), length)

    def chunks(self, width: int) -> list[int]:
        """Del i `width`-bits biter, MSB-først. Lengden må være delelig med width."""
        if width <= 0 or self.length % width:
            raise ContractViolation(f"Lengde {self.length} er ikke delelig med {width}")
        count = self.length // width
        mask = (1 << width) - 1
        return [(self.value >> (width * (count - 1 - j))) & mask for j in range(count)]

    @classmethod
    def from_chunks(cls, chunks: list[int] | tuple[int, ...], width: int) -> "Bits":
        value = 0
        for c in chunks:
            if c < 0 or c >> width:
                raise ContractViolation(f"Bit-bit {c:#x} er bredere enn {width}")
            value = (value << width) | c
        return cls(value, width * len(chunks))

    def __len__(self) -> int:
        return self.length

    def __str__(self) -> str:
        return f"{self.length}:{self.hex()}"
