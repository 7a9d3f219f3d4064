"""Spin configurations on the hypercube {-1,+1}^N.

A configuration is stored bit-packed: bit ``i`` of ``bits`` is 1 exactly
when spin ``i`` is +1.  States are therefore integers in
``range(2**n)``, which doubles as the index into energy tables.  String
form writes bit ``n-1`` leftmost, so state 2 on two spins prints "10".
"""

from __future__ import annotations

from dataclasses import dataclass

MAX_SPINS = 30


@dataclass(frozen=True, order=True)
class SpinConfig:
    """One vertex of the hypercube, bit-packed."""

    bits: int
    n: int

    def __post_init__(self) -> None:
        if not 1 <= self.n <= MAX_SPINS:
            raise ValueError(f"number of spins must be in [1, {MAX_SPINS}], got {self.n}")
        if not 0 <= self.bits < 1 << self.n:
            raise ValueError(f"bits {self.bits:#x} out of range for {self.n} spins")

    def spin(self, i: int) -> int:
        """Spin value at coordinate i, +1 or -1."""
        self._check_coord(i)
        return 1 if self.bits >> i & 1 else -1

    def flip(self, i: int) -> "SpinConfig":
        """Configuration differing from this one exactly at coordinate i."""
        self._check_coord(i)
        return SpinConfig(self.bits ^ (1 << i), self.n)

    def neighbors(self) -> list["SpinConfig"]:
        """All n configurations at Hamming distance 1."""
        return [SpinConfig(self.bits ^ (1 << i), self.n) for i in range(self.n)]

    def hamming(self, other: "SpinConfig") -> int:
        if self.n != other.n:
            raise ValueError("size mismatch")
        return (self.bits ^ other.bits).bit_count()

    def spins(self) -> list[int]:
        """Spin values as a list, coordinate 0 first."""
        return [1 if self.bits >> i & 1 else -1 for i in range(self.n)]

    @classmethod
    def from_spins(cls, values) -> "SpinConfig":
        """Build from an iterable of +1/-1 values, coordinate 0 first."""
        bits = 0
        n = 0
        for i, v in enumerate(values):
            if v not in (-1, 1):
                raise ValueError(f"spin values must be +1 or -1, got {v}")
            if v == 1:
                bits |= 1 << i
            n = i + 1
        return cls(bits, n)

    @classmethod
    def all_minus(cls, n: int) -> "SpinConfig":
        return cls(0, n)

    @classmethod
    def all_plus(cls, n: int) -> "SpinConfig":
        return cls((1 << n) - 1, n)

    def __str__(self) -> str:
        return format(self.bits, f"0{self.n}b")

    def _check_coord(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise ValueError(f"coordinate {i} out of range for {self.n} spins")


def flip(sigma: SpinConfig, i: int) -> SpinConfig:
    """Flip coordinate i; involution, see SpinConfig.flip."""
    return sigma.flip(i)
