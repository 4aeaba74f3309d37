"""Prefix vectors and their non-standard (block-repeated) representations.

A :class:`PrefixVector` holds the first ``n`` binary digits of a number.
Its integer representative is the prefix read as a binary numeral, i.e. the
inner product with the weights ``2**(n-1), ..., 2, 1``. The non-standard
vector repeats digit ``i`` ``2**(n-i)`` times, so its squared norm equals the
integer representative. Above :data:`NS_MATERIALIZE_CAP` only the integer
form (:class:`NsProfile`) is available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .digits import BitBuffer, DigitSource, InsufficientDigitsError

__all__ = [
    "NS_MATERIALIZE_CAP",
    "PrefixVector",
    "NsProfile",
    "NsVector",
    "UndefinedAngleError",
    "prefix_vector",
    "integer_representative",
    "ns_vector",
    "ns_profile",
    "complement",
    "norm_squared",
    "angle_to_ones",
    "from_integer",
    "as_prefix",
]

NS_MATERIALIZE_CAP = 20


class UndefinedAngleError(ValueError):
    """The zero vector makes no angle with the all-ones vector."""


@dataclass(frozen=True, eq=False)
class PrefixVector:
    """Ordered 0/1 entries with a cached popcount."""

    bits: np.ndarray
    popcount: int = field(init=False)

    def __post_init__(self):
        arr = np.array(self.bits, dtype=np.uint8).ravel()
        if arr.size < 1:
            raise ValueError("a prefix vector needs at least one entry")
        if arr.max() > 1:
            raise ValueError("entries must be 0 or 1")
        arr.flags.writeable = False
        object.__setattr__(self, "bits", arr)
        object.__setattr__(self, "popcount", int(arr.sum(dtype=np.int64)))

    @property
    def n(self) -> int:
        return int(self.bits.size)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, PrefixVector):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash(self.bits.tobytes())

    def to_string(self) -> str:
        return (self.bits + ord("0")).tobytes().decode()

    def to_buffer(self) -> BitBuffer:
        return BitBuffer.from_bits(self.bits)

    def __repr__(self) -> str:
        text = self.to_string()
        if len(text) > 40:
            text = text[:40] + "..."
        return f"PrefixVector(n={self.n}, bits={text}, popcount={self.popcount})"


@dataclass(frozen=True)
class NsProfile:
    """Integer form of the non-standard representation.

    ``x_star`` is the squared norm of the non-standard vector and
    ``complement_star`` that of its complement; they sum to ``2**n - 1``.
    """

    n: int
    x_star: int
    complement_star: int

    @property
    def ns_length(self) -> int:
        return (1 << self.n) - 1

    @property
    def ns_norm_squared(self) -> int:
        return self.x_star

    def ns_norm(self) -> float:
        """sqrt(x_star) as a float; overflows past n = 2048."""
        if self.x_star == 0:
            return 0.0
        shift = max(0, self.x_star.bit_length() - 106) & ~1
        return math.ldexp(math.sqrt(self.x_star >> shift), shift // 2)


@dataclass(frozen=True, eq=False)
class NsVector:
    """Explicit length ``2**n - 1`` vector made of ``n`` constant blocks."""

    n: int
    entries: np.ndarray

    @property
    def block_sizes(self) -> list[int]:
        return [1 << (self.n - 1 - i) for i in range(self.n)]

    def blocks(self) -> list[np.ndarray]:
        edges = np.cumsum([0] + self.block_sizes)
        return [self.entries[a:b] for a, b in zip(edges[:-1], edges[1:])]

    def norm_squared(self) -> int:
        return int(np.dot(self.entries.astype(np.int64), self.entries.astype(np.int64)))

    def __len__(self) -> int:
        return int(self.entries.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, NsVector):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.entries, other.entries)


def prefix_vector(source, n: int, left_pad: int = 0) -> PrefixVector:
    """Build ``[x]^(n)``: ``left_pad`` zeros followed by ``n - left_pad`` digits.

    ``source`` may be a :class:`DigitSource` (digits are read from its
    current position), a :class:`BitBuffer` (its leading digits), or any 0/1
    sequence.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 <= left_pad <= n:
        raise ValueError("left_pad must lie in [0, n]")
    need = n - left_pad
    if isinstance(source, DigitSource):
        digits = source.read(need)
    else:
        if isinstance(source, BitBuffer):
            avail = source.bits()
        else:
            avail = np.asarray(source, dtype=np.uint8).ravel()
        if avail.size < need:
            raise InsufficientDigitsError(need, int(avail.size))
        digits = avail[:need]
    return PrefixVector(np.concatenate([np.zeros(left_pad, dtype=np.uint8), digits]))


def from_integer(value: int, n: int) -> PrefixVector:
    """Prefix vector of length ``n`` whose integer representative is ``value``."""
    if not 0 <= value < (1 << n):
        raise ValueError(f"{value} does not fit in {n} bits")
    raw = value.to_bytes((n + 7) // 8, "big")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))
    return PrefixVector(bits[bits.size - n:])


def integer_representative(v: PrefixVector) -> int:
    """sum(bits[i] * 2**(n - i)) for 1-based i, exactly."""
    packed = np.packbits(v.bits).tobytes()
    return int.from_bytes(packed, "big") >> ((-v.n) % 8)


def ns_vector(v: PrefixVector, cap: int = NS_MATERIALIZE_CAP) -> NsVector:
    if v.n > cap:
        raise ValueError(
            f"n={v.n} exceeds the materialization cap {cap}; use ns_profile()"
        )
    reps = np.left_shift(1, np.arange(v.n - 1, -1, -1, dtype=np.int64))
    entries = np.repeat(v.bits, reps)
    entries.flags.writeable = False
    return NsVector(v.n, entries)


def ns_profile(v: PrefixVector) -> NsProfile:
    x_star = integer_representative(v)
    return NsProfile(n=v.n, x_star=x_star, complement_star=(1 << v.n) - 1 - x_star)


def complement(v: PrefixVector) -> PrefixVector:
    return PrefixVector(1 - v.bits)


def norm_squared(v: PrefixVector) -> int:
    # entries are 0/1, so the squared norm is the ones count
    return v.popcount


def angle_to_ones(v: PrefixVector) -> float:
    """Angle in radians between ``v`` and the all-ones vector."""
    if v.popcount == 0:
        raise UndefinedAngleError("undefined angle: zero vector")
    return math.acos(math.sqrt(v.popcount / v.n))


def as_prefix(bits: Sequence[int] | str) -> PrefixVector:
    """Convenience constructor from ``"1011"`` or ``[1, 0, 1, 1]``."""
    if isinstance(bits, str):
        bits = [int(c) for c in bits if not c.isspace()]
    return PrefixVector(np.asarray(bits, dtype=np.uint8))
