"""Exact binary digit generators and the ``.nbits`` bitstream format.

Every source emits digits starting at the most significant 1 of the
constant, so ``x`` and ``2**p * x`` produce the same stream. Leading zeros,
when wanted, are added explicitly by :func:`normlab.vecrep.prefix_vector`.

All arithmetic is exact. Square roots are extracted with a precision-doubling
Newton iteration over big integers followed by an exactness correction;
floating point never touches a digit.
"""

from __future__ import annotations

import json
import math
import os
import struct
from datetime import datetime, timezone
from typing import BinaryIO, Iterator, Union

import gmpy2
import numpy as np

__all__ = [
    "BitBuffer",
    "DigitSource",
    "SqrtSource",
    "RationalSource",
    "ChampernowneSource",
    "CopelandErdosSource",
    "ConstantOnesSource",
    "AlternatingSource",
    "BufferSource",
    "InsufficientDigitsError",
    "NbitsFormatError",
    "BadMagicError",
    "UnsupportedVersionError",
    "TruncatedPayloadError",
    "NonzeroPaddingError",
    "isqrt_newton",
    "segmented_primes",
    "sqrt_digits",
    "rational_digits",
    "champernowne2_digits",
    "copeland_erdos2_digits",
    "make_source",
    "parse_source_spec",
    "write_bits",
    "read_bits",
    "write_sidecar",
]

GENERATOR_VERSION = "normlab-digits/1"
MAGIC = b"NBITS"
FORMAT_VERSION = 1
HEADER = struct.Struct("<5sBQ")

# growth floor for cached digit blocks
MIN_CHUNK = 1 << 16

PathOrFile = Union[str, os.PathLike, BinaryIO]


class InsufficientDigitsError(ValueError):
    """A finite source cannot supply the requested number of digits."""

    def __init__(self, required: int, available: int):
        self.required = required
        self.available = available
        super().__init__(
            f"need {required} digits but only {available} are available"
        )


class NbitsFormatError(ValueError):
    pass


class BadMagicError(NbitsFormatError):
    pass


class UnsupportedVersionError(NbitsFormatError):
    pass


class TruncatedPayloadError(NbitsFormatError):
    pass


class NonzeroPaddingError(NbitsFormatError):
    pass


# --------------------------------------------------------------------------
# big-integer helpers


def _int_to_bits(value: int, width: int) -> np.ndarray:
    """Return the low ``width`` bits of ``value``, most significant first."""
    if width <= 0:
        return np.zeros(0, dtype=np.uint8)
    nbytes = (width + 7) // 8
    raw = int(value).to_bytes(nbytes, "big")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8))
    return bits[nbytes * 8 - width:]


def isqrt_newton(n, guess=None):
    """Floor square root of a non-negative integer.

    Newton's iteration run from an overestimate decreases monotonically to
    ``floor(sqrt(n))``. Without a guess the overestimate comes from the root
    of the top half of ``n`` (recursively), so each level roughly doubles the
    number of correct bits. A closing adjustment makes the result exact even
    if ``guess`` was an underestimate.

    Works on ``int`` and ``gmpy2.mpz``; the return type follows the input.
    """
    if n < 0:
        raise ValueError("square root of a negative number")
    if n < 2:
        return n
    if guess is None:
        bits = n.bit_length()
        if bits <= 52:
            x = type(n)(int(math.sqrt(int(n))))
        else:
            # root of the top half gives ~bits/4 correct leading bits
            k = bits // 4
            top = isqrt_newton(n >> (2 * k))
            guess = (top + 1) << k
            x = _newton_down(n, guess)
    else:
        x = _newton_down(n, max(guess, 1))
    while x * x > n:
        x -= 1
    while (x + 1) * (x + 1) <= n:
        x += 1
    return x


def _newton_down(n, x):
    if x * x < n:
        # underestimate: one step lands above the root (AM-GM)
        x = (x + n // x) // 2 + 1
    while True:
        y = (x + n // x) >> 1
        if y >= x:
            return x
        x = y


def segmented_primes(segment: int = 1 << 15) -> Iterator[np.ndarray]:
    """Yield successive primes as ascending int64 arrays, without an upper bound.

    Segments grow geometrically; each is sieved by the base primes up to the
    square root of its upper end.
    """
    base = np.array([2, 3, 5, 7], dtype=np.int64)
    base_limit = 10
    lo = 2
    hi = max(segment, 16)
    while True:
        root = math.isqrt(hi - 1) + 1
        if root > base_limit:
            base_limit = max(root, 2 * base_limit)
            base = _simple_sieve(base_limit)
        mask = np.ones(hi - lo, dtype=bool)
        for p in base:
            p = int(p)
            if p * p >= hi:
                break
            start = max(p * p, ((lo + p - 1) // p) * p)
            mask[start - lo::p] = False
        if lo <= 1:
            mask[: 2 - lo] = False
        yield np.flatnonzero(mask).astype(np.int64) + lo
        lo, hi = hi, 2 * hi


def _simple_sieve(limit: int) -> np.ndarray:
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p::p] = False
    return np.flatnonzero(is_prime).astype(np.int64)


def _concat_binary(values: np.ndarray) -> np.ndarray:
    """Concatenate the binary numerals of ascending positive integers."""
    if len(values) == 0:
        return np.zeros(0, dtype=np.uint8)
    values = np.asarray(values, dtype=np.uint64)
    powers = np.uint64(1) << np.arange(64, dtype=np.uint64)
    widths = np.searchsorted(powers, values, side="right")
    out = []
    for w in np.unique(widths):
        group = values[widths == w]
        shifts = np.arange(w - 1, -1, -1, dtype=np.uint64)
        out.append(((group[:, None] >> shifts) & np.uint64(1)).astype(np.uint8).ravel())
    return np.concatenate(out)


# --------------------------------------------------------------------------
# bit buffers


class BitBuffer:
    """Immutable packed bit sequence, most significant bit first in each byte.

    Pad bits after ``length`` in the final byte are always zero.
    """

    __slots__ = ("_data", "_length")

    def __init__(self, data: bytes, length: int):
        if length < 0:
            raise ValueError("length must be non-negative")
        if len(data) != (length + 7) // 8:
            raise ValueError(
                f"{len(data)} bytes cannot hold exactly {length} bits"
            )
        pad = (-length) % 8
        if pad and data[-1] & ((1 << pad) - 1):
            raise NonzeroPaddingError("pad bits in final byte are not zero")
        self._data = bytes(data)
        self._length = length

    @classmethod
    def from_bits(cls, bits) -> "BitBuffer":
        arr = np.asarray(bits, dtype=np.uint8).ravel()
        if arr.size and arr.max() > 1:
            raise ValueError("bits must be 0 or 1")
        return cls(np.packbits(arr).tobytes(), int(arr.size))

    @classmethod
    def from_string(cls, text: str) -> "BitBuffer":
        text = "".join(text.split())
        if set(text) - {"0", "1"}:
            raise ValueError("bit string may contain only '0' and '1'")
        return cls.from_bits(np.frombuffer(text.encode(), dtype=np.uint8) - ord("0"))

    @property
    def data(self) -> bytes:
        return self._data

    def bits(self) -> np.ndarray:
        """Unpacked read-only uint8 array of 0/1 values."""
        arr = np.unpackbits(np.frombuffer(self._data, dtype=np.uint8))[: self._length]
        arr.flags.writeable = False
        return arr

    def popcount(self) -> int:
        return int(np.unpackbits(np.frombuffer(self._data, dtype=np.uint8)).sum())

    def to_int(self) -> int:
        """The bits read as a big-endian integer."""
        if self._length == 0:
            return 0
        return int.from_bytes(self._data, "big") >> ((-self._length) % 8)

    def to_string(self) -> str:
        return (self.bits() + ord("0")).tobytes().decode()

    def __len__(self) -> int:
        return self._length

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitBuffer):
            return NotImplemented
        return self._length == other._length and self._data == other._data

    def __hash__(self) -> int:
        return hash((self._length, self._data))

    def __repr__(self) -> str:
        head = self.to_string()[:32] if self._length <= 4096 else ""
        more = "..." if self._length > 32 else ""
        return f"BitBuffer(length={self._length}, bits={head}{more})"


# --------------------------------------------------------------------------
# digit sources


class DigitSource:
    """Stateful generator of binary digits.

    ``read(count)`` returns the next ``count`` digits and advances
    :attr:`position`. Two sources built with the same kind and parameters
    always emit the same sequence. Not safe for concurrent use.
    """

    kind = "abstract"

    def __init__(self):
        self.position = 0
        self._cache = np.zeros(0, dtype=np.uint8)

    @property
    def params(self) -> dict:
        return {}

    @property
    def available(self) -> int | None:
        """Total digit count for finite sources, ``None`` for infinite ones."""
        return None

    def _extend(self, total: int) -> None:
        """Grow ``self._cache`` to hold at least ``total`` digits."""
        raise NotImplementedError

    def _ensure(self, total: int) -> None:
        if total <= len(self._cache):
            return
        limit = self.available
        if limit is not None and total > limit:
            raise InsufficientDigitsError(total, limit)
        self._extend(total)

    def read(self, count: int) -> np.ndarray:
        if count < 0:
            raise ValueError("count must be non-negative")
        end = self.position + count
        self._ensure(end)
        out = self._cache[self.position:end].copy()
        self.position = end
        return out

    def prefix(self, n: int) -> np.ndarray:
        """The first ``n`` digits, regardless of the current position."""
        self._ensure(n)
        return self._cache[:n].copy()

    def chunks(self, total: int, size: int = MIN_CHUNK) -> Iterator[np.ndarray]:
        """Read ``total`` digits in blocks of at most ``size``."""
        remaining = total
        while remaining > 0:
            step = min(size, remaining)
            yield self.read(step)
            remaining -= step

    def fresh(self) -> "DigitSource":
        """A new source of the same kind and parameters, at position 0."""
        return make_source(self.kind, **self.params)

    def describe(self) -> dict:
        return {"kind": self.kind, "parameters": self.params}

    def _grow_target(self, total: int) -> int:
        return max(total, 2 * len(self._cache), MIN_CHUNK)

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({args})"


class SqrtSource(DigitSource):
    """Digits of sqrt(m) for a non-square integer m >= 2.

    After ``t`` digits the cached root ``v`` satisfies
    ``v**2 <= m * 4**(t - 1 - a) < (v + 1)**2`` where ``2**a <= sqrt(m)``.
    Extending reuses ``v`` shifted left as the Newton starting point.
    """

    kind = "sqrt"

    def __init__(self, m: int):
        super().__init__()
        m = int(m)
        if m < 2:
            raise ValueError("sqrt source needs m >= 2")
        if math.isqrt(m) ** 2 == m:
            raise ValueError(f"{m} is a perfect square; its expansion terminates")
        self.m = m
        self._lead = (m.bit_length() - 1) // 2
        self._root = None
        self._digits = 0

    @property
    def params(self) -> dict:
        return {"m": self.m}

    def _extend(self, total: int) -> None:
        target = max(self._grow_target(total), self._lead + 1)
        radicand = gmpy2.mpz(self.m) << (2 * (target - 1 - self._lead))
        if self._root is None:
            root = isqrt_newton(radicand)
        else:
            shift = target - self._digits
            root = isqrt_newton(radicand, guess=(self._root + 1) << shift)
        new_bits = _int_to_bits(int(root), target)
        self._cache = np.concatenate([self._cache, new_bits[len(self._cache):]])
        self._root = root
        self._digits = target

    def root_integer(self, n: int) -> int:
        """Integer formed by the first ``n`` digits."""
        self._ensure(n)
        return int(self._root >> (self._digits - n))


class RationalSource(DigitSource):
    """Digits of p/q by exact long division; dyadic values end in zeros."""

    kind = "rational"

    def __init__(self, p: int, q: int):
        super().__init__()
        p, q = int(p), int(q)
        if q == 0:
            raise ZeroDivisionError("q must be nonzero")
        if p <= 0 or q < 0:
            raise ValueError("rational source needs p >= 1 and q >= 1")
        g = math.gcd(p, q)
        self.p, self.q = p // g, q // g
        # scale so that q <= num < 2q; first digit is then 1
        num, den = self.p, self.q
        shift = den.bit_length() - num.bit_length()
        if shift > 0:
            num <<= shift
        else:
            den <<= -shift
        if num < den:
            num <<= 1
        self._den = den
        self._rem = num - den
        self._started = False

    @property
    def params(self) -> dict:
        return {"p": self.p, "q": self.q}

    def _extend(self, total: int) -> None:
        target = self._grow_target(total)
        blocks = []
        have = len(self._cache)
        if not self._started:
            blocks.append(np.ones(1, dtype=np.uint8))
            self._started = True
            have += 1
        width = target - have
        if width > 0:
            shifted = self._rem << width
            quotient, self._rem = divmod(shifted, self._den)
            blocks.append(_int_to_bits(quotient, width))
        self._cache = np.concatenate([self._cache, *blocks])


class ChampernowneSource(DigitSource):
    """Concatenation of 1, 10, 11, 100, ... (positive integers in binary)."""

    kind = "champernowne2"

    def __init__(self):
        super().__init__()
        self._next = 1

    def _extend(self, total: int) -> None:
        target = self._grow_target(total)
        pieces = [self._cache]
        have = len(self._cache)
        while have < target:
            width = self._next.bit_length()
            group_end = 1 << width
            count = min(group_end - self._next, -(-(target - have) // width))
            values = np.arange(self._next, self._next + count, dtype=np.uint64)
            shifts = np.arange(width - 1, -1, -1, dtype=np.uint64)
            bits = ((values[:, None] >> shifts) & np.uint64(1)).astype(np.uint8).ravel()
            pieces.append(bits)
            have += bits.size
            self._next += count
        self._cache = np.concatenate(pieces)


class CopelandErdosSource(DigitSource):
    """Concatenation of the primes written in binary: 10, 11, 101, 111, ..."""

    kind = "copeland_erdos2"

    def __init__(self):
        super().__init__()
        self._primes = segmented_primes()

    def _extend(self, total: int) -> None:
        target = self._grow_target(total)
        pieces = [self._cache]
        have = len(self._cache)
        while have < target:
            bits = _concat_binary(next(self._primes))
            pieces.append(bits)
            have += bits.size
        self._cache = np.concatenate(pieces)


class ConstantOnesSource(DigitSource):
    kind = "ones"

    def _extend(self, total: int) -> None:
        self._cache = np.ones(self._grow_target(total), dtype=np.uint8)


class AlternatingSource(DigitSource):
    """1, 0, 1, 0, ..."""

    kind = "alternating"

    def _extend(self, total: int) -> None:
        target = self._grow_target(total)
        self._cache = (np.arange(target) % 2 == 0).astype(np.uint8)


class BufferSource(DigitSource):
    """Finite source over a :class:`BitBuffer`, optionally loaded from a file."""

    kind = "file"

    def __init__(self, buffer: BitBuffer | None = None, path=None):
        super().__init__()
        if buffer is None:
            if path is None:
                raise ValueError("need a buffer or a path")
            buffer = read_bits(path)
        self.buffer = buffer
        self.path = None if path is None else os.fspath(path)
        self._cache = buffer.bits()

    @property
    def params(self) -> dict:
        return {"path": self.path} if self.path else {"length": len(self.buffer)}

    @property
    def available(self) -> int:
        return len(self.buffer)

    def _extend(self, total: int) -> None:
        raise InsufficientDigitsError(total, len(self.buffer))

    def fresh(self) -> "BufferSource":
        return BufferSource(self.buffer, self.path)


_KINDS = {
    "sqrt": SqrtSource,
    "rational": RationalSource,
    "champernowne2": ChampernowneSource,
    "copeland_erdos2": CopelandErdosSource,
    "ones": ConstantOnesSource,
    "alternating": AlternatingSource,
    "file": BufferSource,
}


def make_source(kind: str, **params) -> DigitSource:
    try:
        cls = _KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown source kind {kind!r}") from None
    if kind == "file" and "length" in params:
        raise ValueError("an in-memory buffer source cannot be rebuilt from parameters")
    return cls(**params)


def parse_source_spec(spec: str) -> DigitSource:
    """Build a source from a compact string.

    Accepted forms: ``sqrt:2``, ``rational:1/3``, ``champernowne2``,
    ``copeland_erdos2``, ``ones``, ``alternating``, ``file:path.nbits``.
    """
    kind, _, arg = spec.partition(":")
    kind = kind.strip().replace("-", "_")
    if kind == "sqrt":
        return SqrtSource(int(arg))
    if kind == "rational":
        frac = arg.split("/")
        if len(frac) != 2:
            raise ValueError(f"rational spec must look like p/q, got {arg!r}")
        return RationalSource(int(frac[0]), int(frac[1]))
    if kind == "file":
        return BufferSource(path=arg)
    if arg:
        raise ValueError(f"source kind {kind!r} takes no argument")
    return make_source(kind)


# --------------------------------------------------------------------------
# one-shot generators


def _take(source: DigitSource, n: int) -> BitBuffer:
    if n < 1:
        raise ValueError("digit count must be at least 1")
    return BitBuffer.from_bits(source.read(n))


def sqrt_digits(m: int, n: int) -> BitBuffer:
    """First ``n`` binary digits of sqrt(m), from the leading 1.

    >>> sqrt_digits(2, 4).to_string()
    '1011'
    """
    return _take(SqrtSource(m), n)


def rational_digits(p: int, q: int, n: int) -> BitBuffer:
    """First ``n`` binary digits of p/q, from the leading 1.

    >>> rational_digits(1, 3, 6).to_string()
    '101010'
    """
    return _take(RationalSource(p, q), n)


def champernowne2_digits(n: int) -> BitBuffer:
    return _take(ChampernowneSource(), n)


def copeland_erdos2_digits(n: int) -> BitBuffer:
    return _take(CopelandErdosSource(), n)


# --------------------------------------------------------------------------
# .nbits file format


def write_bits(buffer: BitBuffer, destination: PathOrFile) -> None:
    """Write ``buffer`` as an ``.nbits`` stream.

    Layout: ``b"NBITS"``, version byte, u64 little-endian bit count, then the
    packed payload.
    """
    header = HEADER.pack(MAGIC, FORMAT_VERSION, len(buffer))
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "wb") as fh:
            fh.write(header)
            fh.write(buffer.data)
    else:
        destination.write(header)
        destination.write(buffer.data)


def read_bits(source: PathOrFile) -> BitBuffer:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            raw = fh.read()
    elif isinstance(source, (bytes, bytearray)):
        raw = bytes(source)
    else:
        raw = source.read()
    if len(raw) < 6 or raw[:5] != MAGIC:
        raise BadMagicError("not an NBITS stream (bad magic)")
    if raw[5] != FORMAT_VERSION:
        raise UnsupportedVersionError(f"unsupported NBITS version {raw[5]}")
    if len(raw) < HEADER.size:
        raise TruncatedPayloadError("header is truncated")
    _, _, length = HEADER.unpack_from(raw)
    need = (length + 7) // 8
    payload = raw[HEADER.size:]
    if len(payload) < need:
        raise TruncatedPayloadError(
            f"payload holds {len(payload)} bytes, header promises {need}"
        )
    if len(payload) > need:
        raise NbitsFormatError(f"{len(payload) - need} trailing bytes after payload")
    return BitBuffer(payload, length)


def write_sidecar(path, source: DigitSource | None = None, *, kind=None,
                  parameters=None, created: datetime | None = None) -> str:
    """Write ``<path>.json`` describing how ``path`` was generated."""
    if source is not None:
        kind = source.kind
        parameters = source.params
    created = created or datetime.now(timezone.utc)
    meta = {
        "kind": kind,
        "parameters": parameters or {},
        "generator_version": GENERATOR_VERSION,
        "created": created.isoformat(),
    }
    sidecar = os.fspath(path) + ".json"
    with open(sidecar, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return sidecar
