"""Streaming statistics over digit prefixes.

Series statistics (ones ratio, angle to the all-ones vector, norm ratio,
balance gap) share one incremental popcount pass. The ns-ratio series works
on exact integer representatives and converts to floating point once, at
the end. Block histograms count every length-``k`` pattern over overlapping
or disjoint windows and can be split across threads without changing the
result.

No statistic here asserts a limit; each :class:`SeriesReport` carries its
finite checkpoints plus tail diagnostics.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .digits import (
    BitBuffer,
    BufferSource,
    DigitSource,
    SqrtSource,
    isqrt_newton,
)

__all__ = [
    "SCHEMA_VERSION",
    "SeriesReport",
    "BlockHistogram",
    "log2_checkpoints",
    "linear_checkpoints",
    "popcount_series",
    "ones_ratio_series",
    "angle_series",
    "norm_ratio_series",
    "balance_gap_series",
    "series_from_counts",
    "ns_ratio_series",
    "block_histogram",
    "normality_deviation",
    "sqrt_of_ratio",
]

SCHEMA_VERSION = 1
MAX_BLOCK = 24
READ_CHUNK = 1 << 20


@dataclass
class SeriesReport:
    """A statistic sampled at increasing prefix lengths."""

    statistic: str
    checkpoints: list[tuple[int, float]]
    source: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.checkpoints = [(int(n), float(v)) for n, v in self.checkpoints]
        ns = [n for n, _ in self.checkpoints]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("checkpoint n values must be strictly increasing")
        if not all(math.isfinite(v) for _, v in self.checkpoints):
            raise ValueError("series values must be finite")

    @property
    def ns(self) -> np.ndarray:
        return np.array([n for n, _ in self.checkpoints], dtype=np.int64)

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.checkpoints], dtype=np.float64)

    def value_at(self, n: int) -> float:
        for m, v in self.checkpoints:
            if m == n:
                return v
        raise KeyError(n)

    def _tail(self) -> list[tuple[int, float]]:
        if not self.checkpoints:
            return []
        last = self.checkpoints[-1][0]
        return [(n, v) for n, v in self.checkpoints if n * 10 >= last]

    def tail_slope(self) -> float | None:
        """Least-squares slope of value against log10(n) over the last decade."""
        tail = self._tail()
        if len(tail) < 2:
            return None
        x = np.log10([n for n, _ in tail])
        y = np.array([v for _, v in tail])
        return float(np.polyfit(x, y, 1)[0])

    def tail_amplitude(self) -> float | None:
        """max - min over the last decade of checkpoints."""
        tail = self._tail()
        if not tail:
            return None
        vals = [v for _, v in tail]
        return float(max(vals) - min(vals))

    def to_dict(self) -> dict:
        out = {
            "statistic": self.statistic,
            "source": self.source,
            "checkpoints": [{"n": n, "value": v} for n, v in self.checkpoints],
            "tail": {"slope": self.tail_slope(), "amplitude": self.tail_amplitude()},
        }
        if self.notes:
            out["notes"] = list(self.notes)
        out.update(self.extra)
        return out

    def to_json(self) -> str:
        return json.dumps({"schema": SCHEMA_VERSION, **self.to_dict()}, indent=2)

    def csv_rows(self) -> list[list]:
        return [[self.statistic, n, repr(v)] for n, v in self.checkpoints]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["statistic", "n", "value"])
        writer.writerows(self.csv_rows())
        return buf.getvalue()


def log2_checkpoints(limit: int) -> list[int]:
    """Powers of two 1, 2, 4, ... not exceeding ``limit``."""
    if limit < 1:
        raise ValueError("limit must be at least 1")
    return [1 << e for e in range(limit.bit_length())]


def linear_checkpoints(limit: int, count: int) -> list[int]:
    """``count`` evenly spaced prefix lengths ending at ``limit``."""
    if count < 1 or limit < 1:
        raise ValueError("need a positive limit and count")
    pts = np.linspace(limit / count, limit, count).round().astype(np.int64)
    return sorted({int(p) for p in pts if p >= 1})


def _as_source(source) -> DigitSource:
    if isinstance(source, DigitSource):
        return source
    if isinstance(source, BitBuffer):
        return BufferSource(source)
    return BufferSource(BitBuffer.from_bits(source))


def _describe(source) -> dict:
    if isinstance(source, DigitSource):
        return source.describe()
    if isinstance(source, BitBuffer):
        return {"kind": "buffer", "parameters": {"length": len(source)}}
    return {"kind": "array", "parameters": {}}


def _check_increasing(checkpoints: Sequence[int]) -> list[int]:
    pts = [int(n) for n in checkpoints]
    if not pts:
        raise ValueError("no checkpoints given")
    if pts[0] < 1:
        raise ValueError("checkpoints must be positive")
    if any(b <= a for a, b in zip(pts, pts[1:])):
        raise ValueError("checkpoints must be strictly increasing")
    return pts


def popcount_series(source, checkpoints: Sequence[int]) -> list[tuple[int, int]]:
    """Ones count of each prefix, accumulated in a single streaming pass.

    A :class:`DigitSource` is consumed from its current position.
    """
    pts = _check_increasing(checkpoints)
    src = _as_source(source)
    out = []
    done = 0
    ones = 0
    for n in pts:
        remaining = n - done
        while remaining:
            step = min(remaining, READ_CHUNK)
            ones += int(np.count_nonzero(src.read(step)))
            remaining -= step
        done = n
        out.append((n, ones))
    return out


def ones_ratio_series(source, checkpoints: Sequence[int]) -> SeriesReport:
    counts = popcount_series(source, checkpoints)
    return SeriesReport("ones_ratio", [(n, c / n) for n, c in counts], _describe(source))


def angle_series(source, checkpoints: Sequence[int]) -> SeriesReport:
    counts = popcount_series(source, checkpoints)
    points, notes = [], []
    for n, c in counts:
        if c == 0:
            notes.append(f"n={n}: zero prefix, angle undefined")
            continue
        points.append((n, math.acos(math.sqrt(c / n))))
    return SeriesReport("angle", points, _describe(source), notes)


def norm_ratio_series(source, checkpoints: Sequence[int]) -> SeriesReport:
    counts = popcount_series(source, checkpoints)
    return SeriesReport(
        "norm_ratio", [(n, math.sqrt(2 * c / n)) for n, c in counts], _describe(source)
    )


def balance_gap_series(source, checkpoints: Sequence[int]) -> SeriesReport:
    counts = popcount_series(source, checkpoints)
    return SeriesReport(
        "balance_gap", [(n, abs(2 * c - n) / n) for n, c in counts], _describe(source)
    )


def series_from_counts(counts: Sequence[tuple[int, int]], source: dict) -> dict[str, SeriesReport]:
    """All four popcount-derived series from one pass of counts."""
    angle_pts = [(n, math.acos(math.sqrt(c / n))) for n, c in counts if c]
    notes = [f"n={n}: zero prefix, angle undefined" for n, c in counts if not c]
    return {
        "ones": SeriesReport("ones_ratio", [(n, c / n) for n, c in counts], source),
        "angle": SeriesReport("angle", angle_pts, source, notes),
        "norm": SeriesReport("norm_ratio", [(n, math.sqrt(2 * c / n)) for n, c in counts], source),
        "balance": SeriesReport("balance_gap", [(n, abs(2 * c - n) / n) for n, c in counts], source),
    }


def sqrt_of_ratio(num: int, den: int, precision: int = 64) -> float:
    """sqrt(num / den) from exact integers, rounded to a double at the end.

    The quotient is scaled by an even power of two so the integer square
    root carries ``precision`` significant bits; the exponent is halved in
    integer form, which keeps huge operands (2**4096 and beyond) finite.
    """
    if num < 0 or den <= 0:
        raise ValueError("need num >= 0 and den > 0")
    if num == 0:
        return 0.0
    shift = 2 * precision + 2 - (num.bit_length() - den.bit_length())
    shift += shift & 1
    scaled = (num << shift) // den if shift >= 0 else num // (den << -shift)
    root = isqrt_newton(scaled)
    return math.ldexp(float(root), -shift // 2)


def ns_ratio_series(source, n_range: Iterable[int]) -> SeriesReport:
    """sqrt(x*(n)) / sqrt(2**n / 2) for each n, from exact integers.

    ``x*(n)`` is the integer representative of the n-digit prefix, so the
    value is sqrt(x*(n) / 2**(n-1)). Alongside it the report carries
    ``proportion_predicted``: the norm obtained by scaling sqrt(2**n - 1) in
    proportion to the represented number, divided by the same sqrt(2**n / 2).
    For a square-root source the represented number is the exact real
    ``2**(n-1-a) * sqrt(m)``; otherwise the integer representative stands in.
    """
    pts = _check_increasing(list(n_range))
    src = _as_source(source)
    top = pts[-1]
    bits = src.read(top)
    packed = np.packbits(bits).tobytes()
    whole = int.from_bytes(packed, "big") >> ((-top) % 8)

    exact, predicted = [], []
    for n in pts:
        x_star = whole >> (top - n)
        half = 1 << (n - 1)
        exact.append((n, sqrt_of_ratio(x_star, half)))
        if isinstance(src, SqrtSource):
            # (2**(n-1-a) * sqrt(m))**2, exactly
            e = 2 * (n - 1 - src._lead)
            real_sq_num = src.m << e if e >= 0 else src.m
            real_sq_den = 1 if e >= 0 else 1 << -e
        else:
            real_sq_num, real_sq_den = x_star * x_star, 1
        den = ((1 << n) - 1) * half * real_sq_den
        predicted.append((n, sqrt_of_ratio(real_sq_num, den)))

    meta = _describe(source)
    report = SeriesReport("ns_ratio", exact, meta)
    report.extra["proportion_predicted"] = [{"n": n, "value": v} for n, v in predicted]
    report.extra["proportion_basis"] = (
        "exact real" if isinstance(src, SqrtSource) else "integer representative"
    )
    report.extra["claimed_limit"] = 1.0
    return report


# --------------------------------------------------------------------------
# block statistics


@dataclass(eq=False)
class BlockHistogram:
    """Counts of every length-``k`` pattern, indexed by the pattern's integer value."""

    k: int
    mode: str
    counts: np.ndarray
    windows: int

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (1 << self.k,):
            raise ValueError(f"expected {1 << self.k} counts for k={self.k}")
        if int(self.counts.sum()) != self.windows:
            raise ValueError("counts do not sum to the window count")

    def count(self, pattern: str) -> int:
        if len(pattern) != self.k:
            raise ValueError(f"pattern length {len(pattern)} != k={self.k}")
        return int(self.counts[int(pattern, 2)])

    def as_dict(self) -> dict[str, int]:
        return {format(i, f"0{self.k}b"): int(c) for i, c in enumerate(self.counts)}

    def frequencies(self) -> np.ndarray:
        return self.counts / self.windows

    def __add__(self, other: "BlockHistogram") -> "BlockHistogram":
        if not isinstance(other, BlockHistogram):
            return NotImplemented
        if (self.k, self.mode) != (other.k, other.mode):
            raise ValueError("cannot merge histograms with different k or mode")
        return BlockHistogram(self.k, self.mode, self.counts + other.counts,
                              self.windows + other.windows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BlockHistogram):
            return NotImplemented
        return (self.k, self.mode, self.windows) == (other.k, other.mode, other.windows) \
            and np.array_equal(self.counts, other.counts)

    def marginalize(self) -> "BlockHistogram":
        """Histogram of the leading ``k-1`` bits of each window."""
        if self.k < 2:
            raise ValueError("cannot marginalize a k=1 histogram")
        return BlockHistogram(self.k - 1, self.mode,
                              self.counts.reshape(-1, 2).sum(axis=1), self.windows)

    def to_dict(self) -> dict:
        return {"k": self.k, "mode": self.mode, "windows": self.windows,
                "counts": self.as_dict()}

    def csv_rows(self) -> list[list]:
        return [[self.k, self.mode, p, c] for p, c in self.as_dict().items()]


def _bits_array(bits) -> np.ndarray:
    if isinstance(bits, BitBuffer):
        return bits.bits()
    if isinstance(bits, DigitSource):
        raise TypeError("pass a BitBuffer or array; sources are stateful")
    return np.asarray(bits, dtype=np.uint8).ravel()


def _overlapping_counts(bits: np.ndarray, k: int) -> np.ndarray:
    m = bits.size - k + 1
    codes = np.zeros(m, dtype=np.uint32)
    for j in range(k):
        codes <<= 1
        codes |= bits[j:j + m]
    return np.bincount(codes, minlength=1 << k).astype(np.int64)


def _disjoint_counts(bits: np.ndarray, k: int) -> np.ndarray:
    m = bits.size // k
    weights = np.left_shift(1, np.arange(k - 1, -1, -1)).astype(np.uint32)
    codes = bits[: m * k].reshape(m, k).astype(np.uint32) @ weights
    return np.bincount(codes, minlength=1 << k).astype(np.int64)


def _window_splits(windows: int, parts: int) -> list[tuple[int, int]]:
    edges = np.linspace(0, windows, parts + 1).round().astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def block_histogram(bits, k: int, mode: str = "overlapping", threads: int = 1) -> BlockHistogram:
    """Count all length-``k`` blocks of ``bits``.

    Overlapping mode slides one position at a time (``n-k+1`` windows);
    disjoint mode tiles ``floor(n/k)`` windows. With ``threads > 1`` the
    windows are split into contiguous ranges, each range reading ``k-1``
    extra bits from its right neighbour, and the partial counts are summed.
    The result does not depend on ``threads``.
    """
    if not 1 <= k <= MAX_BLOCK:
        raise ValueError(f"k must be in [1, {MAX_BLOCK}], got {k}")
    if mode not in ("overlapping", "disjoint"):
        raise ValueError(f"unknown mode {mode!r}")
    arr = _bits_array(bits)
    n = arr.size
    if k > n:
        raise ValueError(f"block length k={k} exceeds stream length n={n}")
    if mode == "overlapping":
        windows = n - k + 1
        span = 1
    else:
        windows = n // k
        span = k

    def work(rng: tuple[int, int]) -> np.ndarray:
        a, b = rng
        piece = arr[a * span:(b - 1) * span + k]
        if mode == "overlapping":
            return _overlapping_counts(piece, k)
        return _disjoint_counts(piece, k)

    splits = _window_splits(windows, max(1, int(threads)))
    if len(splits) == 1:
        counts = work(splits[0])
    else:
        with ThreadPoolExecutor(max_workers=len(splits)) as pool:
            counts = np.sum(list(pool.map(work, splits)), axis=0)
    return BlockHistogram(k, mode, counts, windows)


def normality_deviation(h: BlockHistogram) -> dict[str, float]:
    """Largest absolute frequency deviation from 2**-k, and Pearson chi-square."""
    if h.windows < 1:
        raise ValueError("histogram has no windows")
    expected = h.windows / (1 << h.k)
    freq = h.counts / h.windows
    max_abs_dev = float(np.max(np.abs(freq - 2.0 ** -h.k)))
    chi_square = float(np.sum((h.counts - expected) ** 2) / expected)
    return {"max_abs_dev": max_abs_dev, "chi_square": chi_square}
