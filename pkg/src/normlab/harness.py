"""Finite-scale checks of the prefix-vector identities.

Each claim is a predicate over one prefix vector. :func:`verify_claim` runs
it over every vector of length ``1..min(n_max, 12)`` and, beyond that, over
``trials`` seeded random vectors. Checkers call the library through an
:class:`Ops` bundle so that tests can swap in a deliberately broken
operation (see :data:`MUTANTS`) and confirm the checker notices.

The rebalancing construction distributes the ones of a non-standard vector
across its blocks so every block carries (as nearly as integers allow) the
global proportion ``x* / (2**n - 1)``.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import vecrep
from .digits import SqrtSource
from .vecrep import PrefixVector

__all__ = [
    "CLAIMS",
    "EXHAUSTIVE_MAX",
    "Ops",
    "DEFAULT_OPS",
    "MUTANTS",
    "VerificationResult",
    "RebalancedNs",
    "verify_claim",
    "verify_all",
    "rebalance_permutation",
    "ordered_sequence_draw",
]

EXHAUSTIVE_MAX = 12


@dataclass(frozen=True)
class RebalancedNs:
    """Ones allotted to each block of a non-standard vector after rebalancing.

    Within every block the canonical layout puts the ones first.
    """

    block_sizes: tuple[int, ...]
    block_ones: tuple[int, ...]

    @property
    def n(self) -> int:
        return len(self.block_sizes)

    @property
    def total_ones(self) -> int:
        return sum(self.block_ones)

    def proportions(self) -> list[float]:
        return [o / s for o, s in zip(self.block_ones, self.block_sizes)]

    def entries(self) -> np.ndarray:
        """Materialized rebalanced vector (small n only)."""
        if self.n > vecrep.NS_MATERIALIZE_CAP:
            raise ValueError("too large to materialize")
        parts = [
            np.concatenate([np.ones(o, dtype=np.uint8), np.zeros(s - o, dtype=np.uint8)])
            for s, o in zip(self.block_sizes, self.block_ones)
        ]
        return np.concatenate(parts)


def _round_half_up(num: int, den: int) -> int:
    return (2 * num + den) // (2 * den)


def _rebalance(v: PrefixVector, rounding=_round_half_up, drift_correction: bool = True) -> RebalancedNs:
    n = v.n
    x_star = vecrep.integer_representative(v)
    total = (1 << n) - 1
    sizes = [1 << (n - 1 - i) for i in range(n)]
    ones = [rounding(s * x_star, total) for s in sizes]
    drift = x_star - sum(ones)
    if drift_correction and drift:
        step = 1 if drift > 0 else -1
        # largest block first; only blocks whose rounding went the other way
        for i in range(n):
            if drift == 0:
                break
            residual = sizes[i] * x_star - ones[i] * total
            if residual * step > 0:
                ones[i] += step
                drift -= step
    return RebalancedNs(tuple(sizes), tuple(ones))


def rebalance_permutation(v: PrefixVector) -> RebalancedNs:
    """Spread the ``x*`` ones of ``v``'s non-standard vector evenly over its blocks.

    Block ``i`` (size ``2**(n-1-i)``) receives its proportional share
    ``size * x* / (2**n - 1)`` rounded half up. Rounding drift is repaid one
    unit at a time from the largest block down, touching only blocks that
    were rounded against the direction of the drift, so each block ends
    within one unit of its share and the total stays ``x*``. (With
    half-up rounding the drift is in fact always zero: ``x*/(2**n - 1)`` is
    the repeating binary fraction of ``v`` itself, and the rounded shares
    telescope back to ``x*``.)

    This is one representative of many valid rebalancings; the choice is
    deterministic.
    """
    if v.n > 40:
        raise ValueError("rebalancing supports n <= 40")
    return _rebalance(v)


def ordered_sequence_draw(r: RebalancedNs, policy="uniform", seed: int = 0,
                          draws: int | None = None) -> np.ndarray:
    """Draw element ``i`` of a length-n sequence from rebalanced block ``i``.

    ``policy`` is either an integer index, taken inside every block under
    the ones-first layout, or ``"uniform"``, which picks a uniformly random
    position in each block (so ``P(out[i] == 1) = block_ones[i] / block_sizes[i]``).
    With ``draws`` set, returns a ``(draws, n)`` array of independent draws.
    """
    ones = np.array(r.block_ones, dtype=np.float64)
    sizes = np.array(r.block_sizes, dtype=np.float64)
    if isinstance(policy, (int, np.integer)) and not isinstance(policy, bool):
        idx = int(policy)
        bad = [i + 1 for i, s in enumerate(r.block_sizes) if not 0 <= idx < s]
        if bad:
            raise IndexError(f"index {idx} out of range for blocks {bad}")
        row = np.array([1 if idx < o else 0 for o in r.block_ones], dtype=np.uint8)
        return row if draws is None else np.tile(row, (draws, 1))
    if policy != "uniform":
        raise ValueError(f"unknown policy {policy!r}")
    rng = np.random.default_rng(seed)
    shape = (r.n,) if draws is None else (draws, r.n)
    # uniform position p < size lands on a one iff p < ones
    pos = np.floor(rng.random(shape) * sizes)
    return (pos < ones).astype(np.uint8)


# --------------------------------------------------------------------------
# claim checkers


@dataclass(frozen=True)
class Ops:
    integer_representative: Callable = vecrep.integer_representative
    ns_vector: Callable = vecrep.ns_vector
    ns_profile: Callable = vecrep.ns_profile
    complement: Callable = vecrep.complement
    norm_squared: Callable = vecrep.norm_squared
    angle_to_ones: Callable = vecrep.angle_to_ones
    rebalance: Callable = rebalance_permutation
    leading_digits: Callable = None  # set below

    def replace(self, **changes) -> "Ops":
        return dataclasses.replace(self, **changes)


def _leading_digits(value: int, n: int) -> PrefixVector:
    """First n binary digits of a positive integer (zero-padded if shorter)."""
    width = value.bit_length()
    if width >= n:
        value >>= width - n
    else:
        value <<= n - width
    return vecrep.from_integer(value, n)


DEFAULT_OPS = Ops(leading_digits=_leading_digits)


def _check_propnorm(v: PrefixVector, ops: Ops) -> bool:
    x_star = ops.integer_representative(v)
    if v.n <= vecrep.NS_MATERIALIZE_CAP:
        entries = ops.ns_vector(v).entries.astype(np.int64)
        if int(entries @ entries) != x_star:
            return False
    # implicit form: block i contributes its length 2**(n-1-i) when bit i is set
    implicit = sum(1 << (v.n - 1 - int(i)) for i in np.flatnonzero(v.bits))
    return implicit == x_star and ops.ns_profile(v).x_star == x_star


def _check_norme(v: PrefixVector, ops: Ops) -> bool:
    c = ops.complement(v)
    if c.n != v.n or np.any(v.bits & c.bits):
        return False
    return ops.norm_squared(v) + ops.norm_squared(c) == v.n


def _check_ns_pythagoras(v: PrefixVector, ops: Ops) -> bool:
    prof = ops.ns_profile(v)
    comp = ops.integer_representative(ops.complement(v))
    if prof.complement_star != comp:
        return False
    return prof.x_star + prof.complement_star == (1 << v.n) - 1


def _check_scale_invariance(v: PrefixVector, ops: Ops) -> bool:
    # every number 2**p * x whose leading digits are v maps back to v
    if v.bits[0] == 0:
        return True
    x = ops.integer_representative(v)
    for p in range(0, 4):
        scaled = (x << p) | ((1 << p) - 1 if p else 0)
        if ops.leading_digits(scaled, v.n) != v:
            return False
    return True


def _check_teo1_identity(v: PrefixVector, ops: Ops) -> bool:
    if v.popcount == 0:
        try:
            ops.angle_to_ones(v)
        except ValueError:
            return True
        return False
    ratio = v.popcount / v.n
    cos_sq = math.cos(ops.angle_to_ones(v)) ** 2
    norm_ratio_sq = ops.norm_squared(v) / (v.n / 2)
    return abs(cos_sq - ratio) <= 1e-12 and abs(norm_ratio_sq - 2 * ratio) <= 1e-12


def _check_rebalance(v: PrefixVector, ops: Ops) -> bool:
    r = ops.rebalance(v)
    x_star = ops.integer_representative(v)
    total = (1 << v.n) - 1
    if r.total_ones != x_star:
        return False
    if any(not 0 <= o <= s for o, s in zip(r.block_ones, r.block_sizes)):
        return False
    # |ones/size - x*/total| <= 1/size, i.e. |ones*total - size*x*| <= total
    off = sum(abs(o * total - s * x_star) > total for o, s in zip(r.block_ones, r.block_sizes))
    if off > 1:
        return False
    if v.n <= EXHAUSTIVE_MAX:
        # same multiset of entries as the unpermuted vector
        return int(r.entries().sum()) == int(ops.ns_vector(v).entries.sum())
    return True


CLAIMS: dict[str, Callable[[PrefixVector, Ops], bool]] = {
    "propnorm": _check_propnorm,
    "norme": _check_norme,
    "ns_pythagoras": _check_ns_pythagoras,
    "scale_invariance": _check_scale_invariance,
    "teo1_identity": _check_teo1_identity,
    "rebalance": _check_rebalance,
}

# one broken operation per claim; each checker must reject its mutant
MUTANTS: dict[str, Ops] = {
    "propnorm": DEFAULT_OPS.replace(
        integer_representative=lambda v: int(sum((i + 1) * int(b) for i, b in enumerate(v.bits)))
    ),
    "norme": DEFAULT_OPS.replace(
        complement=lambda v: vecrep.PrefixVector(np.concatenate([1 - v.bits[:-1], v.bits[-1:]]))
    ),
    "ns_pythagoras": DEFAULT_OPS.replace(
        ns_profile=lambda v: vecrep.NsProfile(
            v.n, vecrep.integer_representative(v), (1 << v.n) - vecrep.integer_representative(v)
        )
    ),
    "scale_invariance": DEFAULT_OPS.replace(
        leading_digits=lambda value, n: vecrep.from_integer(value & ((1 << n) - 1), n)
    ),
    "teo1_identity": DEFAULT_OPS.replace(
        angle_to_ones=lambda v: math.acos(v.popcount / v.n)
    ),
    "rebalance": DEFAULT_OPS.replace(
        rebalance=lambda v: _rebalance(v, rounding=lambda a, b: a // b, drift_correction=False)
    ),
}


@dataclass
class VerificationResult:
    claim: str
    instances: int
    failures: list = field(default_factory=list)
    mode: str = "exhaustive"
    seed: int | None = None
    n_max: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "claim": self.claim,
            "passed": self.passed,
            "instances": self.instances,
            "failures": self.failures,
            "mode": self.mode,
            "seed": self.seed,
            "n_max": self.n_max,
        }


def _all_vectors(n: int):
    for combo in itertools.product((0, 1), repeat=n):
        yield PrefixVector(np.array(combo, dtype=np.uint8))


def verify_claim(claim: str, n_max: int = EXHAUSTIVE_MAX, trials: int = 1000,
                 seed: int = 0, ops: Ops | None = None,
                 max_failures: int = 20) -> VerificationResult:
    """Check ``claim`` exhaustively for n <= 12 and on seeded random vectors above.

    Random vectors for ``12 < n <= n_max`` draw ``n`` uniformly and then each
    bit independently; instance ``j`` uses ``seed`` and ``j`` to derive its
    generator, so a run replays exactly. ``scale_invariance`` additionally
    checks the sqrt(2) source against the exact root of ``2 * 4**(n-1)`` for
    every ``n <= n_max``.
    """
    if claim not in CLAIMS:
        raise KeyError(f"unknown claim {claim!r}; choose from {sorted(CLAIMS)}")
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    check = CLAIMS[claim]
    ops = ops or DEFAULT_OPS
    failures: list[str] = []
    instances = 0

    def run(v: PrefixVector) -> None:
        nonlocal instances
        instances += 1
        if not check(v, ops) and len(failures) < max_failures:
            failures.append(v.to_string())

    for n in range(1, min(n_max, EXHAUSTIVE_MAX) + 1):
        for v in _all_vectors(n):
            run(v)

    mode = "exhaustive"
    randomized = n_max > EXHAUSTIVE_MAX
    if randomized:
        if trials < 1:
            raise ValueError("trials must be at least 1 for n_max > 12")
        mode = f"exhaustive+randomized(seed={seed})"
        # rebalancing is defined up to n = 40
        top_n = min(n_max, 40) if claim == "rebalance" else n_max
        for j in range(trials):
            rng = np.random.default_rng([seed, j])
            n = int(rng.integers(EXHAUSTIVE_MAX + 1, top_n + 1))
            run(PrefixVector(rng.integers(0, 2, n, dtype=np.uint8)))

    if claim == "scale_invariance":
        prefix = SqrtSource(2).prefix(n_max)
        for n in range(1, n_max + 1):
            instances += 1
            # floor(2**(n-1) * sqrt(2)), scaled by a further 2**3
            expect = ops.leading_digits(math.isqrt(2 << (2 * (n - 1))) << 3, n)
            if not np.array_equal(prefix[:n], expect.bits) and len(failures) < max_failures:
                failures.append(f"sqrt2 n={n}")

    return VerificationResult(claim, instances, failures, mode,
                              seed if randomized else None, n_max)


def verify_all(n_max: int = EXHAUSTIVE_MAX, trials: int = 1000, seed: int = 0) -> list[VerificationResult]:
    return [verify_claim(c, n_max, trials, seed) for c in CLAIMS]
