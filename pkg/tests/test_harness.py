import itertools
from fractions import Fraction

import numpy as np
import pytest

from normlab.harness import (
    CLAIMS,
    MUTANTS,
    RebalancedNs,
    ordered_sequence_draw,
    rebalance_permutation,
    verify_claim,
)
from normlab.vecrep import PrefixVector, as_prefix, integer_representative, ns_vector


def greedy_oracle(bits):
    """Rebalance by exact Fractions: nearest share, drift repaid largest block first."""
    n = len(bits)
    x = int("".join(map(str, bits)), 2)
    total = 2**n - 1
    sizes = [2 ** (n - 1 - i) for i in range(n)]
    shares = [Fraction(s * x, total) for s in sizes]
    ones = [int(sh + Fraction(1, 2)) for sh in shares]  # half up; shares are >= 0
    drift = x - sum(ones)
    for i in range(n):
        if drift == 0:
            break
        if drift > 0 and shares[i] > ones[i]:
            ones[i] += 1
            drift -= 1
        elif drift < 0 and shares[i] < ones[i]:
            ones[i] -= 1
            drift += 1
    return ones


def test_rebalance_example_101():
    r = rebalance_permutation(as_prefix("101"))
    assert r.block_sizes == (4, 2, 1)
    assert r.block_ones == (3, 1, 1)
    assert r.proportions() == [0.75, 0.5, 1.0]
    assert r.total_ones == 5


def test_rebalance_all_ones_fixed_point():
    r = rebalance_permutation(as_prefix("111"))
    assert r.block_ones == r.block_sizes


def test_rebalance_zero():
    assert rebalance_permutation(as_prefix("000")).block_ones == (0, 0, 0)


def test_rebalance_matches_fraction_oracle_exhaustively():
    for n in range(1, 11):
        for combo in itertools.product((0, 1), repeat=n):
            r = rebalance_permutation(PrefixVector(np.array(combo, dtype=np.uint8)))
            assert list(r.block_ones) == greedy_oracle(combo)


def test_rebalance_preserves_multiset():
    v = as_prefix("1101001")
    r = rebalance_permutation(v)
    assert sorted(r.entries().tolist()) == sorted(ns_vector(v).entries.tolist())


def test_rebalance_large_n_uses_integers_only():
    rng = np.random.default_rng(5)
    v = PrefixVector(rng.integers(0, 2, 40, dtype=np.uint8))
    r = rebalance_permutation(v)
    x = integer_representative(v)
    total = 2**40 - 1
    assert r.total_ones == x
    off = [abs(o * total - s * x) > total for o, s in zip(r.block_ones, r.block_sizes)]
    assert sum(off) <= 1
    with pytest.raises(ValueError):
        rebalance_permutation(PrefixVector(np.ones(41, dtype=np.uint8)))


def test_draw_index_zero_takes_leading_entries():
    r = RebalancedNs((4, 2, 1), (3, 1, 1))
    assert ordered_sequence_draw(r, 0).tolist() == [1, 1, 1]


def test_draw_index_out_of_range():
    r = RebalancedNs((4, 2, 1), (3, 1, 1))
    with pytest.raises(IndexError, match=r"\[2, 3\]"):
        ordered_sequence_draw(r, 3)


def test_draw_uniform_frequency():
    r = RebalancedNs((4, 2, 1), (3, 1, 1))
    draws = ordered_sequence_draw(r, "uniform", seed=2024, draws=100_000)
    assert draws.shape == (100_000, 3)
    freq = draws.mean(axis=0)
    assert abs(freq[0] - 0.75) < 0.01
    assert abs(freq[1] - 0.5) < 0.01
    assert freq[2] == 1.0


def test_draw_uniform_replayable():
    r = rebalance_permutation(as_prefix("1011001"))
    a = ordered_sequence_draw(r, "uniform", seed=9, draws=50)
    b = ordered_sequence_draw(r, "uniform", seed=9, draws=50)
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        ordered_sequence_draw(r, "sideways")


@pytest.mark.parametrize("claim", sorted(CLAIMS))
def test_claims_pass_exhaustively(claim):
    result = verify_claim(claim, 12)
    assert result.passed, result.failures
    assert result.mode == "exhaustive"
    assert result.instances >= 2**13 - 2


def test_norme_instance_count():
    r = verify_claim("norme", 12)
    assert r.instances == 2**13 - 2 and r.failures == []


@pytest.mark.parametrize("claim", sorted(CLAIMS))
def test_mutants_are_detected(claim):
    result = verify_claim(claim, 12, ops=MUTANTS[claim])
    assert not result.passed


def test_propnorm_mutant_fails_at_n2():
    result = verify_claim("propnorm", 12, ops=MUTANTS["propnorm"])
    assert min(len(f) for f in result.failures) == 2


def test_randomized_is_replayable():
    a = verify_claim("propnorm", 64, trials=300, seed=7)
    b = verify_claim("propnorm", 64, trials=300, seed=7)
    assert a.passed and a.to_dict() == b.to_dict()
    assert a.seed == 7 and "randomized" in a.mode
    assert a.instances == 2**13 - 2 + 300


def test_unknown_claim():
    with pytest.raises(KeyError):
        verify_claim("nosuch", 12)
    with pytest.raises(ValueError):
        verify_claim("norme", 1)
