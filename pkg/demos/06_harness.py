"""
Checking the identities
=======================

Each claim is checked for every vector up to n = 12, then on seeded random
vectors above that. A deliberately broken version of each operation must be
caught, or the check is not testing anything.
"""

from normlab import harness, vecrep

for result in harness.verify_all(n_max=64, trials=500, seed=1):
    print(result.claim, result.mode, result.instances, "PASS" if result.passed else "FAIL")

for claim, ops in harness.MUTANTS.items():
    r = harness.verify_claim(claim, 12, ops=ops)
    print(f"mutant {claim}: {'caught' if not r.passed else 'SURVIVED'}, first failure {r.failures[:1]}")

# rebalancing the ns vector of 101 into per-block proportions near 5/7
r = harness.rebalance_permutation(vecrep.as_prefix("101"))
print(r.block_sizes, r.block_ones, r.proportions())

# reading one entry per block
print(harness.ordered_sequence_draw(r, 0))
draws = harness.ordered_sequence_draw(r, "uniform", seed=3, draws=100_000)
print(draws.mean(axis=0))
