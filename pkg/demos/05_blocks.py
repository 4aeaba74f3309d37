"""
Block frequencies
=================

Counts of every length-k block, with overlapping or disjoint windows. A
normal sequence gives each block frequency 2**-k. The 1/3 stream is simply
normal, yet it never contains "11".
"""

import numpy as np

from normlab import analytics, digits

bits = digits.SqrtSource(2).read(10**6)
for k in range(1, 9):
    h = analytics.block_histogram(bits, k)
    dev = analytics.normality_deviation(h)
    print(f"k={k}  windows={h.windows}  max|f-2^-k|={dev['max_abs_dev']:.2e}  chi2={dev['chi_square']:.1f}")

# the thread count never changes the counts
a = analytics.block_histogram(bits, 8, threads=1)
b = analytics.block_histogram(bits, 8, threads=4)
print(a == b)

# histograms of adjacent chunks merge, and marginalize down to k - 1
left = analytics.block_histogram(bits[:500_007], 3)
right = analytics.block_histogram(bits[500_005:], 3)
print(left + right == analytics.block_histogram(bits, 3))
print(analytics.block_histogram(bits, 3).marginalize().as_dict())

# a pseudorandom stream for comparison
rng_bits = np.random.default_rng(12345).integers(0, 2, 10**6, dtype=np.uint8)
print(analytics.normality_deviation(analytics.block_histogram(rng_bits, 8)))

third = digits.RationalSource(1, 3).read(10**5)
print(analytics.block_histogram(third, 2).as_dict())
