"""
Popcount series along growing prefixes
======================================

The ones ratio, the angle to the all-ones vector, the norm ratio between a
prefix and its complement, and the balance gap all come from one streaming
popcount. For sqrt(2) they settle near 1/2, pi/4, 1 and 0. Champernowne's
binary constant is normal, yet at a million digits its ratio is still about
0.53, because every binary numeral starts with a 1.
"""

import math

from normlab import analytics, digits

checkpoints = analytics.log2_checkpoints(10**6)

for name, make in (("sqrt2", lambda: digits.SqrtSource(2)),
                   ("champernowne2", digits.ChampernowneSource),
                   ("1/3", lambda: digits.RationalSource(1, 3))):
    ones = analytics.ones_ratio_series(make(), checkpoints)
    gap = analytics.balance_gap_series(make(), checkpoints)
    angle = analytics.angle_series(make(), checkpoints)
    print(name)
    for n, r, g, a in list(zip(ones.ns, ones.values, gap.values, angle.values))[-5:]:
        print(f"  n={n:>7d}  ones={r:.6f}  gap={g:.6f}  angle-pi/4={a - math.pi / 4:+.2e}")
    print("  tail slope", ones.tail_slope(), "amplitude", ones.tail_amplitude())

# the reports serialize to JSON and CSV
report = analytics.ones_ratio_series(digits.SqrtSource(2), [10, 100, 1000])
print(report.to_csv())
