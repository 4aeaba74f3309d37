"""
The ns norm ratio for sqrt(2)
=============================

Dividing the ns norm sqrt(x*) by sqrt(2**(n-1)) and following it along n, the
exact value settles at 2**(1/4) = 1.18920711500272..., since x* / 2**(n-1)
approaches sqrt(2). A prediction built from digit proportions gives a series
that tends to 1 instead. Both are reported side by side.
"""

from normlab import analytics, digits

report = analytics.ns_ratio_series(digits.SqrtSource(2), range(8, 257))
predicted = {p["n"]: p["value"] for p in report.extra["proportion_predicted"]}

for n in (8, 16, 32, 64, 128, 256):
    print(f"n={n:>3d}  exact={report.value_at(n):.15f}  proportion-predicted={predicted[n]:.15f}")

print("limit 2**(1/4) =", 2 ** 0.25)
print("claimed limit  =", report.extra["claimed_limit"])

# the largest successive change beyond n = 64
values = report.values
print(max(abs(b - a) for n, a, b in zip(report.ns[1:], values, values[1:]) if n > 64))
