"""
Prefix vectors and the non-standard representation
===================================================

A prefix of n digits is a 0/1 vector. Repeating digit i 2**(n-i) times gives a
vector of length 2**n - 1 whose squared norm is the integer x* the digits
spell out. Materializing it is only practical for small n, so the profile
keeps x* exactly instead.
"""

from normlab import digits, vecrep

# all eight prefixes of length three: standard norm^2, ns entries, x*
for x in range(1, 8):
    v = vecrep.from_integer(x, 3)
    ns = vecrep.ns_vector(v)
    entries = "".join(map(str, ns.entries.tolist()))
    print(v.to_string(), vecrep.norm_squared(v), entries[:4], entries[4:6], entries[6:],
          ns.norm_squared(), vecrep.integer_representative(v))

# the four-digit sqrt(2) prefix and its complement
v = vecrep.prefix_vector(digits.SqrtSource(2), 4)
c = vecrep.complement(v)
prof = vecrep.ns_profile(v)
print(v.to_string(), c.to_string(), prof.x_star, prof.complement_star, prof.ns_length)

# leading zeros come from explicit padding, not from the source
print(vecrep.prefix_vector(digits.SqrtSource(2), 3, left_pad=2).to_string())

# the angle to the all-ones vector: cos^2 is the proportion of ones
print(vecrep.angle_to_ones(vecrep.as_prefix("1011")))

# x* of a long prefix stays exact
long = vecrep.prefix_vector(digits.SqrtSource(2), 4096)
print(vecrep.ns_profile(long).x_star.bit_length())
