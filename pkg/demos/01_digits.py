"""
Exact binary digits of constants
================================

Every source starts at its most significant 1 and extends on demand. The
square root generator is exact: the n-digit prefix read as an integer is the
integer square root of 2 * 4**(n-1).
"""

import math
import tempfile
from pathlib import Path

import numpy as np

from normlab import digits

# the first 21 digits of sqrt(2): 1.01101010000010011110...
print(digits.sqrt_digits(2, 21).to_string())

# any prefix agrees with math.isqrt
v = digits.sqrt_digits(2, 500).to_int()
print(v == math.isqrt(2 << 998))

# rationals repeat, dyadics terminate, concatenation constants keep growing
print(digits.rational_digits(1, 3, 16).to_string())
print(digits.rational_digits(3, 4, 8).to_string())
print(digits.champernowne2_digits(17).to_string())
print(digits.copeland_erdos2_digits(13).to_string())

# sources are stateful, and reading in pieces gives the same stream
src = digits.SqrtSource(7)
pieces = np.concatenate([src.read(k) for k in (3, 40, 1000)])
print(np.array_equal(pieces, digits.SqrtSource(7).read(1043)))

# a million digits round-trip through the .nbits format
buf = digits.sqrt_digits(2, 10**6)
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "sqrt2.nbits"
    digits.write_bits(buf, path)
    digits.write_sidecar(path, digits.SqrtSource(2))
    print(path.stat().st_size, digits.read_bits(path) == buf)
