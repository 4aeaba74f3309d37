import math

import numpy as np
import pytest

from normlab.digits import BitBuffer

MILLION = 10**6

_acceptance_lines: list[str] = []


def record_acceptance(label: str, ok: bool, detail: str = "") -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {label}"
    if detail:
        line += f"  ({detail})"
    _acceptance_lines.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def sqrt2_oracle_million() -> np.ndarray:
    """First 10**6 digits of sqrt(2) from math.isqrt, independent of normlab."""
    v = math.isqrt(2 << (2 * (MILLION - 1)))
    return np.frombuffer(bin(v)[2:].encode(), dtype=np.uint8) - ord("0")


@pytest.fixture(scope="session")
def champernowne_oracle_million() -> np.ndarray:
    parts, total, i = [], 0, 1
    while total < MILLION:
        b = bin(i)[2:]
        parts.append(b)
        total += len(b)
        i += 1
    text = "".join(parts)[:MILLION]
    return np.frombuffer(text.encode(), dtype=np.uint8) - ord("0")


@pytest.fixture(scope="session")
def sqrt2_buffer_million(sqrt2_oracle_million) -> BitBuffer:
    return BitBuffer.from_bits(sqrt2_oracle_million)
