import numpy as np
import pytest

from hjlab.torus import Field2D, random_bandlimited

PI = np.pi


def field(fn, n=64, period=1.0):
    return Field2D.from_function(lambda x, y: fn(x, y) + 0 * x + 0 * y, n, period)


def bandlimited(n, seed, kmax=None, scale=1.0, period=1.0):
    """Random field strictly inside the 2/3 band."""
    kmax = (n - 1) // 3 - 1 if kmax is None else kmax
    f = random_bandlimited(n, kmax, seed, period=period, decay=1.5)
    return f * (scale / f.max_abs())


@pytest.fixture
def cos_x():
    return field(lambda x, y: np.cos(2 * PI * x))


# Acceptance verdicts collected during the run and echoed in the terminal summary.
ACCEPTANCE = []


def record_criterion(number, passed, detail):
    line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
