"""The twelve acceptance criteria, one test each; every run prints a PASS/FAIL line per criterion."""

import pytest

from grassmann_gauge.verify import CRITERION_NAMES, run_criterion

RESULTS = {}

# Criterion 6 is unattainable as stated: omega^AB omega_AB equals +(m+1) for even m under any
# normalization (it is the trace of the identity), and the measured spin-m eigenvalue is -4(m+2).
# The check is left exactly as specified and is expected to fail; see the decisions ledger.
KNOWN_RED = {6: "stated constants contradict exact computation: even-m contraction is +(m+1), eigenvalue is -4(m+2)"}


def _case(n):
    marks = [pytest.mark.xfail(strict=True, reason=KNOWN_RED[n])] if n in KNOWN_RED else []
    return pytest.param(n, marks=marks, id=f"{n:02d}-{CRITERION_NAMES[n - 1].replace(' ', '_')}")


@pytest.mark.parametrize("number", [_case(n) for n in range(1, 13)])
def test_criterion(number):
    res = run_criterion(number)
    RESULTS[number] = res.line()
    print(res.line())
    assert res.passed, res.detail
