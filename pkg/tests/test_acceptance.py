"""Acceptance criteria, one test each; every test prints a single pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines, or use
``ncscale repro`` for the same table without pytest.
"""
import time

import pytest

from ncscale import repro

_CONTEXT = repro._Context()
LINES: list[str] = []          # shown in the terminal summary by conftest.py


@pytest.mark.parametrize("number", sorted(repro.CRITERIA))
def test_criterion(number):
    slug, fn = repro.CRITERIA[number]
    t0 = time.perf_counter()
    res = fn(_CONTEXT)
    res.seconds = time.perf_counter() - t0
    if number in (1, 7) and res.seconds > repro.RUNTIME_LIMIT:
        res.passed = False
    print(res.line())
    LINES.append(res.line())
    assert res.passed, res.line()
