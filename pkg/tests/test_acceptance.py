"""Acceptance criteria, one test per criterion.

Each test prints ``PASS``/``FAIL`` with the measured numbers; the lines are
also collected into the terminal summary (see conftest.py). Run directly
with ``python tests/test_acceptance.py`` for the bare list.
"""

import pytest

from quadflow.acceptance import REGISTRY, run_check

RESULTS = {}


@pytest.mark.parametrize("check", REGISTRY, ids=[c.name for c in REGISTRY])
def test_criterion(check):
    result = run_check(check)
    line = f"{'PASS' if result.passed else 'FAIL'}  {check.name}: {check.title} -- {result.detail}"
    RESULTS[check.name] = line
    print(line)
    assert result.passed, result.detail


def test_registry_covers_all_criteria():
    assert len(REGISTRY) == 11
    assert len({c.name for c in REGISTRY}) == 11


if __name__ == "__main__":
    for c in REGISTRY:
        r = run_check(c)
        print(f"{'PASS' if r.passed else 'FAIL'}  {c.name}: {c.title} -- {r.detail}")
