"""Every acceptance criterion at its stated tolerance, one test each.

A summary with one pass/fail line per criterion is printed at the end of the run.
"""

import pytest

from conftest import ACCEPTANCE_LINES
from triodflow import acceptance


@pytest.mark.slow
@pytest.mark.parametrize("cid", sorted(acceptance.CRITERIA), ids=lambda c: f"C{c}")
def test_criterion(cid, shared_runs):
    r = acceptance.evaluate(cid, shared_runs)
    line = r.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert r.passed, line


def test_suites_cover_all_criteria():
    assert set(acceptance.SUITE_MEMBERS["full"]) == set(acceptance.CRITERIA)
    assert set(acceptance.SUITE_MEMBERS["fast"]) < set(acceptance.CRITERIA)
    grouped = [c for g in acceptance.GROUPS for c in g]
    assert sorted(grouped) == sorted(acceptance.CRITERIA)
