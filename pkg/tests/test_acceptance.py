"""Acceptance battery: every primary criterion at its stated tolerance.

The battery runs once per session (shared fixture); each test asserts one
criterion and carries its pass/fail line in the assertion message, so a
plain ``pytest tests/test_acceptance.py -v`` reads as the acceptance report.
"""

import pytest

from traceshift import suite

CIDS = [cid for cid, _, _, _ in suite.CRITERIA]


@pytest.fixture(scope="session")
def battery():
    results = suite.run_all()
    return {r.cid: r for r in results}


def test_registry_covers_all_criteria():
    assert len(CIDS) == 10
    assert len(set(CIDS)) == 10


@pytest.mark.parametrize("cid", CIDS)
def test_criterion(cid, battery):
    res = battery[cid]
    print(res.line)
    assert res.passed, res.line
