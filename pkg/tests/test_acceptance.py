"""Full acceptance battery at the stated tolerances, one test per criterion.

Each test prints its pass/fail line so that ``pytest -v`` output doubles as the
acceptance report. Run only this file with ``pytest tests/test_acceptance.py -s``.
"""
import pytest

from sfpsro.acceptance import CRITERIA, format_line, run_battery

SLOW = {10}


@pytest.mark.parametrize(
    "cid",
    [pytest.param(cid, marks=pytest.mark.slow) if cid in SLOW else cid for cid, *_ in CRITERIA],
    ids=[f"criterion_{cid:02d}" for cid, *_ in CRITERIA],
)
def test_criterion(cid, capsys):
    (result,) = run_battery(quick=False, only={cid})
    with capsys.disabled():
        print("\n" + format_line(result))
    assert result.passed, result.detail
