"""The ten acceptance criteria, one test each.

Each test prints a single PASS/FAIL line with the measured numbers; run
``pytest -v tests/test_acceptance.py`` to see them.
"""
import pytest

from psw.suite import CRITERIA, FROZEN_EDGE_COUNTS, FROZEN_MIN_C_G2, _pairwise_edge_count, run_criterion

SEED = 42
MAX_HEIGHT = 20


def test_frozen_constants_recomputed():
    assert {h: _pairwise_edge_count(h) for h in FROZEN_EDGE_COUNTS} == FROZEN_EDGE_COUNTS
    assert FROZEN_MIN_C_G2 == 1


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    result = run_criterion(number, max_height=MAX_HEIGHT, seed=SEED)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail
