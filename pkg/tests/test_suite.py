from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floqnf.suite import matrix_level_checks, multiset_distance, run_fixture

FIXTURES = sorted((Path(__file__).resolve().parents[1] / "fixtures").glob("*.json"))


@pytest.mark.parametrize("path", FIXTURES, ids=[p.stem for p in FIXTURES])
def test_shipped_fixture_passes(path):
    res = run_fixture(path)
    failed = [c.to_dict() for c in res.checks if not c.passed]
    assert res.passed, failed or res.error


def test_matrix_level_checks_pass():
    for res in matrix_level_checks():
        assert res.passed, [c.to_dict() for c in res.checks if not c.passed]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False), min_size=1, max_size=6),
       st.randoms(use_true_random=False))
def test_multiset_distance_ignores_order(values, rnd):
    shuffled = values[:]
    rnd.shuffle(shuffled)
    assert multiset_distance(values, shuffled) == 0.0


def test_multiset_distance_size_mismatch():
    assert multiset_distance([1.0], [1.0, 2.0]) == np.inf
