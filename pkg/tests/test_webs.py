from fractions import Fraction

import numpy as np
import pytest

from entweb import qstate as qs
from entweb import webs


@pytest.mark.parametrize("n, expected", [(2, 1.0), (3, 2 / 3), (10, 0.2)])
def test_w_state_examples(n, expected):
    rep = webs.w_state_concurrence(n)
    assert rep.kind == "w_state"
    assert abs(rep.concurrence - expected) < 1e-10
    assert rep.reference_value == 2 / n
    assert rep.deviation < 1e-10


def test_w_state_times_n_is_two():
    for n in range(2, 13):
        assert abs(webs.w_state_concurrence(n).concurrence * n - 2) < 1e-10


def test_w_state_range():
    for n in (1, 13):
        with pytest.raises(ValueError):
            webs.w_state_concurrence(n)


def test_ring_formula_examples():
    assert webs.ring_formula(2) == Fraction(1, 2)
    assert webs.ring_formula(3) == Fraction(2, 5)
    with pytest.raises(ValueError):
        webs.ring_formula(1)


def test_ring_formula_decreases_to_quarter():
    values = [webs.ring_formula(k) for k in range(2, 61)]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert all(v > webs.RING_LIMIT for v in values)
    gaps = [v - webs.RING_LIMIT for v in values]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    assert float(gaps[-1]) < 1e-15


def test_ring_search_small_budget_is_consistent():
    rep = webs.ring_search(2, seed=1, iterations=60, restarts=3)
    assert rep.kind == "ring" and rep.size == 2
    assert rep.details["shift_error"] < 1e-10
    assert rep.details["nn_spread"] < 1e-8
    state = rep.details["state"]
    nn = webs.nearest_neighbour_concurrences(state)
    assert np.allclose(nn, rep.concurrence, atol=1e-8)
    assert rep.concurrence <= 1.0


def test_ring_search_is_deterministic():
    a = webs.ring_search(2, seed=4, iterations=40, restarts=2)
    b = webs.ring_search(2, seed=4, iterations=40, restarts=2, workers=1)
    assert a.concurrence == b.concurrence
    assert np.array_equal(a.details["coefficients"], b.details["coefficients"])


def test_ring_search_limits():
    with pytest.raises(ValueError):
        webs.ring_search(6)
    with pytest.raises(ValueError):
        webs.ring_search(1)


def test_nearest_neighbour_of_ghz_ring_is_zero():
    state = qs.ghz_state(4)
    assert np.all(webs.nearest_neighbour_concurrences(state) < 1e-12)
