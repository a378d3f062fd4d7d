import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from ccs.assignment import min_cost_assignment

from oracles import brute_force_assignment


def test_identity_favoring():
    res = min_cost_assignment(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert res.pairs == [(0, 0), (1, 1)] and res.cost == 0


def test_anti_diagonal():
    res = min_cost_assignment(np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert res.pairs == [(0, 1), (1, 0)] and res.cost == 0


def test_empty():
    assert min_cost_assignment(np.zeros((0, 3))).pairs == []
    assert min_cost_assignment(np.zeros((0, 0))).cost == 0.0


def test_rejects_non_finite():
    with pytest.raises(ValueError):
        min_cost_assignment(np.array([[np.inf]]))


@pytest.mark.parametrize("shape", [(5, 5), (3, 5), (6, 2)])
def test_random_matches_bruteforce(shape):
    rng = np.random.default_rng(sum(shape))
    for _ in range(50):
        cost = rng.random(shape)
        assert min_cost_assignment(cost).cost == brute_force_assignment(cost)


@given(
    st.integers(1, 6).flatmap(
        lambda n: st.integers(1, 6).flatmap(
            lambda k: arrays(float, (n, k), elements=st.floats(0, 10, allow_nan=False))
        )
    )
)
def test_property_optimal_and_one_to_one(cost):
    res = min_cost_assignment(cost)
    rows = [r for r, _ in res.pairs]
    cols = [c for _, c in res.pairs]
    assert len(res.pairs) == min(cost.shape)
    assert len(set(rows)) == len(rows) and len(set(cols)) == len(cols)
    assert res.cost == brute_force_assignment(cost)
