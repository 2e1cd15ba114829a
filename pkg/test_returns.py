"""
Tests for discounted and episode-total returns
"""
import pytest
from hypothesis import given, strategies as st

from utils.returns import RewardTrace, discounted_return, episode_fitness

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_discounted_examples():
    assert discounted_return(RewardTrace([1.0, 1.0, 1.0], 1.0), 0) == 3.0
    assert discounted_return(RewardTrace([1.0, 1.0], 0.5), 0) == 1.5
    assert discounted_return(RewardTrace([1.0, 2.0, -4.0], 0.9), 2) == -4.0


def test_out_of_range_step():
    trace = RewardTrace([1.0, 2.0], 0.9)
    with pytest.raises(IndexError):
        discounted_return(trace, 2)
    with pytest.raises(IndexError):
        discounted_return(RewardTrace([], 0.9), 0)


def test_trace_validation():
    with pytest.raises(ValueError):
        RewardTrace([1.0], 0.0)
    with pytest.raises(ValueError):
        RewardTrace([float('nan')], 0.5)


def test_fitness_examples():
    assert episode_fitness([0.0, 0.0, -6.0]) == -6.0
    assert episode_fitness([]) == 0.0
    assert episode_fitness(RewardTrace([-1.0, -2.0, -3.0])) == -6.0


@given(st.lists(finite, max_size=50))
def test_fitness_equals_undiscounted_return(rewards):
    if rewards:
        assert episode_fitness(rewards) == discounted_return(RewardTrace(rewards, 1.0), 0)


@given(st.lists(finite, min_size=1, max_size=50))
def test_sparse_trace_has_same_fitness(rewards):
    total = 0.0
    for r in rewards:
        total += r
    sparse = [0.0] * (len(rewards) - 1) + [total]
    assert episode_fitness(sparse) == episode_fitness(rewards)


@given(st.lists(finite, min_size=2, max_size=30), st.floats(0.01, 1.0))
def test_one_step_recursion(rewards, gamma):
    trace = RewardTrace(rewards, gamma)
    head = discounted_return(trace, 0)
    tail = discounted_return(trace, 1)
    assert head == pytest.approx(rewards[0] + gamma * tail, rel=1e-9, abs=1e-6)
