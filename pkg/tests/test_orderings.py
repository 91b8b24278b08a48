"""Average and majority orderings."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from braidsearch.orderings import Ordering, compare_average, majority_scores, rank_candidates


def test_compare_average():
    assert compare_average((1, 2), (2, 2)) == -1
    assert compare_average((3, 1), (1, 3)) == 0
    assert compare_average((5,), (4,)) == 1
    with pytest.raises(ValueError):
        compare_average((1,), (1, 2))


def test_majority_scores():
    assert list(majority_scores([(4, 2, 7)])) == [3]
    assert list(majority_scores([(1, 5), (2, 4)])) == [1, 1]
    assert list(majority_scores([(1, 1), (1, 2), (2, 1)])) == [2, 1, 1]
    with pytest.raises(ValueError):
        majority_scores([])
    with pytest.raises(ValueError):
        majority_scores([(1,), (1, 2)])


def test_rank_examples():
    assert rank_candidates([(3,)], "avg").position(0) == 1
    assert list(rank_candidates([(10,), (7,), (9,)], "avg").order) == [1, 2, 0]
    assert rank_candidates([(1, 1), (1, 2), (2, 1)], "maj").best == 0


def test_ties_go_to_lower_index():
    assert list(rank_candidates([(2, 2), (1, 3), (3, 1)], Ordering.AVERAGE).order) == [0, 1, 2]
    assert list(rank_candidates([(1, 5), (2, 4)], Ordering.MAJORITY).order) == [0, 1]


vectors = st.integers(1, 6).flatmap(
    lambda n: st.lists(st.lists(st.integers(0, 50), min_size=n, max_size=n), min_size=1, max_size=12))


@given(vectors, st.sampled_from(list(Ordering)))
def test_ranking_is_a_permutation(vs, order):
    r = rank_candidates(vs, order)
    assert sorted(r.order.tolist()) == list(range(len(vs)))
    assert r.order.tolist() == rank_candidates(vs, order).order.tolist()


@given(vectors, st.randoms(use_true_random=False))
def test_average_invariant_under_coordinate_permutation(vs, rnd):
    perm = list(range(len(vs[0])))
    rnd.shuffle(perm)
    shuffled = [[v[i] for i in perm] for v in vs]
    assert rank_candidates(vs, "avg").order.tolist() == rank_candidates(shuffled, "avg").order.tolist()


@given(vectors, st.integers(0, 5), st.integers(-20, 20))
def test_majority_invariant_under_coordinate_shift(vs, coord, shift):
    coord %= len(vs[0])
    shifted = np.array(vs) + 0
    shifted[:, coord] += shift
    assert rank_candidates(vs, "maj").order.tolist() == rank_candidates(shifted, "maj").order.tolist()


@given(st.lists(st.integers(0, 100), min_size=1, max_size=10))
def test_single_coordinate_orders_agree_with_integer_comparison(xs):
    vs = [(x,) for x in xs]
    expected = sorted(range(len(xs)), key=lambda i: (xs[i], i))
    assert rank_candidates(vs, "avg").order.tolist() == expected
    best = rank_candidates(vs, "maj").best
    assert xs[best] == min(xs)
