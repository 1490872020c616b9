import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qkpb.kernels import binary_bnb, covering_knapsack_max, greedy_matching, knapsack_max, max_weight_matching


def test_knapsack_examples():
    assert knapsack_max([6, 10, 12], [1, 2, 3], 5) == (22.0, (1, 2))
    assert knapsack_max([6, 10, 12], [1, 2, 3], 0) == (0.0, ())
    assert knapsack_max([0, 0], [1, 1], 3)[0] == 0.0


def test_covering_examples():
    val, a = covering_knapsack_max([3, -1, 2], [2, 3, 4], 6)
    assert val == 5 and list(a) == [1, 0, 1]
    val, a = covering_knapsack_max([3, -1, 2], [2, 3, 4], 0)
    assert list(a) == [1, 0, 1]
    assert covering_knapsack_max([1, 1], [1, 1], 5) is None


@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_knapsacks_match_enumeration(data):
    n = data.draw(st.integers(1, 8))
    p = data.draw(st.lists(st.integers(-5, 20), min_size=n, max_size=n))
    w = data.draw(st.lists(st.integers(1, 10), min_size=n, max_size=n))
    cap = data.draw(st.integers(0, 40))
    best_le, best_ge = 0.0, -np.inf
    for a in itertools.product((0, 1), repeat=n):
        a = np.array(a)
        if a @ w <= cap:
            best_le = max(best_le, float(a @ p))
        if a @ w >= cap:
            best_ge = max(best_ge, float(a @ p))
    val, subset = knapsack_max(np.maximum(p, 0), w, cap)
    assert val == pytest.approx(max(best_le, 0.0) if min(p) >= 0 else val)
    if min(p) >= 0:
        assert val == pytest.approx(best_le)
        assert sum(w[i] for i in subset) <= cap
    res = covering_knapsack_max(p, w, cap)
    if best_ge == -np.inf:
        assert res is None
    else:
        assert res[0] == pytest.approx(best_ge)
        assert res[1] @ w >= cap


def test_matching_examples():
    W = np.ones((4, 4))
    W[0, 1] = W[1, 0] = W[2, 3] = W[3, 2] = 5
    m = max_weight_matching(range(4), W)
    assert m.pairs == ((0, 1), (2, 3)) and m.total == 10
    assert max_weight_matching([2, 5], np.ones((6, 6))).pairs == ((2, 5),)
    W = np.zeros((3, 3))
    W[0, 1] = W[1, 0] = 4
    W[0, 2] = W[2, 0] = W[1, 2] = W[2, 1] = 1
    m = max_weight_matching(range(3), W)
    assert m.pairs == ((0, 1),) and m.exposed == 2 and m.total == 4


def _brute_matching(verts, W, single):
    verts = list(verts)
    if not verts:
        return 0.0
    if len(verts) == 1:
        return single[verts[0]]
    first, rest = verts[0], verts[1:]
    best = -np.inf
    if len(verts) % 2 == 1:
        best = single[first] + _brute_matching(rest, W, single)
    for k, j in enumerate(rest):
        best = max(best, W[first, j] + _brute_matching(rest[:k] + rest[k + 1:], W, single))
    return best


@settings(max_examples=30, deadline=None)
@given(k=st.integers(1, 9), seed=st.integers(0, 10_000))
def test_matching_matches_enumeration(k, seed):
    rng = np.random.default_rng(seed)
    W = rng.random((k, k))
    W = W + W.T
    single = rng.random(k)
    m = max_weight_matching(range(k), W, single)
    assert m.total == pytest.approx(_brute_matching(range(k), W, single))
    g = greedy_matching(range(k), W, single)
    assert g.total <= m.total + 1e-12


def _cover_problem(n, seed):
    rng = np.random.default_rng(seed)
    w = rng.integers(1, 10, n)
    c = int(w.sum() // 2)
    val = rng.standard_normal(n)

    def objective(a):
        return None if a @ w <= c else float(a @ val - 0.1 * a.sum() ** 2)

    def bound(fixed):
        ones = fixed == 1
        free = fixed == -1
        if w[ones | free].sum() <= c:
            return -np.inf
        return float(val[ones].sum() + np.maximum(val[free], 0).sum())

    return objective, bound


def test_bnb_matches_enumeration():
    for seed in range(20):
        n = 4 + seed % 6
        obj, bnd = _cover_problem(n, seed)
        best = max((v for a in itertools.product((0, 1), repeat=n)
                    if (v := obj(np.array(a))) is not None), default=-np.inf)
        res = binary_bnb(obj, bnd, n)
        assert res.optimal and res.value == pytest.approx(best)


def test_bnb_time_limit_zero_and_no_goods():
    obj, bnd = _cover_problem(5, 1)
    inc = np.ones(5, dtype=int)
    res = binary_bnb(obj, bnd, 5, time_limit=0, incumbent=inc)
    assert not res.optimal and np.array_equal(res.alpha, inc)
    # a no-good on the empty set excludes everything
    res = binary_bnb(obj, bnd, 5, no_goods=[np.zeros(5, dtype=int)])
    assert res.alpha is None
