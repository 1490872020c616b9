"""Exhaustive-enumeration oracles used to check the separation routines."""

import itertools

import numpy as np

from qkpb.cutgen import cils_objective, perfect_matchings


def covers(inst):
    for a in itertools.product((0, 1), repeat=inst.n):
        a = np.array(a, dtype=np.int64)
        if a @ inst.w >= inst.c + 1:
            yield a


def cils_oracle(X_bar, inst, delta=0.0):
    return max((cils_objective(X_bar, a, delta) for a in covers(inst)), default=-np.inf)


def pairing_oracle(X_bar, support, singleton_diag):
    """Best sum of selected entries over all (near-)perfect pairings of ``support``."""
    support = list(support)
    best = -np.inf
    if len(support) % 2 == 0:
        for m in perfect_matchings(support):
            best = max(best, sum(X_bar[i, j] for i, j in m))
    else:
        for i0 in support:
            rest = [i for i in support if i != i0]
            extra = X_bar[i0, i0] if singleton_diag else 0.0
            for m in perfect_matchings(rest):
                best = max(best, extra + sum(X_bar[i, j] for i, j in m))
    return best


def scils_oracle(X_bar, inst):
    """Best SCILS value over all covers, with pairings found by memoized recursion on item sets."""
    from functools import lru_cache

    n = inst.n

    @lru_cache(maxsize=None)
    def even(mask):
        if mask == 0:
            return 0.0
        first = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << first)
        best = -np.inf
        for j in range(n):
            if rest >> j & 1:
                best = max(best, X_bar[first, j] + even(rest & ~(1 << j)))
        return best

    def value(mask):
        items = [i for i in range(n) if mask >> i & 1]
        if len(items) % 2 == 0:
            return even(mask)
        return max(X_bar[i, i] + even(mask & ~(1 << i)) for i in items)

    best = -np.inf
    for a in covers(inst):
        mask = sum(1 << int(i) for i in np.nonzero(a)[0])
        k = int(a.sum())
        best = max(best, value(mask) - (k - 1) // 2)
    return best


def random_point(rng, n):
    """A symmetric ``X_bar`` with entries in [0, 1] and its diagonal as ``x_bar``."""
    X = rng.random((n, n))
    X = 0.5 * (X + X.T)
    return np.diag(X).copy(), X
