"""Exact desk-scale combinatorial engines used by lifting and separation.

All kernels are deterministic: when several optima exist the lexicographically
smallest 0/1 vector (item 0 most significant) is returned.
"""

import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BudgetExceeded

MATCHING_EXACT_CAP = 20


def knapsack_max(profits, weights, cap):
    """Max ``p'x`` s.t. ``w'x <= cap`` over binary ``x`` by DP over capacities.

    Returns ``(value, subset)`` with ``subset`` a sorted tuple of item indices.
    """
    p = np.asarray(profits, dtype=float)
    w = np.asarray(weights, dtype=np.int64)
    cap = int(cap)
    n = p.size
    if cap <= 0 or n == 0:
        return 0.0, ()
    # best[i, r]: best value from items i..n-1 with capacity r
    best = np.zeros((n + 1, cap + 1))
    for i in range(n - 1, -1, -1):
        row = best[i + 1].copy()
        wi = int(w[i])
        if wi <= cap:
            take = p[i] + best[i + 1, : cap + 1 - wi]
            np.maximum(row[wi:], take, out=row[wi:])
        best[i] = row
    chosen = []
    r = cap
    for i in range(n):
        # skip item i whenever an optimum without it exists
        if best[i, r] == best[i + 1, r]:
            continue
        chosen.append(i)
        r -= int(w[i])
    return float(best[0, cap]), tuple(chosen)


def covering_knapsack_max(coeffs, weights, threshold):
    """Max ``a'x`` s.t. ``w'x >= threshold`` over binary ``x``; ``None`` if infeasible.

    DP over the remaining weight still needed, capped at zero, so coefficients
    of either sign are handled directly.
    """
    a = np.asarray(coeffs, dtype=float)
    w = np.asarray(weights, dtype=np.int64)
    t = max(int(threshold), 0)
    n = a.size
    if int(w.sum()) < t:
        return None
    # best[i, r]: best value from items i..n-1 that still need weight >= r
    best = np.full((n + 1, t + 1), -np.inf)
    best[n, 0] = 0.0
    idx = np.arange(t + 1)
    for i in range(n - 1, -1, -1):
        rem = np.maximum(idx - int(w[i]), 0)
        best[i] = np.maximum(best[i + 1], a[i] + best[i + 1, rem])
    alpha = np.zeros(n, dtype=np.int64)
    r = t
    for i in range(n):
        if best[i, r] == best[i + 1, r]:
            continue
        alpha[i] = 1
        r = max(r - int(w[i]), 0)
    return float(best[0, t]), alpha


@dataclass(frozen=True)
class Matching:
    pairs: tuple  # sorted (i, j) with i < j, labelled by the caller's vertex ids
    exposed: object  # vertex left unmatched (odd vertex count) or None
    total: float


def max_weight_matching(vertices, weights, singleton_weights=None, exact_cap=MATCHING_EXACT_CAP):
    """Maximum-weight perfect (even) or near-perfect (odd) matching.

    ``weights`` is an ``n x n`` array indexed by vertex id. With an odd vertex
    count one vertex stays exposed and contributes ``singleton_weights[v]``
    (zero by default). Solved exactly by dynamic programming over vertex subsets,
    layer by layer in the number of matched vertices.
    """
    verts = sorted(vertices)
    k = len(verts)
    if k > exact_cap:
        raise BudgetExceeded(f"exact matching limited to {exact_cap} vertices, got {k}")
    W = np.asarray(weights, dtype=float)
    if k == 0:
        return Matching((), None, 0.0)
    sub = W[np.ix_(verts, verts)].copy()
    odd = k % 2 == 1
    if odd:
        single = np.zeros(k) if singleton_weights is None else np.asarray(singleton_weights, dtype=float)[verts]
        # dummy vertex k absorbs the exposed vertex
        aug = np.zeros((k + 1, k + 1))
        aug[:k, :k] = sub
        aug[:k, k] = single
        aug[k, :k] = single
        sub = aug
    m = sub.shape[0]
    pairs_local, total = _subset_dp_matching(sub)
    pairs, exposed = [], None
    for a, b in pairs_local:
        if odd and b == m - 1:
            exposed = verts[a]
        else:
            pairs.append((verts[a], verts[b]))
    return Matching(tuple(sorted(pairs)), exposed, float(total))


@lru_cache(maxsize=32)
def _mask_tables(m):
    size = 1 << m
    masks = np.arange(size, dtype=np.int64)
    pop = np.zeros(size, dtype=np.int64)
    for b in range(m):
        pop += (masks >> b) & 1
    low = np.full(size, -1, dtype=np.int64)
    for b in range(m - 1, -1, -1):
        low[(masks >> b) & 1 == 1] = b
    layers = []
    for layer in range(2, m + 1, 2):
        lm = masks[pop == layer]
        lb = low[lm]
        per_j = []
        for j in range(m):
            has = np.nonzero(((lm >> j) & 1 == 1) & (lb != j))[0]
            if has.size:
                prev = lm[has] ^ (np.int64(1) << lb[has]) ^ (np.int64(1) << j)
                per_j.append((j, has, lb[has], prev))
        layers.append((lm, per_j))
    return low, layers


def _subset_dp_matching(W):
    m = W.shape[0]
    size = 1 << m
    low, layers = _mask_tables(m)
    value = np.full(size, -np.inf)
    value[0] = 0.0
    partner = np.full(size, -1, dtype=np.int64)
    for lm, per_j in layers:
        best = np.full(lm.size, -np.inf)
        arg = np.full(lm.size, -1, dtype=np.int64)
        for j, has, lb, prev in per_j:
            cand = W[lb, j] + value[prev]
            better = cand > best[has]
            idx = has[better]
            best[idx] = cand[better]
            arg[idx] = j
        value[lm] = best
        partner[lm] = arg
    pairs = []
    mask = size - 1
    while mask:
        a = int(low[mask])
        b = int(partner[mask])
        pairs.append((a, b))
        mask ^= (1 << a) | (1 << b)
    return pairs, float(value[size - 1])


def greedy_matching(vertices, weights, singleton_weights=None):
    """Heaviest-edge-first matching; fallback above the exact cap."""
    verts = sorted(vertices)
    W = np.asarray(weights, dtype=float)
    edges = sorted(
        ((W[a, b], a, b) for i, a in enumerate(verts) for b in verts[i + 1:]),
        key=lambda e: (-e[0], e[1], e[2]),
    )
    free = set(verts)
    odd = len(verts) % 2 == 1
    exposed = None
    if odd:
        single = np.zeros(W.shape[0]) if singleton_weights is None else np.asarray(singleton_weights, dtype=float)
        exposed = max(verts, key=lambda v: (single[v], -v))
        free.discard(exposed)
    pairs, total = [], 0.0 if not odd else float(single[exposed])
    for wt, a, b in edges:
        if a in free and b in free:
            pairs.append((a, b))
            total += wt
            free.discard(a)
            free.discard(b)
    return Matching(tuple(sorted(pairs)), exposed, float(total))


@dataclass(frozen=True)
class BnbResult:
    alpha: object  # np.ndarray of 0/1, or None when nothing feasible was found
    value: float
    optimal: bool
    nodes: int


def binary_bnb(objective, bound, n, time_limit=None, no_goods=(), node_limit=None,
               incumbent=None, min_value=-np.inf, order=None):
    """Depth-first branch and bound over ``{0,1}^n``.

    ``objective(alpha)`` returns the value of a complete assignment or ``None``
    when it is infeasible. ``bound(fixed)`` must return an upper bound on every
    feasible completion of a partial assignment (``-1`` marks free entries), or
    ``-inf`` when none exists. Each no-good ``g`` excludes every ``alpha`` with
    ``alpha >= g`` componentwise, i.e. enforces ``sum_i g_i (1 - alpha_i) >= 1``.
    Only solutions strictly better than ``min_value`` are reported.

    Returns the incumbent and whether the search finished; ties keep the first
    assignment found, which with the fixed branching order (1 before 0, then
    index order) makes the result independent of timing whenever it completes.
    """
    start = time.perf_counter()
    ng = [np.asarray(g, dtype=np.int64) for g in no_goods]
    ng_supports = [np.nonzero(g)[0] for g in ng]
    order = list(range(n)) if order is None else list(order)
    best_alpha, best_val = None, float(min_value)
    if incumbent is not None:
        inc = np.asarray(incumbent, dtype=np.int64)
        v = objective(inc)
        if v is not None and v > best_val and not _excluded(inc, ng_supports):
            best_alpha, best_val = inc.copy(), float(v)
    if time_limit is not None and time_limit <= 0:
        return BnbResult(best_alpha, best_val if best_alpha is not None else -np.inf, False, 0)

    nodes = 0
    complete = True
    fixed = np.full(n, -1, dtype=np.int64)

    def out_of_budget():
        if node_limit is not None and nodes >= node_limit:
            return True
        return time_limit is not None and time.perf_counter() - start > time_limit

    # iterative DFS; each frame remembers which child it will try next
    frames = [[0, 0]]  # [depth, next_child_index]; children are (1, 0)
    while frames:
        depth, child = frames[-1]
        if child == 0:
            nodes += 1
            if out_of_budget():
                complete = False
                break
            if _fixed_excluded(fixed, ng_supports) or bound(fixed) <= best_val:
                frames.pop()
                if frames:
                    fixed[order[frames[-1][0]]] = -1
                continue
            if depth == n:
                v = objective(fixed.copy())
                if v is not None and v > best_val:
                    best_alpha, best_val = fixed.copy(), float(v)
                frames.pop()
                if frames:
                    fixed[order[frames[-1][0]]] = -1
                continue
        if child < 2:
            frames[-1][1] = child + 1
            fixed[order[depth]] = 1 - child
            frames.append([depth + 1, 0])
            continue
        frames.pop()
        if frames:
            fixed[order[frames[-1][0]]] = -1
    if best_alpha is None:
        return BnbResult(None, -np.inf, complete, nodes)
    return BnbResult(best_alpha, best_val, complete, nodes)


def _excluded(alpha, ng_supports):
    return any(np.all(alpha[s] == 1) for s in ng_supports)


def _fixed_excluded(fixed, ng_supports):
    return any(np.all(fixed[s] == 1) for s in ng_supports)
