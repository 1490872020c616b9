"""Valid inequalities in the lifted space ``X = xx'`` and their separation.

Knapsack-polytope inequalities (covers, extended and lifted covers) are
turned into rows on ``(x, X)``:

* SCI: ``sum_j a_j X_ij <= beta * x_i`` for every item ``i``,
* CILS: ``sum_{i<j in C} X_ij <= binom(beta, 2)``,
* SCILS: ``sum_{(i,j) in pairing} X_ij <= floor(beta/2)``,
* SKILS: the weighted pairing version built from coefficient classes.

Every lifted row is stored as a :class:`LiftedCut` ``a_x.x + trace(A_X X) <= rhs``
with ``A_X`` symmetric, so a unit coefficient on an off-diagonal ``X_ij``
shows up as ``A_X[i, j] = A_X[j, i] = 1/2``.
"""

import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .config import NUMERIC
from .errors import CombinatorialBudget, DimensionMismatch, IncomparableFamilies, NoCoverExists
from .kernels import (
    MATCHING_EXACT_CAP,
    binary_bnb,
    covering_knapsack_max,
    greedy_matching,
    knapsack_max,
    max_weight_matching,
)
from .symmat import svec, svec_dim, svec_indices

FAMILIES = ("CI", "SCI", "CILS", "SCILS", "SKILS")
ENUMERATION_CAP = 200_000


@dataclass(frozen=True)
class Cover:
    items: tuple
    minimal: bool

    @classmethod
    def from_items(cls, items, inst):
        items = tuple(sorted(int(i) for i in items))
        w = inst.w
        total = int(w[list(items)].sum()) if items else 0
        if total <= inst.c:
            raise ValueError(f"items {items} weigh {total} <= capacity {inst.c}; not a cover")
        minimal = all(total - int(w[i]) <= inst.c for i in items)
        return cls(items, minimal)

    def alpha(self, n):
        a = np.zeros(n, dtype=np.int64)
        a[list(self.items)] = 1
        return a


@dataclass(frozen=True)
class KnapsackValidIneq:
    """``coeffs . x <= rhs`` valid for the knapsack polytope, integer data."""

    coeffs: tuple
    rhs: int
    cover: tuple = ()

    @property
    def n(self):
        return len(self.coeffs)

    @property
    def array(self):
        return np.array(self.coeffs, dtype=np.int64)

    @property
    def support(self):
        return tuple(i for i, a in enumerate(self.coeffs) if a != 0)

    def zero_one(self):
        """Replace each coefficient by ``min(a, 1)``; still valid, rhs unchanged."""
        return KnapsackValidIneq(tuple(min(int(a), 1) for a in self.coeffs), self.rhs, self.cover)

    def lhs(self, x):
        return float(np.dot(self.array, x))


@dataclass(frozen=True, eq=False)
class LiftedCut:
    a_x: np.ndarray
    A_X: np.ndarray
    rhs: float
    family: str
    support: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        a_x = np.asarray(self.a_x, dtype=float)
        A = np.asarray(self.A_X, dtype=float)
        if A.shape != (a_x.size, a_x.size):
            raise DimensionMismatch(f"A_X shape {A.shape} does not match a_x of length {a_x.size}")
        A = 0.5 * (A + A.T)
        a_x.flags.writeable = False
        A.flags.writeable = False
        object.__setattr__(self, "a_x", a_x)
        object.__setattr__(self, "A_X", A)
        object.__setattr__(self, "rhs", float(self.rhs))

    @property
    def n(self):
        return self.a_x.size

    def lhs(self, x, X):
        return float(self.a_x @ np.asarray(x, dtype=float) + np.sum(self.A_X * np.asarray(X, dtype=float)))

    def violation(self, x, X):
        return self.lhs(x, X) - self.rhs

    def row(self):
        """Coefficients on ``z = (x, svec(X))``."""
        coef = svec(2.0 * self.A_X)
        n = self.n
        diag_pos = _diag_positions(n)
        coef[diag_pos] *= 0.5
        return np.concatenate([self.a_x, coef])

    def pair_coefficients(self):
        """Coefficient of each ``X_ij`` (i <= j) as it appears in the written inequality."""
        out = {}
        n = self.n
        for i in range(n):
            if self.A_X[i, i] != 0:
                out[(i, i)] = float(self.A_X[i, i])
            for j in range(i + 1, n):
                if self.A_X[i, j] != 0:
                    out[(i, j)] = float(2.0 * self.A_X[i, j])
        return out

    def to_dict(self):
        return {
            "family": self.family,
            "support": list(self.support),
            "rhs": self.rhs,
            "a_x": {int(i): float(v) for i, v in enumerate(self.a_x) if v != 0},
            "X": {f"{i},{j}": v for (i, j), v in self.pair_coefficients().items()},
            **({"meta": self.meta} if self.meta else {}),
        }


def _diag_positions(n):
    # position of X_ii in svec order: column-major lower half
    return np.array([j * n - j * (j - 1) // 2 for j in range(n)], dtype=np.intp)


def pairs_cut(n, pair_coeffs, rhs, family, a_x=None, support=(), meta=None):
    """Build a LiftedCut from ``{(i, j): coefficient of X_ij}`` in written form."""
    A = np.zeros((n, n))
    for (i, j), v in pair_coeffs.items():
        if i == j:
            A[i, i] += v
        else:
            A[i, j] += 0.5 * v
            A[j, i] += 0.5 * v
    ax = np.zeros(n) if a_x is None else np.asarray(a_x, dtype=float)
    return LiftedCut(ax, A, rhs, family, tuple(support), dict(meta or {}))


def ci_cut(ineq):
    """The knapsack inequality itself as a row on ``x`` only."""
    n = ineq.n
    return LiftedCut(ineq.array.astype(float), np.zeros((n, n)), ineq.rhs, "CI", ineq.support,
                     {"cover": list(ineq.cover)})


def lifted_rows(ineq):
    """Rows ``sum_j a_j X_ij - beta x_i <= 0`` obtained by multiplying by each ``x_i``."""
    n = ineq.n
    a = ineq.array.astype(float)
    out = []
    for i in range(n):
        A = np.zeros((n, n))
        A[i, :] += 0.5 * a
        A[:, i] += 0.5 * a
        ax = np.zeros(n)
        ax[i] = -float(ineq.rhs)
        out.append(LiftedCut(ax, A, 0.0, "SCI", ineq.support, {"row": i, "cover": list(ineq.cover)}))
    return out


def cover_inequality(cover, n):
    return KnapsackValidIneq(tuple(int(v) for v in cover.alpha(n)), len(cover.items) - 1, cover.items)


def sci_family(cover, n):
    """The ``n`` scaled cover rows ``sum_{j in C} X_ij <= (|C|-1) x_i``."""
    return lifted_rows(cover_inequality(cover, n))


# --- covers and their strengthenings ------------------------------------------------


def extend_cover(cover, inst):
    """Extended cover inequality: add every item at least as heavy as the heaviest in C."""
    w = inst.w
    items = list(cover.items)
    w_star = int(w[items].max())
    ext = set(items) | {j for j in range(inst.n) if j not in cover.items and int(w[j]) >= w_star}
    coeffs = tuple(1 if j in ext else 0 for j in range(inst.n))
    return KnapsackValidIneq(coeffs, len(items) - 1, cover.items)


def lift_cover(cover, inst):
    """Sequential up-lifting of a minimal cover inequality.

    Items outside the cover are lifted in ascending weight order (ties by index);
    each lifting coefficient is ``|C| - 1 - zeta`` where ``zeta`` is the optimum
    of a 0/1 knapsack over the items already in the inequality.
    """
    if not cover.minimal:
        raise ValueError("lifting requires a minimal cover")
    n = inst.n
    w = inst.w
    beta = len(cover.items) - 1
    coeffs = np.zeros(n, dtype=np.int64)
    coeffs[list(cover.items)] = 1
    rest = sorted((j for j in range(n) if j not in cover.items), key=lambda j: (int(w[j]), j))
    active = list(cover.items)
    for j in rest:
        cap = inst.c - int(w[j])
        zeta, _ = knapsack_max(coeffs[active].astype(float), w[active], cap)
        coeffs[j] = beta - int(round(zeta))
        active.append(j)
    return KnapsackValidIneq(tuple(int(a) for a in coeffs), beta, cover.items)


def minimal_subcover(cover, inst):
    """Drop items (lightest first, then by index) while the set stays a cover."""
    items = list(cover.items)
    total = int(inst.w[items].sum())
    for j in sorted(cover.items, key=lambda j: (int(inst.w[j]), j)):
        if total - int(inst.w[j]) > inst.c:
            items.remove(j)
            total -= int(inst.w[j])
    return Cover.from_items(items, inst)


# --- CILS -------------------------------------------------------------------------


def cils_build(support, beta, n, family_meta=None):
    """``sum_{i<j in support} X_ij <= binom(beta, 2)``; with ``beta == 1`` this fixes those ``X_ij`` to 0."""
    support = tuple(sorted(support))
    if not 1 <= beta < len(support):
        raise ValueError(f"need 1 <= beta < |C|, got beta={beta}, |C|={len(support)}")
    pc = {(i, j): 1.0 for i, j in itertools.combinations(support, 2)}
    return pairs_cut(n, pc, math.comb(beta, 2), "CILS", support=support,
                     meta={"beta": beta, **(family_meta or {})})


def cils_from_ineq(ineq):
    z = ineq.zero_one()
    return cils_build(z.support, z.rhs, z.n, {"cover": list(ineq.cover)})


# --- SCILS / SKILS enumeration ----------------------------------------------------


def perfect_matchings(items):
    items = list(items)
    if not items:
        yield ()
        return
    first = items[0]
    for k in range(1, len(items)):
        rest = items[1:k] + items[k + 1:]
        for m in perfect_matchings(rest):
            yield ((first, items[k]),) + m


def count_perfect_matchings(gamma):
    if gamma % 2:
        return 0
    h = gamma // 2
    return math.factorial(gamma) // (2 ** h * math.factorial(h))


def scils_count(gamma):
    if gamma % 2 == 0:
        return count_perfect_matchings(gamma)
    return gamma * count_perfect_matchings(gamma - 1)


def skils_count(class_sizes):
    return math.prod(scils_count(g) for g in class_sizes)


def scils_enumerate(support, beta, n, cap=ENUMERATION_CAP):
    """All pairing inequalities of a cover-type inequality ``sum_{C} x_j <= beta``.

    Even ``|C|``: perfect matchings of C. Odd ``|C|`` and odd ``beta``: perfect
    matchings of ``C - {i0}`` for each ``i0``. Odd ``|C|`` and even ``beta``: the
    same with the diagonal term ``X_{i0 i0}`` added. Right-hand side ``floor(beta/2)``.
    """
    support = tuple(sorted(support))
    gamma = len(support)
    if beta >= gamma:
        raise ValueError("need beta < |C|")
    if scils_count(gamma) > cap:
        raise CombinatorialBudget(f"{scils_count(gamma)} SCILS inequalities exceed cap {cap}")
    rhs = beta // 2
    out = []
    if gamma % 2 == 0:
        for m in perfect_matchings(support):
            out.append(_scils_cut(n, m, None, rhs, support, beta))
    else:
        for i0 in support:
            rest = [i for i in support if i != i0]
            for m in perfect_matchings(rest):
                single = i0 if beta % 2 == 0 else None
                out.append(_scils_cut(n, m, single, rhs, support, beta, exposed=i0))
    return out


def _scils_cut(n, pairs, singleton, rhs, support, beta, exposed=None, meta=None):
    pc = {tuple(sorted(p)): 1.0 for p in pairs}
    if singleton is not None:
        pc[(singleton, singleton)] = 1.0
    md = {"beta": beta, "pairs": [list(p) for p in sorted(pc)]}
    if exposed is not None:
        md["exposed"] = exposed
    md.update(meta or {})
    return pairs_cut(n, pc, rhs, "SCILS", support=support, meta=md)


def coefficient_classes(ineq):
    """Group the support of ``ineq`` by coefficient value, ascending by value."""
    classes = {}
    for j, a in enumerate(ineq.coeffs):
        if a > 0:
            classes.setdefault(int(a), []).append(j)
    return [(a, tuple(classes[a])) for a in sorted(classes)]


def skils_enumerate(ineq, tighten=True, cap=ENUMERATION_CAP):
    """Weighted pairing inequalities of a knapsack inequality ``sum a_j x_j <= beta``.

    Each class of equal coefficients ``a`` is split into pairs (and one
    leftover ``i0`` when the class is odd); a cut is
    ``sum_k (a_k X_{i0 i0} + 2 a_k sum_pairs X_ij) <= beta``. With ``tighten``
    the rhs becomes ``2 floor(beta/2)`` when every odd class has an even
    coefficient.
    """
    beta = int(ineq.rhs)
    if any(a > beta for a in ineq.coeffs):
        raise ValueError("need beta >= every coefficient")
    classes = coefficient_classes(ineq)
    total = skils_count([len(c) for _, c in classes])
    if total > cap:
        raise CombinatorialBudget(f"{total} SKILS inequalities exceed cap {cap}")
    rhs = beta
    if tighten and all(a % 2 == 0 for a, c in classes if len(c) % 2 == 1):
        rhs = 2 * (beta // 2)
    per_class = []
    for a, items in classes:
        options = []
        if len(items) % 2 == 0:
            for m in perfect_matchings(items):
                options.append((a, m, None))
        else:
            for i0 in items:
                rest = [i for i in items if i != i0]
                for m in perfect_matchings(rest):
                    options.append((a, m, i0))
        per_class.append(options)
    n = ineq.n
    out = []
    for combo in itertools.product(*per_class):
        pc = {}
        for a, m, i0 in combo:
            if i0 is not None:
                pc[(i0, i0)] = pc.get((i0, i0), 0.0) + a
            for i, j in m:
                key = (min(i, j), max(i, j))
                pc[key] = pc.get(key, 0.0) + 2.0 * a
        out.append(pairs_cut(n, pc, rhs, "SKILS", support=ineq.support,
                             meta={"beta": beta, "tightened": rhs != beta}))
    return out


# --- separation ------------------------------------------------------------------


@dataclass(frozen=True)
class SciSeparation:
    cover: Cover
    value: float  # sum of the n row violations at the separated point


def sci_separation(x_bar, X_bar, inst):
    """Cover maximizing the summed violation of its n scaled rows.

    ``sum_i [x_i (1 - e'a) + sum_j a_j X_ij] = sum x + sum_j a_j (colsum_j(X) - sum x)``
    is linear in ``a``, so this is a covering knapsack ``w'a >= c + 1``.
    Returns ``None`` when the best value is not positive.
    """
    x_bar = np.asarray(x_bar, dtype=float)
    X_bar = np.asarray(X_bar, dtype=float)
    if int(inst.w.sum()) <= inst.c:
        raise NoCoverExists("all items fit")
    sx = float(x_bar.sum())
    coeffs = X_bar.sum(axis=0) - sx
    value, alpha = covering_knapsack_max(coeffs, inst.w, inst.c + 1)
    value += sx
    if value <= 0:
        return None
    return SciSeparation(Cover.from_items(np.nonzero(alpha)[0], inst), value)


def sci_separation_value(x_bar, X_bar, alpha):
    alpha = np.asarray(alpha, dtype=float)
    return float(np.sum(x_bar) * (1 - alpha.sum()) + np.sum(X_bar @ alpha))


@dataclass(frozen=True)
class CilsSeparation:
    cover: Cover
    beta: int
    cut: LiftedCut
    violation: float
    optimal: bool


def cils_objective(X_bar, alpha, delta=0.0):
    """Value of the CILS separation objective ``trace(X K) - beta(beta-1) - delta e'a``.

    ``K_ij = a_i a_j`` off the diagonal, ``beta = e'a - 1``.
    """
    idx = np.nonzero(alpha)[0]
    k = idx.size
    sub = X_bar[np.ix_(idx, idx)]
    pair_sum = (sub.sum() - np.trace(sub))  # = 2 * sum_{i<j} X_ij
    beta = k - 1
    return float(pair_sum - beta * (beta - 1) - delta * k)


def cils_separate(X_bar, inst, time_limit=None, no_goods=(), delta=0.0, node_limit=None,
                  min_violation=NUMERIC.cut_violation):
    """Search covers ``a`` for a violated CILS by branch and bound.

    The pair-product variables of the mixed-integer model are fixed by ``a``,
    so the search runs over ``a`` alone. Any positive-value incumbent is
    acceptable when the search is cut short.
    """
    X_bar = np.asarray(X_bar, dtype=float)
    res = cils_search(X_bar, inst, time_limit, no_goods, delta, node_limit, min_value=2.0 * min_violation)
    if res.alpha is None:
        return None
    cover = Cover.from_items(np.nonzero(res.alpha)[0], inst)
    beta = len(cover.items) - 1
    cut = cils_build(cover.items, beta, inst.n, {"cover": list(cover.items)})
    viol = cut.violation(np.zeros(inst.n), X_bar)
    return CilsSeparation(cover, beta, cut, viol, res.optimal)


def cils_search(X_bar, inst, time_limit=None, no_goods=(), delta=0.0, node_limit=None, min_value=-np.inf):
    n = inst.n
    w = inst.w.astype(np.int64)
    need = inst.c + 1
    if int(w.sum()) < need:
        raise NoCoverExists("all items fit")
    Xs = 0.5 * (X_bar + X_bar.T)
    off = Xs - np.diag(np.diag(Xs))
    offpos = np.maximum(off, 0.0)

    def objective(alpha):
        if int(w @ alpha) < need:
            return None
        return cils_objective(Xs, alpha, delta)

    def bound(fixed):
        ones = np.nonzero(fixed == 1)[0]
        free = np.nonzero(fixed == -1)[0]
        w1 = int(w[ones].sum())
        k1 = ones.size
        base = off[np.ix_(ones, ones)].sum()  # 2 * pairs within fixed ones
        if free.size == 0:
            if w1 < need:
                return -np.inf
            b = k1 - 1
            return base - b * (b - 1) - delta * k1
        to_ones = 2.0 * off[np.ix_(free, ones)].sum(axis=1)  # each pair counted twice in trace
        ff = offpos[np.ix_(free, free)]
        ff_sorted = -np.sort(-ff, axis=1)
        ff_cum = np.concatenate([np.zeros((free.size, 1)), np.cumsum(ff_sorted, axis=1)], axis=1)
        w_sorted_cum = np.concatenate([[0], np.cumsum(np.sort(w[free])[::-1])])
        best = -np.inf
        for m in range(0, free.size + 1):
            if w1 + w_sorted_cum[m] < need:
                continue
            k = k1 + m
            b = k - 1
            if m == 0:
                val = base
            else:
                # each free item adds its pairs to ones plus half of its best (m-1) free partners, counted twice
                contrib = to_ones + ff_cum[:, m - 1]
                val = base + np.sort(contrib)[::-1][:m].sum()
            cand = val - b * (b - 1) - delta * k
            best = max(best, cand)
        return best

    greedy = _greedy_cover_by_weight(inst)
    return binary_bnb(objective, bound, n, time_limit=time_limit, no_goods=no_goods,
                      node_limit=node_limit, incumbent=greedy, min_value=min_value)


def _greedy_cover_by_weight(inst):
    order = np.argsort(-inst.w, kind="stable")
    alpha = np.zeros(inst.n, dtype=np.int64)
    total = 0
    for j in order:
        alpha[j] = 1
        total += int(inst.w[j])
        if total > inst.c:
            return alpha
    return None


@dataclass(frozen=True)
class ScilsSeparation:
    cover: Cover
    beta: int
    pairs: tuple
    singleton: object
    cut: LiftedCut
    violation: float
    optimal: bool

    @property
    def pattern(self):
        """Selected pair/singleton columns, the ``y`` vector of the separation model."""
        cols = set(self.pairs)
        if self.singleton is not None:
            cols.add((self.singleton, self.singleton))
        return frozenset(cols)


def best_pairing(X_bar, support, singleton_diag, forbidden=frozenset(), fixed_pairs=(), exact_cap=MATCHING_EXACT_CAP):
    """Best pairing of ``support`` maximizing the selected ``X_bar`` entries.

    With an odd count one vertex stays single and earns ``X_bar[i, i]`` when
    ``singleton_diag`` is true, nothing otherwise. ``forbidden`` holds pairs
    ``(i, j)`` (or ``(i, i)`` singletons) that may not be used; ``fixed_pairs``
    are kept as given. Returns ``(pairs, singleton_or_exposed, value, exact)``.
    """
    fixed_pairs = tuple(tuple(sorted(p)) for p in fixed_pairs)
    used = {i for p in fixed_pairs for i in p}
    verts = [i for i in support if i not in used]
    base = float(sum(X_bar[i, j] for i, j in fixed_pairs))
    W = np.array(X_bar, dtype=float, copy=True)
    neg = -1e9
    for p in forbidden:
        i, j = p
        if i != j:
            W[i, j] = W[j, i] = neg
    single = np.diag(X_bar).copy() if singleton_diag else np.zeros(X_bar.shape[0])
    for p in forbidden:
        if p[0] == p[1]:
            single[p[0]] = neg
    if len(verts) <= exact_cap:
        m = max_weight_matching(verts, W, single)
        exact = True
    else:
        m = greedy_matching(verts, W, single)
        exact = False
    pairs = tuple(sorted(fixed_pairs + m.pairs))
    return pairs, m.exposed, base + m.total, exact


def _pairing_with_no_goods(X_bar, support, singleton_diag, no_goods, fixed_pairs=(), forbidden=frozenset(), depth=0):
    """Best pairing avoiding every no-good pattern (a pattern is excluded when fully contained)."""
    pairs, exposed, val, exact = best_pairing(X_bar, support, singleton_diag, forbidden, fixed_pairs)
    if val < -1e8:
        return None
    pattern = set(pairs)
    if exposed is not None and singleton_diag:
        pattern.add((exposed, exposed))
    for ng in no_goods:
        if ng <= pattern:
            best = None
            for elem in sorted(ng):
                if elem in fixed_pairs:
                    continue
                sub = _pairing_with_no_goods(X_bar, support, singleton_diag, no_goods, fixed_pairs,
                                             forbidden | {elem}, depth + 1)
                if sub is not None and (best is None or sub[2] > best[2]):
                    best = sub
            return best
    return pairs, exposed, val, exact


def scils_value(X_bar, pairs, singleton, beta):
    lhs = sum(X_bar[i, j] for i, j in pairs)
    if singleton is not None:
        lhs += X_bar[singleton, singleton]
    return float(lhs - beta // 2)


def scils_separate(X_bar, inst, time_limit=None, no_goods=(), fixed_lci=None, fixed_pairs=(), delta=0.0,
                   node_limit=None, min_violation=NUMERIC.cut_violation):
    """Search for a violated SCILS: outer branch and bound on covers, inner pairing.

    For a cover ``C`` with ``beta = |C| - 1`` the pairing is perfect when
    ``|C|`` is even and otherwise leaves one ``i0`` whose diagonal ``X_{i0 i0}``
    is included. Reported violation is ``lhs - floor(beta/2)``. With
    ``fixed_lci`` the support and rhs are taken from the 0/1 version of that
    inequality and only the pairing is optimized, keeping ``fixed_pairs``;
    odd support with odd rhs then drops the diagonal term.
    """
    X_bar = 0.5 * (np.asarray(X_bar, dtype=float) + np.asarray(X_bar, dtype=float).T)
    n = inst.n
    ng_sets = [frozenset(tuple(p) for p in g) for g in no_goods]
    if fixed_lci is not None:
        z = fixed_lci.zero_one()
        support, beta = z.support, int(z.rhs)
        if beta >= len(support):
            return None
        singleton_diag = len(support) % 2 == 1 and beta % 2 == 0
        res = _pairing_with_no_goods(X_bar, support, singleton_diag, ng_sets, fixed_pairs=tuple(fixed_pairs))
        if res is None:
            return None
        pairs, exposed, val, exact = res
        single = exposed if singleton_diag else None
        viol = scils_value(X_bar, pairs, single, beta)
        if viol <= min_violation:
            return None
        cover = Cover.from_items(fixed_lci.cover, inst) if fixed_lci.cover else None
        cut = _scils_cut(n, pairs, single, beta // 2, support, beta, exposed=exposed,
                         meta={"cover": list(fixed_lci.cover), "lifted": True})
        return ScilsSeparation(cover, beta, pairs, single, cut, viol, exact)

    res = scils_search(X_bar, inst, time_limit, ng_sets, delta, node_limit, min_value=min_violation)
    if res is None:
        return None
    alpha, (pairs, exposed, val, exact), optimal = res
    cover = Cover.from_items(np.nonzero(alpha)[0], inst)
    beta = len(cover.items) - 1
    single = exposed if len(cover.items) % 2 == 1 else None
    viol = scils_value(X_bar, pairs, single, beta)
    cut = _scils_cut(n, pairs, single, beta // 2, cover.items, beta, meta={"cover": list(cover.items)})
    return ScilsSeparation(cover, beta, pairs, single, cut, viol, optimal and exact)


def scils_search(X_bar, inst, time_limit=None, no_goods=(), delta=0.0, node_limit=None, min_value=-np.inf):
    """Outer search over covers; returns ``(alpha, pairing, complete)`` or ``None``.

    The objective is ``lhs - floor(beta/2) - delta e'a`` in normalized form
    (half the mixed-integer model's ``trace(XK) - 2v``).
    """
    n = inst.n
    w = inst.w.astype(np.int64)
    need = inst.c + 1
    if int(w.sum()) < need:
        raise NoCoverExists("all items fit")
    Xs = np.asarray(X_bar, dtype=float)
    off = Xs - np.diag(np.diag(Xs))
    cache = {}

    def pairing(alpha):
        key = alpha.tobytes()
        if key not in cache:
            support = tuple(int(i) for i in np.nonzero(alpha)[0])
            cache[key] = _pairing_with_no_goods(Xs, support, len(support) % 2 == 1, no_goods)
        return cache[key]

    def objective(alpha):
        if int(w @ alpha) < need:
            return None
        res = pairing(alpha)
        if res is None:
            return None
        k = int(alpha.sum())
        return res[2] - (k - 1) // 2 - delta * k

    def bound(fixed):
        ones = np.nonzero(fixed == 1)[0]
        free = np.nonzero(fixed == -1)[0]
        cand = np.nonzero(fixed != 0)[0]
        w1 = int(w[ones].sum())
        if w1 + int(w[free].sum()) < need:
            return -np.inf
        # each chosen item is worth at most half its best partner, or its full diagonal if left single
        sub = np.maximum(off[np.ix_(cand, cand)], 0.0)
        best_partner = sub.max(axis=1) if cand.size > 1 else np.zeros(cand.size)
        diag = np.maximum(np.diag(Xs)[cand], 0.0)
        m_val = np.maximum(0.5 * best_partner, diag)
        where = {int(j): t for t, j in enumerate(cand)}
        one_val = sum(m_val[where[int(j)]] for j in ones)
        free_vals = np.sort(np.array([m_val[where[int(j)]] for j in free]))[::-1]
        free_cum = np.concatenate([[0.0], np.cumsum(free_vals)])
        w_cum = np.concatenate([[0], np.cumsum(np.sort(w[free])[::-1])])
        best = -np.inf
        for m in range(0, free.size + 1):
            if w1 + w_cum[m] < need:
                continue
            k = ones.size + m
            cand_val = one_val + free_cum[m] - (k - 1) // 2 - delta * k
            best = max(best, cand_val)
        return best

    greedy = _greedy_cover_by_weight(inst)
    res = binary_bnb(objective, bound, n, time_limit=time_limit, node_limit=node_limit,
                     incumbent=greedy, min_value=min_value)
    if res.alpha is None:
        return None
    return res.alpha, pairing(res.alpha), res.optimal


# --- dominance ---------------------------------------------------------------------


def dominates(cut_a, cut_b, tol=1e-12):
    """True when every nonnegative ``(x, X)`` satisfying ``cut_a`` satisfies ``cut_b``.

    Sufficient coefficientwise test: after scaling positive right-hand sides to
    one, ``cut_a`` has every coefficient at least that of ``cut_b`` and a
    right-hand side no larger.
    """
    if cut_a.n != cut_b.n:
        raise IncomparableFamilies(f"orders {cut_a.n} and {cut_b.n} differ")
    if cut_a.rhs < 0 or cut_b.rhs < 0:
        raise IncomparableFamilies("negative right-hand sides cannot be normalized")
    ra = cut_a.row()
    rb = cut_b.row()
    ha, hb = cut_a.rhs, cut_b.rhs
    if ha > 0 and hb > 0:
        ra, ha = ra / ha, 1.0
        rb, hb = rb / hb, 1.0
    return bool(np.all(ra >= rb - tol) and ha <= hb + tol)


def cut_key(cut, tol=NUMERIC.dedup_tol):
    """Hashable normalized coefficient vector for de-duplication."""
    v = np.concatenate([cut.row(), [cut.rhs]])
    scale = np.abs(v).max()
    if scale > 0:
        v = v / scale
    return tuple(np.round(v / tol).astype(np.int64).tolist())


def validity_violations(cut, inst, points=None):
    """Largest violation of ``cut`` over lifted feasible binary points (brute force)."""
    if points is None:
        points = feasible_points(inst)
    worst = -np.inf
    row = cut.row()
    n = inst.n
    r, c = svec_indices(n)
    for x in points:
        z = np.concatenate([x, x[r] * x[c]])
        worst = max(worst, float(row @ z) - cut.rhs)
    return worst


def feasible_points(inst):
    n = inst.n
    if n > 16:
        raise CombinatorialBudget("brute-force validity limited to n <= 16")
    codes = np.arange(2 ** n)
    bits = ((codes[:, None] >> np.arange(n)[None, :]) & 1).astype(float)
    feas = bits @ inst.w <= inst.c
    return bits[feas]


def lifted_points_matrix(inst):
    """Rows ``(x, svec(xx'))`` for every feasible binary ``x``."""
    pts = feasible_points(inst)
    r, c = svec_indices(inst.n)
    return np.hstack([pts, pts[:, r] * pts[:, c]])


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


__all__ = [
    "Cover", "KnapsackValidIneq", "LiftedCut", "sci_separation", "sci_family", "extend_cover",
    "lift_cover", "cils_build", "cils_separate", "scils_enumerate", "scils_separate",
    "skils_enumerate", "dominates",
]
