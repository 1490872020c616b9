import numpy as np
import pytest

from qkpb.cutgen import (
    Cover,
    KnapsackValidIneq,
    best_pairing,
    cils_build,
    cils_from_ineq,
    cils_objective,
    cils_search,
    cils_separate,
    coefficient_classes,
    cover_inequality,
    ci_cut,
    dominates,
    extend_cover,
    lift_cover,
    lifted_rows,
    minimal_subcover,
    pairs_cut,
    perfect_matchings,
    sci_family,
    sci_separation,
    sci_separation_value,
    scils_count,
    scils_enumerate,
    scils_search,
    scils_separate,
    skils_count,
    skils_enumerate,
    validity_violations,
)
from qkpb.errors import CombinatorialBudget, IncomparableFamilies, NoCoverExists
from qkpb.instance import Instance, generate_random

from oracles import cils_oracle, covers, pairing_oracle, random_point, scils_oracle


def with_cover(n, seed):
    """``generate_random`` instance, skipping seeds where every item fits."""
    while True:
        inst = generate_random(n, seed)
        if inst.w.sum() > inst.c:
            return inst
        seed += 10_000


def inst_w(w, c):
    n = len(w)
    return Instance(np.ones((n, n), dtype=int), w, c)


def coeffs_of(cut):
    return cut.pair_coefficients()


# --- covers and knapsack inequalities ---------------------------------------------


def test_cover_construction(t1):
    cov = Cover.from_items([0, 2], t1)
    assert cov.items == (0, 2) and cov.minimal
    assert not Cover.from_items([0, 1, 2], t1).minimal
    with pytest.raises(ValueError):
        Cover.from_items([0, 1], t1)


def test_extend_cover_example():
    inst = inst_w([4, 4, 5], 7)
    eci = extend_cover(Cover.from_items([0, 1], inst), inst)
    assert eci.coeffs == (1, 1, 1) and eci.rhs == 1
    inst = inst_w([4, 4, 3], 7)
    assert extend_cover(Cover.from_items([0, 1], inst), inst).coeffs == (1, 1, 0)


def test_lift_cover_example():
    inst = inst_w([4, 4, 4, 6], 10)
    lci = lift_cover(Cover.from_items([0, 1, 2], inst), inst)
    assert lci.coeffs == (1, 1, 1, 1) and lci.rhs == 2
    inst = inst_w([4, 4, 4], 10)
    assert lift_cover(Cover.from_items([0, 1, 2], inst), inst).coeffs == (1, 1, 1)


def _valid_on_knapsack(ineq, inst):
    from qkpb.cutgen import feasible_points
    return all(ineq.lhs(x) <= ineq.rhs for x in feasible_points(inst))


def test_knapsack_inequalities_valid():
    rng = np.random.default_rng(0)
    for seed in range(30):
        inst = with_cover(5 + seed % 6, seed)
        a = (rng.random(inst.n) < 0.7).astype(int)
        if a @ inst.w <= inst.c:
            a[:] = 1
        cov = minimal_subcover(Cover.from_items(np.nonzero(a)[0], inst), inst)
        assert cov.minimal
        for ineq in (cover_inequality(cov, inst.n), extend_cover(cov, inst), lift_cover(cov, inst)):
            assert _valid_on_knapsack(ineq, inst)


# --- lifted families ---------------------------------------------------------------


def test_sci_family_example(t1):
    rows = sci_family(Cover.from_items([0, 2], t1), 3)
    r = rows[1]
    assert coeffs_of(r) == {(0, 1): 1.0, (1, 2): 1.0}
    assert r.a_x.tolist() == [0.0, -1.0, 0.0] and r.rhs == 0
    assert all(c.lhs(np.zeros(3), np.zeros((3, 3))) <= 0 for c in rows)


def test_cils_examples():
    c6 = cils_build(range(6), 3, 6)
    assert c6.rhs == 3 and len(coeffs_of(c6)) == 15
    assert cils_build(range(5), 4, 5).rhs == 6
    c = cils_build((0, 2), 1, 3)
    assert c.rhs == 0 and coeffs_of(c) == {(0, 2): 1.0}
    with pytest.raises(ValueError):
        cils_build((0, 1), 2, 3)


def test_scils_enumerate_examples():
    fam = scils_enumerate(range(6), 3, 6)
    assert len(fam) == 15
    assert {(0, 1): 1.0, (2, 3): 1.0, (4, 5): 1.0} in [coeffs_of(c) for c in fam]
    assert all(c.rhs == 1 for c in fam)
    fam = scils_enumerate(range(5), 4, 5)
    assert {(0, 0): 1.0, (1, 2): 1.0, (3, 4): 1.0} in [coeffs_of(c) for c in fam]
    assert all(c.rhs == 2 for c in fam)
    fam = scils_enumerate(range(5), 3, 5)
    assert all((i, i) not in coeffs_of(c) for c in fam for i in range(5))


def test_skils_example():
    ineq = KnapsackValidIneq((2, 2, 1, 1), 3)
    assert coefficient_classes(ineq) == [(1, (2, 3)), (2, (0, 1))]
    loose = skils_enumerate(ineq, tighten=False)
    tight = skils_enumerate(ineq, tighten=True)
    assert len(loose) == 1
    assert coeffs_of(loose[0]) == {(0, 1): 4.0, (2, 3): 2.0} and loose[0].rhs == 3
    assert tight[0].rhs == 2  # no odd class, so the tightening condition holds
    # an odd class with even coefficient triggers the tightening
    odd = skils_enumerate(KnapsackValidIneq((2, 1, 1), 3), tighten=True)
    assert all(c.rhs == 2 for c in odd)
    assert skils_enumerate(KnapsackValidIneq((0, 0), 1), tighten=False)[0].rhs == 1


def test_skils_tightened_rhs_is_valid_on_knapsack_points():
    # 2x1 + 2x2 + x3 + x4 <= 3: X12 is forced to zero and the lhs stays <= 2
    import itertools
    cut = skils_enumerate(KnapsackValidIneq((2, 2, 1, 1), 3), tighten=False)[0]
    worst = -np.inf
    for x in itertools.product((0, 1), repeat=4):
        x = np.array(x, float)
        if np.dot([2, 2, 1, 1], x) <= 3:
            worst = max(worst, cut.lhs(x, np.outer(x, x)))
    assert worst == 2


@pytest.mark.parametrize("gamma", range(2, 9))
def test_counts(gamma):
    assert len(list(perfect_matchings(range(gamma)))) == (scils_count(gamma) if gamma % 2 == 0 else 0)
    assert len(scils_enumerate(range(gamma), gamma - 1, gamma)) == scils_count(gamma)


def test_skils_count_example():
    ineq = KnapsackValidIneq((1, 1, 1, 1, 2, 2, 2), 6)
    assert len(skils_enumerate(ineq)) == skils_count([4, 3]) == 9


def test_enumeration_cap():
    with pytest.raises(CombinatorialBudget):
        scils_enumerate(range(14), 5, 14, cap=1000)


# --- validity ---------------------------------------------------------------------


def test_all_families_valid():
    for seed in range(12):
        inst = with_cover(6 + seed % 5, 100 + seed)
        a = np.ones(inst.n, dtype=int)
        cov = minimal_subcover(Cover.from_items(np.nonzero(a)[0], inst), inst)
        lci = lift_cover(cov, inst)
        cuts = sci_family(cov, inst.n) + lifted_rows(lci) + [ci_cut(lci), cils_from_ineq(lci)]
        if len(cov.items) <= 8:
            cuts += scils_enumerate(cov.items, len(cov.items) - 1, inst.n)
        try:
            cuts += skils_enumerate(lci)
        except CombinatorialBudget:
            pass
        for cut in cuts:
            assert validity_violations(cut, inst) <= 1e-9


# --- separation --------------------------------------------------------------------


def test_sci_separation_examples(t1):
    sep = sci_separation(np.ones(3), np.ones((3, 3)), t1)
    assert sep.value == pytest.approx(3)
    assert sci_separation(np.zeros(3), np.zeros((3, 3)), t1) is None
    with pytest.raises(NoCoverExists):
        sci_separation(np.zeros(2), np.zeros((2, 2)), inst_w([1, 1], 2))


def test_sci_separation_matches_enumeration():
    rng = np.random.default_rng(1)
    for seed in range(20):
        inst = with_cover(4 + seed % 6, seed)
        x, X = random_point(rng, inst.n)
        best = max(sci_separation_value(x, X, a) for a in covers(inst))
        sep = sci_separation(x, X, inst)
        if best <= 0:
            assert sep is None
        else:
            assert sep.value == pytest.approx(best)
            rows = sci_family(sep.cover, inst.n)
            assert sum(r.violation(x, X) for r in rows) == pytest.approx(best)


def test_cils_separation_examples(t1):
    sep = cils_separate(np.ones((3, 3)), t1)
    assert sep.cover.items == (0, 1, 2) and sep.beta == 2
    assert cils_objective(np.ones((3, 3)), np.ones(3, dtype=int)) == 4
    assert sep.violation == pytest.approx(2)  # X12 + X13 + X23 = 3 against rhs 1
    assert cils_separate(np.zeros((3, 3)), t1) is None
    # banning (1,1,1) leaves the two-item covers, whose value 2 - 0 is positive
    sep = cils_separate(np.ones((3, 3)), t1, no_goods=[np.ones(3, dtype=int)])
    assert sep is not None and len(sep.cover.items) == 2


def test_cils_search_matches_enumeration():
    rng = np.random.default_rng(2)
    for seed in range(15):
        inst = with_cover(5 + seed % 6, 200 + seed)
        _, X = random_point(rng, inst.n)
        res = cils_search(X, inst)
        assert res.optimal
        assert res.value == pytest.approx(cils_oracle(X, inst))


def test_scils_separation_examples(t1):
    sep = scils_separate(np.ones((3, 3)), t1)
    assert sep is not None
    assert sep.violation == pytest.approx(1)  # lhs 2 against rhs 1; MILP value 2 in doubled form
    # ties with the full cover, whose best partition X11 + X23 also exceeds 1 by 1
    assert scils_oracle(np.ones((3, 3)), t1) == pytest.approx(1)
    assert sep.cut.violation(np.zeros(3), np.ones((3, 3))) == pytest.approx(sep.violation)
    assert scils_separate(np.zeros((3, 3)), t1) is None


def test_scils_no_goods_exclude_patterns(t1):
    X = np.ones((3, 3))
    seen = []
    for _ in range(3):
        sep = scils_separate(X, t1, no_goods=seen)
        assert sep is not None and sep.pattern not in seen
        seen.append(sep.pattern)


def test_pairing_matches_enumeration():
    rng = np.random.default_rng(3)
    for k in range(1, 9):
        _, X = random_point(rng, 9)
        support = tuple(sorted(rng.choice(9, k, replace=False)))
        for diag in (True, False):
            _, _, val, exact = best_pairing(X, support, diag)
            assert exact and val == pytest.approx(pairing_oracle(X, support, diag))


def test_scils_search_matches_enumeration():
    rng = np.random.default_rng(4)
    for seed in range(12):
        inst = with_cover(5 + seed % 5, 300 + seed)
        _, X = random_point(rng, inst.n)
        alpha, pairing, complete = scils_search(X, inst)
        k = int(alpha.sum())
        assert complete
        assert pairing[2] - (k - 1) // 2 == pytest.approx(scils_oracle(X, inst))


def test_scils_fixed_lci_path():
    inst = inst_w([4, 4, 4, 6, 5], 10)
    lci = lift_cover(Cover.from_items([0, 1, 2], inst), inst)
    X = np.ones((5, 5))
    sep = scils_separate(X, inst, fixed_lci=lci, fixed_pairs=[(0, 1)])
    assert (0, 1) in sep.pairs
    assert validity_violations(sep.cut, inst) <= 1e-9


# --- dominance ---------------------------------------------------------------------


def test_lifted_cover_dominance_random():
    rng = np.random.default_rng(5)
    for trial in range(100):
        inst = with_cover(int(rng.integers(4, 11)), 1000 + trial)
        a = (rng.random(inst.n) < 0.8).astype(int)
        if a @ inst.w <= inst.c:
            a[:] = 1
        cov = minimal_subcover(Cover.from_items(np.nonzero(a)[0], inst), inst)
        ci = cover_inequality(cov, inst.n)
        lci = lift_cover(cov, inst)
        for r_l, r_c in zip(lifted_rows(lci), lifted_rows(ci)):
            assert dominates(r_l, r_c)
        if len(cov.items) >= 2:
            assert dominates(cils_from_ineq(lci), cils_from_ineq(ci))


def test_dominance_errors():
    a = cils_build((0, 1, 2), 2, 3)
    with pytest.raises(IncomparableFamilies):
        dominates(a, cils_build((0, 1, 2), 2, 4))
    neg = pairs_cut(3, {(0, 1): 1.0}, -1.0, "CI")
    with pytest.raises(IncomparableFamilies):
        dominates(a, neg)
