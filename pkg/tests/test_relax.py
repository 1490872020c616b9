import numpy as np
import pytest

from qkpb.cutgen import cils_build
from qkpb.instance import generate_random
from qkpb.relax import (
    CutPool,
    build_lpr,
    build_qpr,
    build_relaxation,
    initial_perturbation,
    lift,
    relaxation_objective,
    solve_cqp,
    unlift,
)
from qkpb.symmat import lambda_max

from conftest import binary_points


def test_lpr_shape(t1):
    poly = build_lpr(t1)
    assert poly.G.shape[0] == 1 and poly.A.shape[0] == 0
    assert poly.contains(np.zeros(3), np.zeros((3, 3)))


@pytest.mark.parametrize("kind", ["lpr", "qpr"])
def test_feasible_binaries_lie_inside(kind):
    for seed in range(3):
        inst = generate_random(6, seed)
        poly = build_relaxation(inst, kind)
        for x in binary_points(6):
            if inst.w @ x <= inst.c:
                assert poly.contains(x, np.outer(x, x))


def test_qpr_rows_on_t1(t1):
    poly = build_qpr(t1)
    x = np.array([1.0, 1.0, 0.0])
    assert poly.contains(x, np.outer(x, x))
    e = np.ones(3)
    viol = poly.row_violations(e, np.ones((3, 3)))
    # row for i=1 of sum_j w_j X_1j <= c X_11 reads 9 <= 5
    assert viol.max() >= 4 - 1e-12
    assert np.any(np.isclose(viol, 4.0))


def test_lift_round_trip():
    rng = np.random.default_rng(0)
    x = rng.random(4)
    X = rng.random((4, 4))
    X = X + X.T
    x2, X2 = unlift(lift(x, X), 4)
    assert np.allclose(x2, x) and np.allclose(X2, X)


def test_lpr_at_q_is_22(t1):
    sol = solve_cqp(build_lpr(t1), [], t1, t1.Q.astype(float))
    assert sol.objective == pytest.approx(22.0, abs=1e-6)
    assert np.allclose(sol.X, 1.0, atol=1e-6)


@pytest.mark.parametrize("variant", ["a", "b"])
def test_qpr_bound_above_optimum(t1, variant):
    Qp = initial_perturbation(t1.Q, variant)
    sol = solve_cqp(build_qpr(t1), [], t1, Qp)
    assert sol.objective >= 13 - 1e-6
    assert sol.objective == pytest.approx(relaxation_objective(t1, Qp, sol.x, sol.X), abs=1e-6)


def test_zero_objective_limit():
    from qkpb.instance import Instance
    inst = Instance(np.zeros((3, 3), dtype=int), [1, 2, 3], 3)
    for eps in (1e-1, 1e-3):
        sol = solve_cqp(build_qpr(inst), [], inst, eps * np.eye(3))
        assert -1e-8 <= sol.objective <= 3 * eps + 1e-8
    with pytest.raises(ValueError):
        solve_cqp(build_qpr(inst), [], inst, -np.eye(3))


def test_cuts_tighten_bound(t1):
    poly = build_lpr(t1)
    base = solve_cqp(poly, [], t1, t1.Q.astype(float)).objective
    pool = CutPool(3)
    assert pool.add(cils_build((0, 1, 2), 1, 3))
    assert not pool.add(cils_build((0, 1, 2), 1, 3))
    sol = solve_cqp(poly, pool.cuts, t1, t1.Q.astype(float))
    assert sol.objective < base
    assert sol.X[0, 1] == pytest.approx(0, abs=1e-9)


def test_initial_perturbation_examples():
    assert np.allclose(initial_perturbation(np.eye(2), "b", 2.0), (1 + 5e-7) * np.eye(2))
    assert np.allclose(initial_perturbation(np.diag([2.0, -3.0]), "a", 2.0), np.diag([3.5, -1.0]))
    rng = np.random.default_rng(5)
    for _ in range(10):
        A = rng.integers(0, 50, (5, 5))
        Q = A + A.T
        for v in "ab":
            assert lambda_max(Q - initial_perturbation(Q, v)) < 0
