import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qkpb.errors import NotPositiveDefinite, SingularMatrix
from qkpb.symmat import (
    eig_sym,
    left_product_operator,
    max_step_psd,
    right_product_operator,
    smat,
    solve_dense,
    svec,
    svec_dim,
    sym,
    sym_product_operator,
)


def rand_sym(rng, n):
    A = rng.standard_normal((n, n))
    return A + A.T


def test_svec_examples():
    assert np.array_equal(svec(np.array([[1, 2], [2, 3]])), [1, 2, 3])
    assert np.array_equal(smat(np.array([1, 2, 3])), [[1, 2], [2, 3]])
    assert np.array_equal(svec(np.eye(3)), [1, 0, 0, 1, 0, 1])
    assert svec_dim(4) == 10


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 8), seed=st.integers(0, 1000))
def test_svec_round_trip(n, seed):
    A = rand_sym(np.random.default_rng(seed), n)
    assert np.allclose(smat(svec(A)), A)


def test_eig_examples():
    lam, _ = eig_sym(np.eye(2))
    assert np.allclose(lam, [1, 1])
    lam, V = eig_sym(np.diag([3.0, -1.0]))
    assert np.allclose(lam, [3, -1])
    assert np.allclose(np.abs(V), np.eye(2))


def test_eig_reconstruction():
    rng = np.random.default_rng(1)
    for n in (2, 5, 9):
        A = rand_sym(rng, n)
        lam, V = eig_sym(A)
        assert np.linalg.norm(A - (V * lam) @ V.T) <= 1e-10 * np.linalg.norm(A)


def test_max_step_examples():
    assert max_step_psd(np.eye(2), -2 * np.eye(2)) == pytest.approx(0.5)
    assert max_step_psd(np.eye(2), np.eye(2)) >= 1e29
    assert max_step_psd(np.diag([2.0, 1.0]), np.diag([-1.0, -4.0])) == pytest.approx(0.25)
    with pytest.raises(NotPositiveDefinite):
        max_step_psd(np.diag([1.0, -1.0]), np.eye(2))


def test_max_step_is_boundary():
    rng = np.random.default_rng(2)
    for _ in range(20):
        B = rng.standard_normal((4, 4))
        Z = B @ B.T + 0.1 * np.eye(4)
        D = rand_sym(rng, 4)
        a = max_step_psd(Z, D)
        if a < 1e29:
            assert np.linalg.eigvalsh(Z + a * D)[0] == pytest.approx(0, abs=1e-8)


def test_solve_dense():
    b = np.array([3.0, -1.0])
    assert np.allclose(solve_dense(np.eye(2), b), b)
    assert np.allclose(solve_dense(np.diag([2.0, 4.0]), [2.0, 8.0]), [1, 2])
    rng = np.random.default_rng(3)
    M = rng.standard_normal((6, 6)) + 6 * np.eye(6)
    r = rng.standard_normal(6)
    x = solve_dense(M, r)
    assert np.linalg.norm(M @ x - r) <= 1e-9 * np.linalg.norm(r)
    with pytest.raises(SingularMatrix):
        solve_dense(np.zeros((2, 2)), b)


def test_product_operators():
    rng = np.random.default_rng(4)
    n = 4
    W = rand_sym(rng, n)
    D = rand_sym(rng, n)
    v = svec(D)
    assert np.allclose(sym_product_operator(W) @ v, svec(sym(W @ D)))
    r, c = np.tril_indices(n)
    lower = lambda M: np.array([M[i, j] for j in range(n) for i in range(j, n)])
    assert np.allclose(left_product_operator(W) @ v, lower(W @ D))
    assert np.allclose(right_product_operator(W) @ v, lower(D @ W))
