"""Dense symmetric-matrix kernel.

``svec`` stacks the lower half column by column,
``(a11, ..., an1, a22, ..., an2, ..., ann)``, with no off-diagonal scaling;
``smat`` is its inverse. The remaining helpers are what the perturbation
interior-point method needs each iteration.
"""

from functools import lru_cache

import warnings

import numpy as np
import scipy.linalg as sla

from .config import NUMERIC
from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    NotPositiveDefinite,
    SingularMatrix,
)


def svec_dim(n):
    return n * (n + 1) // 2


def order_from_svec_dim(m):
    n = int(round((np.sqrt(8 * m + 1) - 1) / 2))
    if svec_dim(n) != m:
        raise DimensionMismatch(f"length {m} is not a triangular number")
    return n


@lru_cache(maxsize=64)
def svec_indices(n):
    """Row and column index arrays of the svec ordering (``rows >= cols``)."""
    rows, cols = [], []
    for j in range(n):
        for i in range(j, n):
            rows.append(i)
            cols.append(j)
    r = np.array(rows, dtype=np.intp)
    c = np.array(cols, dtype=np.intp)
    r.flags.writeable = False
    c.flags.writeable = False
    return r, c


@lru_cache(maxsize=64)
def svec_position(n):
    """``pos[i, j]``: position of entry (i, j) (either triangle) in ``svec``."""
    r, c = svec_indices(n)
    pos = np.empty((n, n), dtype=np.intp)
    pos[r, c] = np.arange(len(r))
    pos[c, r] = np.arange(len(r))
    pos.flags.writeable = False
    return pos


def svec(A):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"svec needs a square matrix, got shape {A.shape}")
    r, c = svec_indices(A.shape[0])
    return A[r, c].copy()


def smat(v):
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise DimensionMismatch("smat needs a 1-d vector")
    n = order_from_svec_dim(v.size)
    return v[svec_position(n)]


def sym(M):
    return 0.5 * (M + M.T)


def eig_sym(A):
    """Eigenvalues in descending order and matching orthonormal eigenvectors."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"eig_sym needs a square matrix, got shape {A.shape}")
    try:
        vals, vecs = np.linalg.eigh(sym(A))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def lambda_min(A):
    return float(np.linalg.eigvalsh(sym(np.asarray(A, dtype=float)))[0])


def lambda_max(A):
    return float(np.linalg.eigvalsh(sym(np.asarray(A, dtype=float)))[-1])


def is_psd(A, tol=NUMERIC.psd_tol):
    A = np.asarray(A, dtype=float)
    scale = max(1.0, float(np.abs(A).max(initial=0.0)))
    return lambda_min(A) >= -tol * scale


def max_step_psd(Z, D, sentinel=NUMERIC.step_sentinel):
    """Largest ``a >= 0`` with ``Z + a*D`` positive semidefinite.

    ``Z`` must be positive definite. The answer is ``-1/lambda_min(L^-1 D L^-T)``
    for the Cholesky factor ``L`` of ``Z``, or ``sentinel`` when ``D`` does not
    point out of the cone.
    """
    Z = np.asarray(Z, dtype=float)
    D = np.asarray(D, dtype=float)
    if Z.shape != D.shape:
        raise DimensionMismatch(f"{Z.shape} vs {D.shape}")
    try:
        L = np.linalg.cholesky(sym(Z))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("Z fails Cholesky") from exc
    Linv_D = sla.solve_triangular(L, sym(D), lower=True)
    M = sla.solve_triangular(L, Linv_D.T, lower=True)
    lam = float(np.linalg.eigvalsh(sym(M))[0])
    if lam >= 0.0:
        return sentinel
    return min(-1.0 / lam, sentinel)


def solve_dense(M, b, rel_tol=NUMERIC.solve_rel_tol):
    """Solve ``M x = b`` with partial-pivoting LU; raise SingularMatrix on breakdown."""
    M = np.asarray(M, dtype=float)
    b = np.asarray(b, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] != b.shape[0]:
        raise DimensionMismatch(f"cannot solve {M.shape} system with rhs {b.shape}")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu, piv = sla.lu_factor(M, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SingularMatrix(str(exc)) from exc
    if np.any(np.abs(np.diag(lu)) <= np.finfo(float).tiny):
        raise SingularMatrix("exactly singular pivot")
    x = sla.lu_solve((lu, piv), b)
    if not np.all(np.isfinite(x)):
        raise SingularMatrix("non-finite solution")
    res = np.linalg.norm(M @ x - b)
    bound = rel_tol * (np.linalg.norm(M, 2) * np.linalg.norm(x) + np.linalg.norm(b))
    if res > bound:
        raise SingularMatrix(f"residual {res:.3e} above {bound:.3e}")
    return x


@lru_cache(maxsize=32)
def _duplication(n):
    # vec (column-major, length n*n) <- svec: vec = v[dup]
    dup = svec_position(n).T.reshape(-1).copy()
    r, c = svec_indices(n)
    lower_in_vec = c * n + r
    return dup, lower_in_vec


def sym_product_operator(W):
    """Matrix of ``v -> svec(sym(W @ smat(v)))`` on svec space.

    For symmetric ``S``, ``sym(W S) = (W S + S W)/2``; the columns are assembled
    from the Kronecker form and folded back onto the svec coordinates.
    """
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    dup, lower = _duplication(n)
    eye = np.eye(n)
    K = 0.5 * (np.kron(eye, W) + np.kron(W, eye))  # acts on column-major vec
    rows = K[lower, :]
    m = svec_dim(n)
    T = np.zeros((m, m))
    # fold duplicated vec columns onto their svec index
    np.add.at(T.T, dup, rows.T)
    return T


def _product_operator(K, n):
    dup, lower = _duplication(n)
    rows = K[lower, :]
    m = svec_dim(n)
    T = np.zeros((m, m))
    np.add.at(T.T, dup, rows.T)
    return T


def left_product_operator(W):
    """Matrix of ``v -> svec(W @ smat(v))``, svec taking the lower half of the (nonsymmetric) product."""
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    return _product_operator(np.kron(np.eye(n), W), n)


def right_product_operator(W):
    """Matrix of ``v -> svec(smat(v) @ W)`` in the same sense."""
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    return _product_operator(np.kron(W.T, np.eye(n)), n)
