"""Polyhedral relaxations of the lifted QKP and the parametric convex QP over them.

Variables are ``z = (x, svec(X))`` with ``svec`` the column-major lower half.
For a perturbation ``Q_p`` with ``Q - Q_p`` negative semidefinite,

    p*(Q_p) = max  x'(Q - Q_p)x + trace(Q_p X)   over (x, X) in P

is an upper bound on the QKP optimum, because every feasible binary ``x``
lifts to ``(x, xx')`` in ``P`` and there the objective equals ``x'Qx``.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .config import NUMERIC
from .cutgen import LiftedCut, cut_key
from .errors import DimensionMismatch, NumericalFailure
from .qpsolver import solve_qp
from .symmat import eig_sym, lambda_max, smat, svec, svec_dim, svec_indices, svec_position

log = logging.getLogger(__name__)


@dataclass
class Polyhedron:
    """Rows ``G z <= h`` and ``A z = b`` on ``z = (x, svec(X))``; every variable lies in ``[0, 1]``."""

    n: int
    kind: str
    G: sp.csr_matrix
    h: np.ndarray
    A: sp.csr_matrix
    b: np.ndarray
    labels: list = field(default_factory=list)

    @property
    def nvars(self):
        return self.n + svec_dim(self.n)

    def contains(self, x, X, tol=1e-9):
        z = lift(x, X)
        if np.any(z < -tol) or np.any(z > 1 + tol):
            return False
        if self.G.shape[0] and np.any(self.G @ z > self.h + tol):
            return False
        return not (self.A.shape[0] and np.any(np.abs(self.A @ z - self.b) > tol))

    def row_violations(self, x, X):
        z = lift(x, X)
        return self.G @ z - self.h


def lift(x, X):
    x = np.asarray(x, dtype=float)
    return np.concatenate([x, svec(np.asarray(X, dtype=float))])


def unlift(z, n):
    return z[:n].copy(), smat(z[n:])


def _x_var(i):
    return i


def _X_var(n, i, j):
    return n + int(svec_position(n)[i, j])


class _RowBuilder:
    def __init__(self, nvars):
        self.nvars = nvars
        self.rows, self.cols, self.vals, self.rhs, self.labels = [], [], [], [], []

    def add(self, coeffs, rhs, label):
        r = len(self.rhs)
        merged = {}
        for j, v in coeffs:
            merged[j] = merged.get(j, 0.0) + float(v)
        for j, v in merged.items():
            if v != 0.0:
                self.rows.append(r)
                self.cols.append(j)
                self.vals.append(v)
        self.rhs.append(float(rhs))
        self.labels.append(label)

    def matrix(self):
        M = sp.csr_matrix((self.vals, (self.rows, self.cols)), shape=(len(self.rhs), self.nvars))
        return M, np.array(self.rhs, dtype=float)


def build_lpr(inst):
    """Knapsack row on ``x`` plus the unit boxes on ``x`` and ``X``."""
    n = inst.n
    nv = n + svec_dim(n)
    ineq = _RowBuilder(nv)
    ineq.add([(_x_var(j), inst.w[j]) for j in range(n)], inst.c, "knapsack")
    G, h = ineq.matrix()
    eq = _RowBuilder(nv)
    A, b = eq.matrix()
    return Polyhedron(n, "lpr", G, h, A, b, ineq.labels)


def build_qpr(inst):
    """LPR plus the knapsack row multiplied by ``x_i`` and by ``1 - x_i``, ``X_ii = x_i`` and ``X_ij <= X_ii``."""
    n = inst.n
    w = inst.w
    c = inst.c
    nv = n + svec_dim(n)
    ineq = _RowBuilder(nv)
    ineq.add([(_x_var(j), w[j]) for j in range(n)], c, "knapsack")
    for i in range(n):
        coeffs = [(_X_var(n, i, j), w[j]) for j in range(n)]
        coeffs.append((_X_var(n, i, i), -c))
        ineq.add(coeffs, 0.0, f"knap*x[{i}]")
    for i in range(n):
        coeffs = []
        for j in range(n):
            if j == i:
                continue
            coeffs.append((_X_var(n, j, j), w[j]))
            coeffs.append((_X_var(n, i, j), -w[j]))
        coeffs.append((_X_var(n, i, i), c))
        ineq.add(coeffs, c, f"knap*(1-x[{i}])")
    for i in range(n):
        for j in range(n):
            if i != j:
                ineq.add([(_X_var(n, i, j), 1.0), (_X_var(n, i, i), -1.0)], 0.0, f"X[{i},{j}]<=X[{i},{i}]")
    G, h = ineq.matrix()
    eq = _RowBuilder(nv)
    for i in range(n):
        eq.add([(_X_var(n, i, i), 1.0), (_x_var(i), -1.0)], 0.0, f"X[{i},{i}]=x[{i}]")
    A, b = eq.matrix()
    return Polyhedron(n, "qpr", G, h, A, b, ineq.labels)


def build_relaxation(inst, kind):
    if kind == "lpr":
        return build_lpr(inst)
    if kind == "qpr":
        return build_qpr(inst)
    raise ValueError(f"unknown relaxation {kind!r}")


class CutPool:
    """Ordered set of lifted cuts, de-duplicated on normalized coefficients."""

    def __init__(self, n):
        self.n = n
        self.cuts = []
        self._keys = set()

    def __len__(self):
        return len(self.cuts)

    def __iter__(self):
        return iter(self.cuts)

    def add(self, cut):
        if cut.n != self.n:
            raise DimensionMismatch(f"cut of order {cut.n} in a pool of order {self.n}")
        key = cut_key(cut)
        if key in self._keys:
            return False
        self._keys.add(key)
        self.cuts.append(cut)
        return True

    def __contains__(self, cut):
        return cut_key(cut) in self._keys

    def counts(self):
        out = {}
        for c in self.cuts:
            out[c.family] = out.get(c.family, 0) + 1
        return out

    def matrix(self):
        if not self.cuts:
            return sp.csr_matrix((0, self.n + svec_dim(self.n))), np.zeros(0)
        rows = np.vstack([c.row() for c in self.cuts])
        return sp.csr_matrix(rows), np.array([c.rhs for c in self.cuts])


@dataclass
class RelaxationSolution:
    x: np.ndarray
    X: np.ndarray
    objective: float
    kkt_residual: float
    cut_duals: np.ndarray
    iterations: int = 0
    status: str = "optimal"


def objective_terms(inst, Qp):
    """``(P, q)`` of the minimization form ``1/2 z'Pz + q'z`` of ``-[x'(Q-Qp)x + trace(Qp X)]``."""
    n = inst.n
    Q = inst.Q.astype(float)
    Qp = np.asarray(Qp, dtype=float)
    m = svec_dim(n)
    P = np.zeros((n + m, n + m))
    P[:n, :n] = 2.0 * (Qp - Q)
    r, c = svec_indices(n)
    lin = np.where(r == c, Qp[r, c], 2.0 * Qp[r, c])
    q = np.concatenate([np.zeros(n), -lin])
    return P, q


def relaxation_objective(inst, Qp, x, X):
    Q = inst.Q.astype(float)
    x = np.asarray(x, dtype=float)
    return float(x @ (Q - Qp) @ x + np.sum(Qp * X))


def _fixed_by_cuts(cuts, nvars):
    # a row with rhs 0 and nonnegative coefficients forces its support to zero
    fixed = np.zeros(nvars, dtype=bool)
    for c in cuts:
        if abs(c.rhs) <= 0.0:
            row = c.row()
            if np.all(row >= 0) and np.any(row > 0):
                fixed |= row > 0
    return fixed


def solve_cqp(poly, cuts, inst, Qp, tol=NUMERIC.qp_tol, check_concavity=True):
    """Maximize ``x'(Q - Qp)x + trace(Qp X)`` over ``poly`` intersected with ``cuts``.

    Variables fixed at zero by a cut are eliminated before the QP solve.
    """
    n = inst.n
    Qp = np.asarray(Qp, dtype=float)
    if Qp.shape != (n, n):
        raise DimensionMismatch(f"Q_p has shape {Qp.shape}, expected {(n, n)}")
    if check_concavity:
        top = lambda_max(inst.Q - Qp)
        scale = max(1.0, float(np.abs(inst.Q).max(initial=0)))
        if top > NUMERIC.psd_tol * scale:
            raise ValueError(f"Q - Q_p is not negative semidefinite (largest eigenvalue {top:.3e})")
    cut_list = list(cuts) if cuts is not None else []
    nv = n + svec_dim(n)
    P, q = objective_terms(inst, Qp)

    Gc, hc = _cut_matrix(cut_list, nv)
    fixed = _fixed_by_cuts(cut_list, nv)
    keep = np.nonzero(~fixed)[0]
    G_all = sp.vstack([poly.G, Gc]).tocsc()[:, keep].tocsr()
    h_all = np.concatenate([poly.h, hc])
    A = poly.A.tocsc()[:, keep].tocsr()
    b = poly.b
    # rows emptied by the elimination are the fixings themselves
    live = np.diff(G_all.indptr) > 0
    G_live, h_live = G_all[live], h_all[live]
    live_eq = np.diff(A.indptr) > 0
    A, b = A[live_eq], b[live_eq]
    k = keep.size
    eye = sp.identity(k, format="csr")
    G = sp.vstack([G_live, -eye, eye]).tocsr()
    h = np.concatenate([h_live, np.zeros(k), np.ones(k)])
    res = solve_qp(P[np.ix_(keep, keep)], q[keep], G, h, A, b, tol=tol)
    if res.kkt_residual > 100 * NUMERIC.kkt_tol:
        raise NumericalFailure(f"relaxation solve stopped at KKT residual {res.kkt_residual:.2e} ({res.status})")
    if res.status != "optimal":
        log.warning("relaxation solve ended with status %s, KKT residual %.2e", res.status, res.kkt_residual)
    z = np.zeros(nv)
    z[keep] = np.clip(res.z, 0.0, 1.0)
    x, X = unlift(z, n)
    duals = np.zeros(len(cut_list))
    lam_live = res.lam[: G_live.shape[0]]
    lam_rows = np.zeros(G_all.shape[0])
    lam_rows[live] = lam_live
    duals[:] = lam_rows[poly.G.shape[0]:]
    return RelaxationSolution(x, X, -res.objective, res.kkt_residual, duals, res.iterations, res.status)


def _cut_matrix(cuts, nv):
    if not cuts:
        return sp.csr_matrix((0, nv)), np.zeros(0)
    return sp.csr_matrix(np.vstack([c.row() for c in cuts])), np.array([c.rhs for c in cuts])


def initial_perturbation(Q, variant="b", divisor=2.0):
    """``Q_p0 = Q - Q_n/divisor`` with ``Q_n`` a negative definite spectral modification of ``Q``.

    Variant ``a`` maps each eigenvalue to ``-|lambda| - 1``; variant ``b`` to
    ``min(lambda, -1e-6)``.
    """
    if divisor <= 0:
        raise ValueError("divisor must be positive")
    Q = np.asarray(Q, dtype=float)
    lam, V = eig_sym(Q)
    if variant == "a":
        d = -np.abs(lam) - 1.0
    elif variant == "b":
        d = np.minimum(lam, -1e-6)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    Qn = (V * d) @ V.T
    Qn = 0.5 * (Qn + Qn.T)
    return Q - Qn / divisor


def dump_qp(poly, cuts, inst, Qp, path):
    """Write the QP in a plain-text triplet format.

    Layout: a ``VARS`` header with the count, one ``NAME`` line per variable,
    ``P i j v`` lines for the upper triangle of the (minimization) Hessian,
    ``q j v`` lines, then ``ROW <sense> <rhs>`` followed by ``j v`` pairs.
    Bounds 0 <= z <= 1 are implicit.
    """
    from .instance import atomic_write_text

    n = inst.n
    r, c = svec_indices(n)
    names = [f"x{i}" for i in range(n)] + [f"X{i}_{j}" for i, j in zip(r, c)]
    P, q = objective_terms(inst, Qp)
    lines = ["# minimize 1/2 z'Pz + q'z, 0 <= z <= 1", f"VARS {len(names)}"]
    lines += [f"NAME {k} {nm}" for k, nm in enumerate(names)]
    iu, ju = np.nonzero(np.triu(P))
    lines += [f"P {i} {j} {P[i, j]!r}" for i, j in zip(iu, ju)]
    lines += [f"q {j} {q[j]!r}" for j in np.nonzero(q)[0]]
    Gc, hc = _cut_matrix(list(cuts or []), len(names))
    for M, rhs, sense in ((sp.vstack([poly.G, Gc]).tocsr(), np.concatenate([poly.h, hc]), "<="),
                          (poly.A.tocsr(), poly.b, "=")):
        for k in range(M.shape[0]):
            lo, hi = M.indptr[k], M.indptr[k + 1]
            lines.append(f"ROW {sense} {rhs[k]!r}")
            lines += [f"  {j} {v!r}" for j, v in zip(M.indices[lo:hi], M.data[lo:hi])]
    atomic_write_text(path, "\n".join(lines) + "\n")


__all__ = [
    "Polyhedron", "CutPool", "RelaxationSolution", "LiftedCut", "build_lpr", "build_qpr",
    "build_relaxation", "solve_cqp", "initial_perturbation", "dump_qp", "lift", "unlift",
]
