"""Primal-dual interior-point method over the perturbation ``Q_p``.

Minimizes the convex bound function ``p*(Q_p)`` subject to ``Z = Q_p - Q``
positive semidefinite. The barrier optimality conditions are

    grad p*(Q_p) - Lam = 0,   Q - Q_p + Z = 0,   Z Lam - mu I = 0,

and each iteration takes one Newton step on them with the Hessian of ``p*``
replaced by a BFGS matrix ``B`` acting on svec space.
"""

import csv
import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from .config import NUMERIC
from .errors import SingularMatrix
from .symmat import (
    lambda_min,
    left_product_operator,
    max_step_psd,
    right_product_operator,
    smat,
    solve_dense,
    svec,
    svec_dim,
    svec_indices,
    sym,
    sym_product_operator,
)

log = logging.getLogger(__name__)

TAU_ALPHA = 0.95
TAU_MU = 0.9


@dataclass
class IpmState:
    k: int
    Qp: np.ndarray
    Z: np.ndarray
    Lam: np.ndarray
    B: np.ndarray
    mu: float
    grad: np.ndarray
    sol: object

    @property
    def n(self):
        return self.Qp.shape[0]

    @property
    def bound(self):
        return self.sol.objective


@dataclass(frozen=True)
class Residuals:
    Rd: np.ndarray
    Rp: np.ndarray
    Rc: np.ndarray

    def norms(self):
        return (float(np.linalg.norm(self.Rd)), float(np.linalg.norm(self.Rp)), float(np.linalg.norm(self.Rc)))


@dataclass(frozen=True)
class Direction:
    dQp: np.ndarray
    dLam: np.ndarray
    dZ: np.ndarray


@dataclass(frozen=True)
class TraceRow:
    k: int
    pstar: float
    norm_rd: float
    norm_rp: float
    norm_rc: float
    mu: float
    alpha_p: float
    alpha_d: float
    bfgs_skipped: bool


TRACE_COLUMNS = [f.name for f in TraceRow.__dataclass_fields__.values()]


def gradient_pstar(sol):
    """``X - xx'`` at the relaxation optimum."""
    x = np.asarray(sol.x, dtype=float)
    return sym(np.asarray(sol.X, dtype=float) - np.outer(x, x))


def init_state(inst, Qp0, sol0):
    Qp0 = sym(np.asarray(Qp0, dtype=float))
    Z = Qp0 - inst.Q
    g = gradient_pstar(sol0)
    shift = 2.0 * abs(lambda_min(g)) + 0.1
    Lam = g + shift * np.eye(inst.n)
    return IpmState(0, Qp0, Z, Lam, np.eye(svec_dim(inst.n)), 1.0, g, sol0)


def residuals(state, Q):
    n = state.n
    Rd = state.grad - state.Lam
    Rp = np.asarray(Q, dtype=float) - state.Qp + state.Z
    Rc = state.Z @ state.Lam - state.mu * np.eye(n)
    return Residuals(Rd, Rp, Rc)


def bfgs_update(B, Qp_old, Qp_new, grad_old, grad_new, curvature=NUMERIC.bfgs_curvature):
    """Rank-two BFGS update on svec space; returns ``B`` itself when the update is skipped.

    Skipped when ``svec(Y).svec(S) <= curvature * |svec S| |svec Y|``, which keeps
    ``B`` positive definite.
    """
    s = svec(np.asarray(Qp_new) - np.asarray(Qp_old))
    y = svec(np.asarray(grad_new) - np.asarray(grad_old))
    upsilon = float(y @ s)
    if upsilon <= curvature * np.linalg.norm(s) * np.linalg.norm(y) or upsilon <= 0.0:
        return B
    Bs = B @ s
    omega = float(s @ Bs)
    if omega <= 0.0:
        return B
    Bn = B + np.outer(y, y) / upsilon - np.outer(Bs, Bs) / omega
    return 0.5 * (Bn + Bn.T)


def newton_operator(state, form="sym"):
    """Matrix on svec space of ``d -> Z smat(B d) + smat(d) Lam`` projected to svec.

    ``form="sym"`` takes the symmetric part of the product before ``svec``;
    ``form="lower"`` keeps the lower half of the unsymmetrized product.
    """
    if form == "sym":
        return sym_product_operator(state.Z) @ state.B + sym_product_operator(state.Lam)
    if form == "lower":
        return left_product_operator(state.Z) @ state.B + right_product_operator(state.Lam)
    raise ValueError(f"unknown direction form {form!r}")


def direction_rhs(state, res, form="sym"):
    M = -res.Rc - state.Z @ res.Rd + res.Rp @ state.Lam
    return svec(sym(M)) if form == "sym" else _lower(M)


def _lower(M):
    r, c = svec_indices(M.shape[0])
    return M[r, c]


def direction_solve(state, res, form="sym"):
    """Newton direction by eliminating ``dLam`` and ``dZ``.

    Solves ``Z smat(B d) + smat(d) Lam = -Rc - Z Rd + Rp Lam`` projected to svec
    space (see :func:`newton_operator`), then ``dLam = smat(B d) + Rd`` and
    ``dZ = smat(d) - Rp``.
    """
    M = newton_operator(state, form)
    d = solve_dense(M, direction_rhs(state, res, form))
    dQ = smat(d)
    dLam = smat(state.B @ d) + res.Rd
    dZ = dQ - res.Rp
    return Direction(dQ, dLam, dZ)


def newton_residual(state, res, direc, form="sym"):
    """Scaled residuals of the three linearized equations at ``direc``.

    The complementarity equation is measured after the same projection the
    solve used.
    """
    Bd = smat(state.B @ svec(direc.dQp))
    r1 = Bd - direc.dLam + res.Rd
    r2 = -direc.dQp + direc.dZ + res.Rp
    M3 = direc.dZ @ state.Lam + state.Z @ direc.dLam + res.Rc
    r3 = svec(sym(M3)) if form == "sym" else _lower(M3)
    scale = 1.0 + max(np.abs(res.Rd).max(), np.abs(res.Rp).max(), np.abs(res.Rc).max())
    return max(np.abs(r1).max(), np.abs(r2).max(), np.abs(r3).max()) / scale


def ipm_iterate(state, Q, solve, form="sym"):
    """One full iteration; ``solve(Qp)`` must return the relaxation optimum at ``Qp``.

    Returns ``(new_state, TraceRow)``.
    """
    Q = np.asarray(Q, dtype=float)
    n = state.n
    res = residuals(state, Q)
    try:
        direc = direction_solve(state, res, form)
    except SingularMatrix:
        log.info("direction solve broke down at k=%d; resetting B to identity", state.k)
        state.B = np.eye(svec_dim(n))
        direc = direction_solve(state, res, form)
    a_p = TAU_ALPHA * min(1.0, max_step_psd(state.Z, direc.dZ))
    a_d = TAU_ALPHA * min(1.0, max_step_psd(state.Lam, direc.dLam))
    # Z is the primary iterate: near the cone boundary its small eigenvalues
    # are far below the rounding level of Q_p, so Q_p is rebuilt from it
    Z = sym(state.Z + a_p * direc.dZ)
    Qp = Q + Z
    Lam = sym(state.Lam + a_d * direc.dLam)
    sol = solve(Qp)
    grad = gradient_pstar(sol)
    B = bfgs_update(state.B, state.Qp, Qp, state.grad, grad)
    skipped = B is state.B
    mu = max(TAU_MU * float(np.trace(Z @ Lam)) / n, NUMERIC.mu_floor)
    new = IpmState(state.k + 1, Qp, Z, Lam, B, mu, grad, sol)
    rd, rp, rc = res.norms()
    row = TraceRow(new.k, float(sol.objective), rd, rp, rc, mu, float(a_p), float(a_d), bool(skipped))
    return new, row


@dataclass
class IpmTrace:
    rows: list = field(default_factory=list)

    def append(self, row):
        self.rows.append(row)

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            wr = csv.DictWriter(fh, fieldnames=TRACE_COLUMNS)
            wr.writeheader()
            for r in self.rows:
                wr.writerow(asdict(r))


def run_ipm(inst, Qp0, solve, max_iter, residual_tol=NUMERIC.ipm_residual_tol, form="sym"):
    """Plain IPM loop without cuts; returns the final state, the bound history and the trace."""
    state = init_state(inst, Qp0, solve(Qp0))
    history = [state.bound]
    trace = IpmTrace()
    for _ in range(max_iter):
        state, row = ipm_iterate(state, inst.Q, solve, form)
        trace.append(row)
        history.append(state.bound)
        r = residuals(state, inst.Q)
        if max(r.norms()) <= residual_tol and state.mu <= NUMERIC.mu_floor:
            break
    return state, history, trace
