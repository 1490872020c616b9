"""Primal-dual interior-point method for small dense convex QPs.

Solves::

    min  1/2 z'Pz + q'z   s.t.  G z <= h,  A z = b

with Mehrotra's predictor-corrector. ``G`` and ``A`` may be scipy sparse
matrices; the reduced Newton matrix ``P + G'WG`` is formed densely and
factored by Cholesky, with equalities handled through the Schur complement.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .config import NUMERIC
from .errors import Infeasible, NumericalFailure

log = logging.getLogger(__name__)

REFINE_STEPS = 3
NEIGHBOURHOOD = 1e-2
INFEASIBLE_MULTIPLIER = 1e10
DIVERGENCE_FACTOR = 1e4  # residual growth over the best seen that ends the run


@dataclass
class QPResult:
    z: np.ndarray
    s: np.ndarray  # inequality slacks
    lam: np.ndarray  # inequality multipliers
    nu: np.ndarray  # equality multipliers
    objective: float  # 1/2 z'Pz + q'z
    iterations: int
    primal_residual: float
    dual_residual: float
    gap: float
    status: str

    @property
    def kkt_residual(self):
        return max(self.primal_residual, self.dual_residual, self.gap)


def solve_qp(P, q, G, h, A=None, b=None, tol=NUMERIC.qp_tol, max_iter=NUMERIC.qp_max_iter):
    P = np.asarray(P, dtype=float)
    q = np.asarray(q, dtype=float)
    nz = q.size
    G = sp.csr_matrix(G)
    h = np.asarray(h, dtype=float)
    if A is None:
        A = sp.csr_matrix((0, nz))
        b = np.zeros(0)
    A = sp.csr_matrix(A)
    b = np.asarray(b, dtype=float)
    m, p = G.shape[0], A.shape[0]
    Gt = G.T.tocsr()
    Ad = A.toarray()

    scale_h = 1.0 + max(np.linalg.norm(h, np.inf), np.linalg.norm(b, np.inf) if p else 0.0)
    scale_q = 1.0 + np.linalg.norm(q, np.inf)

    def reduced_matrix(wdiag):
        return P + (Gt @ sp.diags(wdiag) @ G).toarray()

    def factor(H):
        H = 0.5 * (H + H.T)
        try:
            cf = sla.cho_factor(H, lower=True, check_finite=False)
        except np.linalg.LinAlgError:
            reg = 1e-14 * max(1.0, np.abs(np.diag(H)).max())
            try:
                cf = sla.cho_factor(H + reg * np.eye(nz), lower=True, check_finite=False)
            except np.linalg.LinAlgError as exc:
                raise NumericalFailure("reduced KKT matrix is not positive definite") from exc
        S = None
        if p:
            HiAt = sla.cho_solve(cf, Ad.T, check_finite=False)
            S = Ad @ HiAt
            S = 0.5 * (S + S.T)
            try:
                S = ("chol", sla.cho_factor(S, lower=True, check_finite=False))
            except np.linalg.LinAlgError:
                S = ("lu", sla.lu_factor(S, check_finite=False))
        return cf, S

    def kkt_solve(fac, r1, r2):
        # [H A'; A 0] [dz; dnu] = [r1; r2]
        cf, S = fac
        Hr1 = sla.cho_solve(cf, r1, check_finite=False)
        if not p:
            return Hr1, np.zeros(0)
        rhs = Ad @ Hr1 - r2
        kind, f = S
        dnu = sla.cho_solve(f, rhs, check_finite=False) if kind == "chol" else sla.lu_solve(f, rhs)
        dz = Hr1 - sla.cho_solve(cf, Ad.T @ dnu, check_finite=False)
        return dz, dnu

    # initial point: least-squares fit of the constraints, then shift into the cone
    fac = factor(reduced_matrix(np.ones(m)))
    z, nu = kkt_solve(fac, -q + Gt @ h, b)
    s = h - G @ z
    lam = np.ones(m)
    shift = -s.min() if m else 0.0
    if shift >= -1e-8:
        s = s + 1.0 + max(shift, 0.0)
    status = "max_iter"
    it = 0
    best, best_res = None, np.inf
    for it in range(1, max_iter + 1):
        rd = P @ z + q + Gt @ lam + (A.T @ nu if p else 0.0)
        rp_in = G @ z + s - h
        rp_eq = A @ z - b if p else np.zeros(0)
        mu = float(s @ lam) / max(m, 1)
        pobj = 0.5 * z @ P @ z + q @ z
        pres = max(np.linalg.norm(rp_in, np.inf), np.linalg.norm(rp_eq, np.inf) if p else 0.0) / scale_h
        dres = np.linalg.norm(rd, np.inf) / scale_q
        gap = float(s @ lam) / (1.0 + abs(pobj))
        log.debug("qp it=%d pres=%.2e dres=%.2e gap=%.2e", it, pres, dres, gap)
        if pres <= tol and dres <= tol and gap <= tol:
            status = "optimal"
            break
        res = max(pres, dres, gap)
        if res < best_res:
            best, best_res = (z.copy(), s.copy(), lam.copy(), nu.copy()), res
        elif res > DIVERGENCE_FACTOR * max(best_res, tol):
            # past the attainable accuracy the iterates drift; fall back to the best one
            status = "stalled"
            break
        wdiag = lam / s

        def direction(rc):
            # rc is the target complementarity residual s*lam - sigma*mu - correction
            r1 = -rd - Gt @ (wdiag * rp_in - rc / s)
            dz, dnu = kkt_solve(fac, r1, -rp_eq)
            dlam = wdiag * (G @ dz + rp_in) - rc / s
            # iterative refinement on the unreduced dual and equality rows
            for _ in range(REFINE_STEPS):
                e1 = -rd - (P @ dz + Gt @ dlam + (A.T @ dnu if p else 0.0))
                e2 = -rp_eq - (A @ dz if p else np.zeros(0))
                if max(np.abs(e1).max(initial=0.0), np.abs(e2).max(initial=0.0)) <= 1e-15 * scale_q:
                    break
                cz, cnu = kkt_solve(fac, e1, e2)
                dz = dz + cz
                dnu = dnu + cnu
                dlam = dlam + wdiag * (G @ cz)
            ds = -rp_in - G @ dz
            return dz, ds, dlam, dnu

        try:
            fac = factor(reduced_matrix(wdiag))
            dz_a, ds_a, dl_a, dnu_a = direction(s * lam)
        except (NumericalFailure, ValueError, np.linalg.LinAlgError):
            status = "numerical"
            break

        ap = min(1.0, _max_step(s, ds_a))
        ad = min(1.0, _max_step(lam, dl_a))
        mu_aff = float((s + ap * ds_a) @ (lam + ad * dl_a)) / max(m, 1)
        sigma = (mu_aff / mu) ** 3 if mu > 0 else 0.0
        infeas = max(pres, dres)
        if it == 1:
            mu0, infeas0 = mu, max(infeas, 1e-300)
        # keep complementarity from outrunning feasibility (path-following neighbourhood)
        target = max(sigma * mu, NEIGHBOURHOOD * mu0 * infeas / infeas0)
        rc = s * lam - target + ds_a * dl_a
        dz, ds, dl, dnu = direction(rc)
        # one step length for both sides: the dual residual couples z and lam through P
        step = min(1.0, 0.99 * min(_max_step(s, ds), _max_step(lam, dl)))
        if log.isEnabledFor(logging.DEBUG):
            bs, bl = _argmax_step(s, ds), _argmax_step(lam, dl)
            log.debug("   step=%.2e s-block row %s (s=%.1e lam=%.1e) lam-block row %s (s=%.1e lam=%.1e) sigma=%.2e",
                      step, bs, s[bs] if bs is not None else 0, lam[bs] if bs is not None else 0,
                      bl, s[bl] if bl is not None else 0, lam[bl] if bl is not None else 0, sigma)
        z = z + step * dz
        s = s + step * ds
        lam = lam + step * dl
        nu = nu + step * dnu
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(lam))):
            if best is None:
                raise NumericalFailure("interior-point iterates diverged")
            status = "numerical"
            break
        if pres > 1e-6 and np.linalg.norm(lam, np.inf) > INFEASIBLE_MULTIPLIER:
            raise Infeasible("relaxation appears infeasible: multipliers grow while the residual stays")
    def residuals(z, s, lam, nu):
        rd = P @ z + q + Gt @ lam + (A.T @ nu if p else 0.0)
        rp_in = G @ z + s - h
        rp_eq = A @ z - b if p else np.zeros(0)
        pobj = float(0.5 * z @ P @ z + q @ z)
        pres = max(np.linalg.norm(rp_in, np.inf), np.linalg.norm(rp_eq, np.inf) if p else 0.0) / scale_h
        dres = np.linalg.norm(rd, np.inf) / scale_q
        gap = float(s @ lam) / (1.0 + abs(pobj))
        return pobj, pres, dres, gap

    pobj, pres, dres, gap = residuals(z, s, lam, nu)
    if status != "optimal" and best is not None and not max(pres, dres, gap) <= best_res:
        z, s, lam, nu = best
        pobj, pres, dres, gap = residuals(z, s, lam, nu)
    if status != "optimal":
        if pres > 1e-6 and np.linalg.norm(lam, np.inf) > INFEASIBLE_MULTIPLIER:
            raise Infeasible("relaxation appears infeasible")
        log.debug("QP stopped (%s) after %d iterations: pres=%.2e dres=%.2e gap=%.2e",
                  status, it, pres, dres, gap)
    return QPResult(z, s, lam, nu, pobj, it, pres, dres, gap, status)


def _max_step(v, dv):
    neg = dv < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-v[neg] / dv[neg]))


def _argmax_step(v, dv):
    neg = np.nonzero(dv < 0)[0]
    if neg.size == 0:
        return None
    return int(neg[np.argmin(-v[neg] / dv[neg])])
