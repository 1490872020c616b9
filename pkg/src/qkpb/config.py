"""Numeric tolerances shared by the kernels and solvers."""

from dataclasses import dataclass


@dataclass(frozen=True)
class NumericConfig:
    eig_rel_tol: float = 1e-10
    step_sentinel: float = 1e30  # returned by max_step_psd when the ray never leaves the cone
    solve_rel_tol: float = 1e-9
    psd_tol: float = 1e-9
    qp_tol: float = 1e-10
    qp_max_iter: int = 200
    kkt_tol: float = 1e-7
    bfgs_curvature: float = 1e-8
    mu_floor: float = 1e-12
    ipm_residual_tol: float = 1e-7
    cut_violation: float = 1e-6
    dedup_tol: float = 1e-9
    tie_tol: float = 1e-9


NUMERIC = NumericConfig()
