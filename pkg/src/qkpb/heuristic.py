"""Rounding heuristic: best rank-one approximation of ``X`` rounded to a feasible 0/1 point."""

from dataclasses import dataclass

import numpy as np

from .config import NUMERIC
from .errors import DegenerateInput, DimensionMismatch
from .symmat import eig_sym


@dataclass(frozen=True)
class HeuristicResult:
    x: tuple
    value: int
    eigenvalue: float

    @property
    def array(self):
        return np.array(self.x, dtype=np.int64)


def spectral_point(X_bar):
    """``sqrt(lambda_max) v`` for the top eigenpair, signed so that ``sum(v) >= 0``."""
    X_bar = np.asarray(X_bar, dtype=float)
    lam, V = eig_sym(X_bar)
    top = float(lam[0])
    if top <= 0.0:
        raise DegenerateInput(f"largest eigenvalue {top:.3e} is not positive")
    v = V[:, 0]
    if v.sum() < 0:
        v = -v
    return np.sqrt(top) * v, top


def round_to_feasible(X_bar, inst, tie_tol=NUMERIC.tie_tol):
    """Round the spectral point at 0.5 (ties up), then drop items until the knapsack fits.

    The point is clipped to ``[0, 1]`` first. Items are dropped in increasing
    order of their clipped value; values within ``tie_tol`` go by index.
    """
    X_bar = np.asarray(X_bar, dtype=float)
    if X_bar.shape != (inst.n, inst.n):
        raise DimensionMismatch(f"X has shape {X_bar.shape}, expected {(inst.n, inst.n)}")
    x_bar, top = spectral_point(X_bar)
    x_bar = np.clip(x_bar, 0.0, 1.0)
    x_hat = (x_bar >= 0.5).astype(np.int64)
    weight = int(inst.w @ x_hat)
    while weight > inst.c:
        on = np.nonzero(x_hat)[0]
        low = x_bar[on].min()
        j = int(on[np.nonzero(x_bar[on] <= low + tie_tol)[0][0]])
        x_hat[j] = 0
        weight -= int(inst.w[j])
    return HeuristicResult(tuple(int(v) for v in x_hat), inst.value(x_hat), top)
