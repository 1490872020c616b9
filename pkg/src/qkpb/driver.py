"""The cutting-plane/perturbation loop and the fixed-relaxation cut ablations.

Each outer iteration updates ``Q_p`` by one interior-point step, re-solves the
relaxation, rounds its ``X`` to a feasible point for a lower bound and, every
``m`` iterations (starting with the first), adds a round of cuts:
the scaled cover rows of the best cover, then CILS and SCILS cuts found by
repeated separation with no-goods, each with its cover inequality.
"""

import csv
import io
import json
import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .config import NUMERIC
from .cutgen import (
    Cover,
    ci_cut,
    cils_separate,
    cover_inequality,
    lift_cover,
    lifted_rows,
    minimal_subcover,
    sci_family,
    sci_separation,
    scils_separate,
)
from .errors import DegenerateInput, NoCoverExists, QkpbError
from .heuristic import HeuristicResult, round_to_feasible
from .paramipm import gradient_pstar, init_state, ipm_iterate
from .relax import CutPool, build_lpr, build_relaxation, initial_perturbation, solve_cqp

log = logging.getLogger(__name__)

POLICIES = ("lpr", "sci1", "sci", "cils", "scils", "all")
TABLE_COLUMNS = ["Inst", "n", "UB", "LB", "Opt", "OptGap", "Time", "DuGap", "Iter", "Cuts", "Time_MIP"]


@dataclass(frozen=True)
class CwicsConfig:
    max_iter: int = 100
    m: int = 10
    max_n_cuts: int = 5
    sep_time_limit: float = 3.0
    relaxation: str = "qpr"
    init: str = "b"
    init_divisor: float = 2.0
    dugap_tol: float = 1e-4
    delta: float = 0.0
    sci_rows: int = 0  # 0 means max(n, max_n_cuts)
    lift_sci: bool = False
    enable_cuts: bool = True
    direction_form: str = "sym"

    def __post_init__(self):
        problems = []
        if self.max_iter < 1:
            problems.append("max_iter must be positive")
        if self.m < 1:
            problems.append("m must be positive")
        if self.m > self.max_iter:
            problems.append("m must not exceed max_iter")
        if self.max_n_cuts < 0:
            problems.append("max_n_cuts must be nonnegative")
        if self.sep_time_limit <= 0:
            problems.append("sep_time_limit must be positive")
        if self.relaxation not in ("lpr", "qpr"):
            problems.append("relaxation must be 'lpr' or 'qpr'")
        if self.init not in ("a", "b"):
            problems.append("init must be 'a' or 'b'")
        if self.init_divisor <= 0:
            problems.append("init_divisor must be positive")
        if self.dugap_tol < 0:
            problems.append("dugap_tol must be nonnegative")
        if self.delta < 0:
            problems.append("delta must be nonnegative")
        if self.direction_form not in ("sym", "lower"):
            problems.append("direction_form must be 'sym' or 'lower'")
        if problems:
            raise ValueError("; ".join(problems))

    def to_dict(self):
        return asdict(self)


@dataclass
class Report:
    instance: str
    n: int
    upper_bound: float
    lower_bound: float
    final_bound: float
    best_x: tuple
    iterations: int
    cuts_added: dict
    history: list
    time_total: float
    time_mip: float
    config: dict
    optimum: object = None
    status: str = "ok"
    cuts: list = field(default_factory=list, repr=False)

    @property
    def du_gap(self):
        return gap_percent(self.upper_bound, self.lower_bound)

    @property
    def opt_gap(self):
        if self.optimum is None:
            return None
        return gap_percent(self.upper_bound, self.optimum)

    @property
    def total_cuts(self):
        return int(sum(self.cuts_added.values()))

    def to_dict(self, include_cuts=True):
        d = {
            "instance": self.instance,
            "n": self.n,
            "upper_bound": self.upper_bound,
            "lower_bound": self.lower_bound,
            "final_bound": self.final_bound,
            "best_x": list(self.best_x),
            "optimum": self.optimum,
            "opt_gap": self.opt_gap,
            "du_gap": self.du_gap,
            "iterations": self.iterations,
            "cuts_added": dict(self.cuts_added),
            "time_total": self.time_total,
            "time_mip": self.time_mip,
            "status": self.status,
            "config": self.config,
            "history": self.history,
        }
        if include_cuts:
            d["cuts"] = [c.to_dict() for c in self.cuts]
        return d

    def to_json(self, include_cuts=True):
        return json.dumps(_jsonable(self.to_dict(include_cuts)), indent=2, sort_keys=True) + "\n"

    def table_row(self):
        return {
            "Inst": self.instance,
            "n": self.n,
            "UB": self.upper_bound,
            "LB": self.lower_bound,
            "Opt": self.optimum,
            "OptGap": self.opt_gap,
            "Time": self.time_total,
            "DuGap": self.du_gap,
            "Iter": self.iterations,
            "Cuts": self.total_cuts,
            "Time_MIP": self.time_mip,
        }

    def history_csv(self):
        buf = io.StringIO()
        if not self.history:
            return ""
        wr = csv.DictWriter(buf, fieldnames=list(self.history[0].keys()), lineterminator="\n")
        wr.writeheader()
        for row in self.history:
            wr.writerow(row)
        return buf.getvalue()


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, float) and not np.isfinite(v):
        return None
    return v


def gap_percent(upper, lower):
    """``(upper - lower) / lower * 100``; infinite when ``lower`` is not positive."""
    if lower is None:
        return None
    if lower <= 0:
        return 0.0 if upper <= lower else float("inf")
    return (upper - lower) / lower * 100.0


class _CutRound:
    """Separation bookkeeping shared by the loop and the ablations."""

    def __init__(self, inst, pool, cfg):
        self.inst = inst
        self.pool = pool
        self.cfg = cfg
        self.time_mip = 0.0
        self.added = {}

    def _add(self, cut):
        if self.pool.add(cut):
            self.added[cut.family] = self.added.get(cut.family, 0) + 1
            return True
        return False

    def sci(self, sol, limit):
        """Rows of the best scaled-cover family, most violated first; returns the count added."""
        t0 = time.perf_counter()
        try:
            sep = sci_separation(sol.x, sol.X, self.inst)
        except NoCoverExists:
            sep = None
        self.time_mip += time.perf_counter() - t0
        if sep is None:
            return 0
        cover = sep.cover
        if self.cfg.lift_sci:
            rows = lifted_rows(lift_cover(minimal_subcover(cover, self.inst), self.inst))
        else:
            rows = sci_family(cover, self.inst.n)
        viol = [(r.violation(sol.x, sol.X), i) for i, r in enumerate(rows)]
        viol.sort(key=lambda t: (-t[0], t[1]))
        count = 0
        for v, i in viol[:limit]:
            if v > NUMERIC.cut_violation and self._add(rows[i]):
                count += 1
        return count

    def cils(self, sol, limit):
        no_goods = []
        count = 0
        while count < limit:
            t0 = time.perf_counter()
            try:
                sep = cils_separate(sol.X, self.inst, time_limit=self.cfg.sep_time_limit,
                                    no_goods=no_goods, delta=self.cfg.delta)
            except NoCoverExists:
                sep = None
            self.time_mip += time.perf_counter() - t0
            if sep is None:
                break
            no_goods.append(sep.cover.alpha(self.inst.n))
            self._add(ci_cut(cover_inequality(sep.cover, self.inst.n)))
            if sep.violation > NUMERIC.cut_violation and self._add(sep.cut):
                count += 1
        return count

    def scils(self, sol, limit):
        no_goods = []
        count = 0
        while count < limit:
            t0 = time.perf_counter()
            try:
                sep = scils_separate(sol.X, self.inst, time_limit=self.cfg.sep_time_limit,
                                     no_goods=no_goods, delta=self.cfg.delta)
            except NoCoverExists:
                sep = None
            self.time_mip += time.perf_counter() - t0
            if sep is None:
                break
            no_goods.append(sep.pattern)
            if sep.cover is not None:
                self._add(ci_cut(cover_inequality(sep.cover, self.inst.n)))
            if sep.violation > NUMERIC.cut_violation and self._add(sep.cut):
                count += 1
        return count


def _heuristic(sol, inst):
    try:
        return round_to_feasible(sol.X, inst)
    except DegenerateInput:
        # X = 0 has no positive eigenvalue; the empty knapsack is the fallback
        return HeuristicResult((0,) * inst.n, 0, 0.0)


def cwics_run(inst, cfg=None, name="instance", optimum=None):
    """Run the bound-improvement loop; the reported upper bound is the smallest seen."""
    cfg = cfg or CwicsConfig()
    t_start = time.perf_counter()
    poly = build_relaxation(inst, cfg.relaxation)
    pool = CutPool(inst.n)
    cuts = _CutRound(inst, pool, cfg)
    sci_limit = cfg.sci_rows or max(inst.n, cfg.max_n_cuts)

    def solve(Qp):
        return solve_cqp(poly, pool.cuts, inst, Qp)

    history = []
    partial = {"ub": np.inf, "lb": -np.inf, "x": (0,) * inst.n, "k": 0, "final": np.inf}

    def record(k, sol, mu, event):
        h = _heuristic(sol, inst)
        if h.value > partial["lb"]:
            partial["lb"], partial["x"] = h.value, h.x
        partial["ub"] = min(partial["ub"], sol.objective)
        partial["final"] = sol.objective
        history.append({
            "k": k,
            "event": event,
            "bound": float(sol.objective),
            "upper_bound": float(partial["ub"]),
            "lower_bound": float(partial["lb"]),
            "du_gap": gap_percent(partial["ub"], partial["lb"]),
            "mu": float(mu),
            "cuts": len(pool),
            "time": time.perf_counter() - t_start,
        })

    def report(status):
        return Report(name, inst.n, float(partial["ub"]), float(partial["lb"]), float(partial["final"]),
                      tuple(partial["x"]), partial["k"], dict(cuts.added), history,
                      time.perf_counter() - t_start, cuts.time_mip, cfg.to_dict(), optimum, status,
                      list(pool.cuts))

    try:
        Qp0 = initial_perturbation(inst.Q, cfg.init, cfg.init_divisor)
        sol0 = solve(Qp0)
        state = init_state(inst, Qp0, sol0)
        record(0, sol0, state.mu, "init")
        for k in range(cfg.max_iter):
            state, _ = ipm_iterate(state, inst.Q, solve, cfg.direction_form)
            partial["k"] = k + 1
            record(k + 1, state.sol, state.mu, "ipm")
            if cfg.enable_cuts and k % cfg.m == 0:
                before = len(pool)
                cuts.sci(state.sol, sci_limit)
                cuts.cils(state.sol, cfg.max_n_cuts)
                cuts.scils(state.sol, cfg.max_n_cuts)
                if len(pool) > before:
                    # re-solve at the same Q_p; B is not updated across the change of feasible set
                    state.sol = solve(state.Qp)
                    state.grad = gradient_pstar(state.sol)
                    record(k + 1, state.sol, state.mu, "cuts")
            if partial["lb"] > 0 and (partial["ub"] - partial["lb"]) / partial["lb"] <= cfg.dugap_tol:
                break
    except QkpbError as exc:
        exc.report = report(f"failed: {type(exc).__name__}")
        raise
    return report("ok")


def bound_only(inst, cfg=None, policy="all", max_rounds=50, name="instance", optimum=None):
    """Cut ablation on the linear relaxation (box + knapsack, ``Q_p = Q``) without perturbation updates.

    Policies: ``lpr`` (no cuts), ``sci1`` (most violated scaled-cover row per
    round), ``sci`` (all violated rows of the best cover), ``cils`` / ``scils``
    (one separated cut per round, plus its cover inequality) and ``all``
    (``sci`` + one CILS + one SCILS per round). Rounds repeat until nothing is
    added or ``max_rounds`` is reached. Returns ``(upper_bound, report)``.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    cfg = cfg or CwicsConfig()
    t_start = time.perf_counter()
    poly = build_lpr(inst)
    pool = CutPool(inst.n)
    cuts = _CutRound(inst, pool, cfg)
    Qp = inst.Q.astype(float)
    sol = solve_cqp(poly, pool.cuts, inst, Qp)
    trace = [float(sol.objective)]
    best_lb, best_x = -np.inf, (0,) * inst.n
    rounds = 0

    def note_lb(s):
        nonlocal best_lb, best_x
        h = _heuristic(s, inst)
        if h.value > best_lb:
            best_lb, best_x = h.value, h.x

    note_lb(sol)
    history = [{"k": 0, "bound": trace[0], "cuts": 0, "time": time.perf_counter() - t_start}]
    if policy != "lpr":
        for rounds in range(1, max_rounds + 1):
            added = 0
            if policy == "sci1":
                added += cuts.sci(sol, 1)
            if policy in ("sci", "all"):
                added += cuts.sci(sol, inst.n)
            if policy in ("cils", "all"):
                added += cuts.cils(sol, 1)
            if policy in ("scils", "all"):
                added += cuts.scils(sol, 1)
            if added == 0:
                rounds -= 1
                break
            sol = solve_cqp(poly, pool.cuts, inst, Qp)
            trace.append(float(sol.objective))
            note_lb(sol)
            history.append({"k": rounds, "bound": trace[-1], "cuts": len(pool),
                            "time": time.perf_counter() - t_start})
    ub = float(min(trace))
    rep = Report(name, inst.n, ub, float(best_lb), float(trace[-1]), tuple(best_x), rounds + 1,
                 dict(cuts.added), history, time.perf_counter() - t_start, cuts.time_mip,
                 {**cfg.to_dict(), "policy": policy, "max_rounds": max_rounds}, optimum, "ok", list(pool.cuts))
    return ub, rep


__all__ = ["CwicsConfig", "Report", "cwics_run", "bound_only", "gap_percent", "POLICIES", "TABLE_COLUMNS", "Cover"]
