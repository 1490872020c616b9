"""Quadratic knapsack instances: construction, generation, file I/O and an exact oracle.

An instance is ``max x'Qx  s.t.  w'x <= c,  x binary`` with ``Q`` symmetric,
nonnegative and integer. Linear profits live on the diagonal of ``Q``.
"""

import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded, DimensionMismatch, ParseError

ORACLE_MAX_N = 25


@dataclass(frozen=True, eq=False)
class Instance:
    Q: np.ndarray
    w: np.ndarray
    c: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        Q = np.array(self.Q, dtype=np.int64)
        w = np.array(self.w, dtype=np.int64).reshape(-1)
        Q.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "c", int(self.c))
        problems = instance_problems(Q, w, self.c)
        if problems:
            field_name, message = problems[0]
            raise ValueError(f"{field_name}: {message}")

    @property
    def n(self):
        return int(self.w.size)

    def value(self, x):
        x = _as_binary(self, x)
        return int(x @ self.Q @ x)

    def weight(self, x):
        x = _as_binary(self, x)
        return int(self.w @ x)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.c == other.c
            and np.array_equal(self.w, other.w)
            and np.array_equal(self.Q, other.Q)
        )

    def __hash__(self):
        return hash((self.c, self.w.tobytes(), self.Q.tobytes()))

    def __repr__(self):
        return f"Instance(n={self.n}, c={self.c})"

    def permuted(self, perm):
        perm = np.asarray(perm)
        return Instance(self.Q[np.ix_(perm, perm)], self.w[perm], self.c, dict(self.meta))


@dataclass(frozen=True)
class BinarySolution:
    x: tuple
    value: int

    @property
    def array(self):
        return np.array(self.x, dtype=np.int64)


def instance_problems(Q, w, c):
    """List of (field, message) invariant violations; empty when valid."""
    out = []
    if w.ndim != 1 or w.size < 1:
        out.append(("w", "must be a non-empty vector"))
        return out
    n = w.size
    if Q.shape != (n, n):
        out.append(("Q", f"shape {Q.shape} does not match n={n}"))
        return out
    if not np.array_equal(Q, Q.T):
        out.append(("Q", "matrix is not symmetric"))
    if np.any(Q < 0):
        out.append(("Q", "entries must be nonnegative"))
    if np.any(w < 1):
        out.append(("w", "weights must be positive integers"))
    if c < 1:
        out.append(("c", "capacity must be a positive integer"))
    elif c < int(w.max()):
        out.append(("c", f"capacity {c} is below the largest weight {int(w.max())}"))
    return out


def _as_binary(inst, x):
    x = np.asarray(x)
    if x.shape != (inst.n,):
        raise DimensionMismatch(f"expected a vector of length {inst.n}, got shape {x.shape}")
    if not np.all((x == 0) | (x == 1)):
        raise ValueError("x must be binary")
    return x.astype(np.int64)


def is_feasible(inst, x):
    return inst.weight(x) <= inst.c


def generate_random(n, seed, density=1.0, profit_range=(1, 100), weight_range=(1, 50)):
    """Random instance in the style of the classical QKP benchmarks.

    Weights are uniform integers in ``weight_range``; the capacity is uniform in
    ``[max(50, max w), sum w]``. When ``sum w < 50`` the lower end falls back to
    ``max w`` so the capacity is never below an item weight. Each profit
    ``Q_ij = Q_ji`` is nonzero with probability ``density`` and then uniform in
    ``profit_range``.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0.0 <= density <= 1.0:
        raise ValueError("density must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    w = rng.integers(weight_range[0], weight_range[1] + 1, size=n)
    total = int(w.sum())
    lo = max(min(50, total), int(w.max()))
    c = int(rng.integers(lo, total + 1))
    upper = rng.integers(profit_range[0], profit_range[1] + 1, size=(n, n))
    mask = rng.random((n, n)) < density
    upper = np.triu(upper * mask)
    Q = upper + np.triu(upper, 1).T
    meta = {
        "generator": "uniform",
        "seed": int(seed),
        "density": float(density),
        "profit_range": list(profit_range),
        "weight_range": list(weight_range),
    }
    return Instance(Q, w, c, meta)


def enumerate_optimum(inst):
    """Exact optimum by enumeration, lexicographically smallest maximizer.

    Items are split into a high block (leading items) and a low block; for each
    high pattern the low patterns are scored with one matrix product, so the
    work is ``2^n`` dot products of length ``n_low``.
    """
    n = inst.n
    if n > ORACLE_MAX_N:
        raise BudgetExceeded(f"enumeration oracle limited to n <= {ORACLE_MAX_N}, got {n}")
    Q = inst.Q.astype(float)
    w = inst.w.astype(float)
    n_low = min(n, 12)
    n_high = n - n_low
    low_bits = _bit_table(n_low)  # row k = binary expansion of k, most significant first
    high_bits = _bit_table(n_high)
    Qll = Q[n_high:, n_high:]
    Qhh = Q[:n_high, :n_high]
    Qhl = Q[:n_high, n_high:]
    low_val = np.einsum("ki,ij,kj->k", low_bits, Qll, low_bits)
    low_wt = low_bits @ w[n_high:]
    high_val = np.einsum("ki,ij,kj->k", high_bits, Qhh, high_bits)
    high_wt = high_bits @ w[:n_high]
    best_val, best_code = -1.0, None
    block = 256
    for start in range(0, high_bits.shape[0], block):
        hb = high_bits[start:start + block]
        cross = 2.0 * (low_bits @ (Qhl.T @ hb.T))  # (2^n_low, block)
        vals = cross + low_val[:, None] + high_val[None, start:start + block]
        feas = (low_wt[:, None] + high_wt[None, start:start + block]) <= inst.c
        vals = np.where(feas, vals, -np.inf)
        col_best = vals.max(axis=0)
        for k, v in enumerate(col_best):
            if v > best_val:
                best_val = v
                low_idx = int(np.argmax(vals[:, k]))
                best_code = ((start + k) << n_low) | low_idx
    x = tuple(int(b) for b in np.binary_repr(best_code, width=n)) if n else ()
    value = inst.value(np.array(x))
    return BinarySolution(x, value)


def _bit_table(k):
    codes = np.arange(2 ** k, dtype=np.int64)
    shifts = np.arange(k - 1, -1, -1, dtype=np.int64)
    return ((codes[:, None] >> shifts[None, :]) & 1).astype(float)


def to_dict(inst):
    d = {"n": inst.n, "c": inst.c, "w": inst.w.tolist(), "Q": inst.Q.tolist()}
    if inst.meta:
        d["meta"] = inst.meta
    return d


def from_dict(d):
    if not isinstance(d, dict):
        raise ParseError("top level must be a JSON object")
    for key in ("n", "c", "w", "Q"):
        if key not in d:
            raise ParseError("missing required field", field=key)
    n = d["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError("must be a positive integer", field="n")
    if not _is_int(d["c"]):
        raise ParseError("must be an integer", field="c")
    w = d["w"]
    if not isinstance(w, list) or len(w) != n or not all(_is_int(v) for v in w):
        raise ParseError(f"must be a list of {n} integers", field="w")
    Q = d["Q"]
    if not isinstance(Q, list) or len(Q) != n:
        raise ParseError(f"must have {n} rows", field="Q")
    for i, row in enumerate(Q):
        if not isinstance(row, list) or len(row) != n or not all(_is_int(v) for v in row):
            raise ParseError(f"row {i} must be a list of {n} integers", field="Q")
    Qa = np.array(Q, dtype=np.int64)
    wa = np.array(w, dtype=np.int64)
    problems = instance_problems(Qa, wa, int(d["c"]))
    if problems:
        field_name, message = problems[0]
        raise ParseError(message, field=field_name)
    return Instance(Qa, wa, int(d["c"]), dict(d.get("meta", {})))


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def loads(text):
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from exc
    return from_dict(d)


def load(path):
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def dumps(inst):
    return json.dumps(to_dict(inst), sort_keys=True) + "\n"


def save(inst, path):
    atomic_write_text(path, dumps(inst))


def atomic_write_text(path, text):
    """Write via a temporary file in the same directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
