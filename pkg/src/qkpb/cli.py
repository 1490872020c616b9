"""Command-line front end: ``qkpb {gen,solve,bound,oracle,bench}``.

Exit codes: 0 on success, 1 on input or usage errors, 2 on numerical failure.
Files are written to a temporary name and renamed, so a failed run leaves no
partial output.
"""

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import instance as qi
from .driver import POLICIES, TABLE_COLUMNS, CwicsConfig, _jsonable, bound_only, cwics_run
from .errors import QkpbError

log = logging.getLogger(__name__)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2
THREADS_ENV = "QKPB_NUM_THREADS"
TIME_COLUMNS = ("Time", "Time_MIP")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_run_flags(p):
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--m", type=int, default=None, help="iterations between cut rounds")
    p.add_argument("--max-cuts", type=int, default=None, help="CILS/SCILS cuts per round")
    p.add_argument("--sep-time-limit", type=float, default=None)
    p.add_argument("--relaxation", choices=("lpr", "qpr"), default=None)
    p.add_argument("--init", choices=("a", "b"), default=None)
    p.add_argument("--init-divisor", type=float, default=None)
    p.add_argument("--dugap-tol", type=float, default=None)


def build_parser():
    parser = _Parser(prog="qkpb", description="Upper bounds for the quadratic knapsack problem.")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)

    s = sub.add_parser("solve", help="run the cutting-plane/perturbation loop")
    s.add_argument("--instance", required=True)
    s.add_argument("--report", default=None)
    _add_run_flags(s)

    b = sub.add_parser("bound", help="cut ablation on the linear relaxation")
    b.add_argument("--instance", required=True)
    b.add_argument("--policy", choices=POLICIES + ("every",), default="every")
    b.add_argument("--report", default=None)
    b.add_argument("--max-cuts", type=int, default=None)
    b.add_argument("--sep-time-limit", type=float, default=None)

    o = sub.add_parser("oracle", help="exact optimum by enumeration")
    o.add_argument("--instance", required=True)

    h = sub.add_parser("bench", help="batch runs producing JSON and CSV tables")
    h.add_argument("--instance", default=None, help="directory of instance JSON files")
    h.add_argument("--n", default=None, help="sizes for generated instances, e.g. 8 or 6,8,10")
    h.add_argument("--seed", default=None, help="seeds for generated instances, e.g. 0:10 or 1,2,5")
    h.add_argument("--out", required=True, help="output directory")
    h.add_argument("--policy", choices=POLICIES, default=None,
                   help="run a bound ablation instead of the full loop")
    h.add_argument("--jobs", type=int, default=1)
    _add_run_flags(h)
    return parser


def _int_list(text, flag):
    out = []
    try:
        for part in text.split(","):
            part = part.strip()
            if ":" in part:
                lo, hi = part.split(":")
                out.extend(range(int(lo), int(hi)))
            elif part:
                out.append(int(part))
    except ValueError:
        raise UsageError(f"{flag}: expected integers like '3', '1,2' or '0:10', got {text!r}") from None
    if not out:
        raise UsageError(f"{flag}: empty list")
    return out


def config_from_args(args):
    """Resolve CLI flags onto :class:`CwicsConfig`; unset flags keep defaults."""
    base = CwicsConfig()
    mapping = {
        "max_iter": "max_iter", "m": "m", "max_cuts": "max_n_cuts", "sep_time_limit": "sep_time_limit",
        "relaxation": "relaxation", "init": "init", "init_divisor": "init_divisor", "dugap_tol": "dugap_tol",
    }
    kw = {}
    for flag, name in mapping.items():
        v = getattr(args, flag, None)
        if v is not None:
            kw[name] = v
    max_iter = kw.get("max_iter", base.max_iter)
    if "m" not in kw:
        kw["m"] = min(base.m, max(1, max_iter))
    try:
        return CwicsConfig(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _write_json(path, obj):
    qi.atomic_write_text(path, json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{round(v, 6) + 0.0:.6f}"  # + 0.0 folds -0.0
    return str(v)


def table_csv(rows, columns=TABLE_COLUMNS):
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(columns)
    for r in rows:
        wr.writerow([_fmt(r[c]) for c in columns])
    return buf.getvalue()


def table_aligned(rows, columns=TABLE_COLUMNS):
    cells = [list(columns)] + [[_fmt(r[c]) for c in columns] for r in rows]
    widths = [max(len(row[j]) for row in cells) for j in range(len(columns))]
    lines = ["  ".join(cell.rjust(wd) for cell, wd in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def strip_time_columns(csv_text):
    """CSV text with the timing columns removed, for run-to-run comparison."""
    rows = list(csv.reader(io.StringIO(csv_text)))
    keep = [j for j, name in enumerate(rows[0]) if name not in TIME_COLUMNS]
    return [[row[j] for j in keep] for row in rows]


def _cmd_gen(args):
    if args.n < 1:
        raise UsageError("--n must be positive")
    inst = qi.generate_random(args.n, args.seed)
    qi.save(inst, args.out)
    print(f"wrote {args.out} (n={inst.n}, c={inst.c})")


def _cmd_solve(args):
    cfg = config_from_args(args)
    inst = qi.load(args.instance)
    name = os.path.splitext(os.path.basename(args.instance))[0]
    rep = cwics_run(inst, cfg, name=name)
    if args.report:
        qi.atomic_write_text(args.report, rep.to_json())
    print(f"{name}: upper_bound={rep.upper_bound:.6f} lower_bound={rep.lower_bound:.6f} "
          f"du_gap={_fmt(rep.du_gap)}% iterations={rep.iterations} cuts={rep.total_cuts}")


def _cmd_bound(args):
    kw = {}
    if args.max_cuts is not None:
        kw["max_n_cuts"] = args.max_cuts
    if args.sep_time_limit is not None:
        kw["sep_time_limit"] = args.sep_time_limit
    try:
        cfg = CwicsConfig(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    inst = qi.load(args.instance)
    name = os.path.splitext(os.path.basename(args.instance))[0]
    policies = POLICIES if args.policy == "every" else (args.policy,)
    out = {}
    for policy in policies:
        ub, rep = bound_only(inst, cfg, policy, name=name)
        out[policy] = rep.to_dict(include_cuts=False)
        print(f"{policy:6s} upper_bound={ub:.6f} cuts={rep.total_cuts}")
    if args.report:
        _write_json(args.report, out)


def _cmd_oracle(args):
    inst = qi.load(args.instance)
    sol = qi.enumerate_optimum(inst)
    print(sol.value)
    print("x=(" + ",".join(str(v) for v in sol.x) + ")")


def _bench_inputs(args):
    if args.instance:
        if args.n or args.seed:
            raise UsageError("bench takes either --instance DIR or --n/--seed, not both")
        if not os.path.isdir(args.instance):
            raise UsageError(f"--instance: {args.instance} is not a directory")
        files = sorted(f for f in os.listdir(args.instance) if f.endswith(".json"))
        if not files:
            raise UsageError(f"--instance: no .json files in {args.instance}")
        return [(os.path.splitext(f)[0], qi.load(os.path.join(args.instance, f))) for f in files]
    if not (args.n and args.seed):
        raise UsageError("bench needs --instance DIR or both --n and --seed")
    sizes = _int_list(args.n, "--n")
    seeds = _int_list(args.seed, "--seed")
    if min(sizes) < 1:
        raise UsageError("--n must be positive")
    return [(f"n{n}_s{s}", qi.generate_random(n, s)) for n in sizes for s in seeds]


def _bench_one(job):
    name, inst, cfg, policy = job
    opt = qi.enumerate_optimum(inst).value if inst.n <= qi.ORACLE_MAX_N else None
    try:
        if policy:
            _, rep = bound_only(inst, cfg, policy, name=name, optimum=opt)
        else:
            rep = cwics_run(inst, cfg, name=name, optimum=opt)
    except QkpbError as exc:
        rep = getattr(exc, "report", None)
        if rep is None:
            raise
    return rep.table_row(), rep.to_dict(include_cuts=False)


def job_count(requested):
    cap = os.environ.get(THREADS_ENV)
    jobs = max(1, requested)
    if cap:
        try:
            jobs = min(jobs, max(1, int(cap)))
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {cap!r}") from None
    return jobs


def _cmd_bench(args):
    cfg = config_from_args(args)
    jobs = job_count(args.jobs)
    inputs = _bench_inputs(args)
    work = [(name, inst, cfg, args.policy) for name, inst in inputs]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_bench_one, work))
    else:
        results = [_bench_one(w) for w in work]
    rows = [r for r, _ in results]
    os.makedirs(args.out, exist_ok=True)
    _write_json(os.path.join(args.out, "reports.json"), [d for _, d in results])
    qi.atomic_write_text(os.path.join(args.out, "table.csv"), table_csv(rows))
    qi.atomic_write_text(os.path.join(args.out, "table.txt"), table_aligned(rows))
    sys.stdout.write(table_aligned(rows))


COMMANDS = {"gen": _cmd_gen, "solve": _cmd_solve, "bound": _cmd_bound, "oracle": _cmd_oracle, "bench": _cmd_bench}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        COMMANDS[args.verb](args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        print(parser.format_usage(), end="", file=sys.stderr)
        return EXIT_INPUT
    except (ArithmeticError, QkpbError) as exc:
        if isinstance(exc, ArithmeticError):
            print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"input error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
