"""Bounds on a three-item instance, compared with the exact optimum."""

import numpy as np

from qkpb import CwicsConfig, Instance, bound_only, cwics_run, enumerate_optimum


def main():
    inst = Instance(np.array([[5, 2, 1], [2, 4, 2], [1, 2, 3]]), np.array([2, 3, 4]), 5)
    opt = enumerate_optimum(inst)
    print(f"optimum {opt.value} at x={tuple(int(v) for v in opt.x)}")
    rep = cwics_run(inst, CwicsConfig(max_iter=20, m=2), name="t1", optimum=opt.value)
    print(f"full loop: lower {rep.lower_bound:.6f}  upper {rep.upper_bound:.6f}  "
          f"iterations {rep.iterations}  cuts {rep.total_cuts}")
    for policy in ("lpr", "sci", "cils", "scils", "all"):
        ub, r = bound_only(inst, CwicsConfig(), policy, name="t1")
        print(f"{policy:6s} linear-relaxation bound {ub:.6f} with {r.total_cuts} cuts")


if __name__ == "__main__":
    main()
