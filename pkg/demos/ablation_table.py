"""Average optimality gap of the linear relaxation bound per cut family."""

import sys

from qkpb import POLICIES, CwicsConfig, bound_only, enumerate_optimum, generate_random


def main(n=10, count=5):
    gaps = {p: [] for p in POLICIES}
    for seed in range(count):
        inst = generate_random(n, seed)
        opt = enumerate_optimum(inst).value
        for policy in POLICIES:
            ub, _ = bound_only(inst, CwicsConfig(), policy)
            gaps[policy].append(100.0 * (ub - opt) / abs(opt) if opt else 0.0)
    print(f"{'policy':8s} mean gap (%) over {count} instances, n={n}")
    for policy, g in gaps.items():
        print(f"{policy:8s} {sum(g) / len(g):10.2f}")


if __name__ == "__main__":
    main(*(int(a) for a in sys.argv[1:3]))
