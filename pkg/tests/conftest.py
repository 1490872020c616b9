import itertools

import numpy as np
import pytest

from qkpb.instance import Instance


def make_t1():
    return Instance(np.array([[5, 2, 1], [2, 4, 2], [1, 2, 3]]), np.array([2, 3, 4]), 5)


@pytest.fixture
def t1():
    return make_t1()


def binary_points(n):
    return [np.array(b, dtype=float) for b in itertools.product((0, 1), repeat=n)]


def brute_optimum(inst):
    best = -1
    for x in binary_points(inst.n):
        if inst.w @ x <= inst.c:
            best = max(best, int(x @ inst.Q @ x))
    return best


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[k])
