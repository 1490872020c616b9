import numpy as np
import pytest

from qkpb.errors import Infeasible
from qkpb.qpsolver import solve_qp


def test_box_qp_closed_form():
    # min 1/2 |z|^2 - t'z over [0,1]^3 is the clip of t
    t = np.array([0.3, -2.0, 5.0])
    G = np.vstack([np.eye(3), -np.eye(3)])
    h = np.concatenate([np.ones(3), np.zeros(3)])
    res = solve_qp(np.eye(3), -t, G, h)
    assert np.allclose(res.z, np.clip(t, 0, 1), atol=1e-7)
    assert res.status == "optimal"


def test_equality_constrained():
    # min z1^2 + z2^2 s.t. z1 + z2 = 1, z >= 0
    res = solve_qp(2 * np.eye(2), np.zeros(2), -np.eye(2), np.zeros(2), np.ones((1, 2)), np.ones(1))
    assert np.allclose(res.z, [0.5, 0.5], atol=1e-7)
    assert res.objective == pytest.approx(0.5, abs=1e-8)


def test_lp_vertex():
    # min -z1 - 2 z2 s.t. z1 + z2 <= 1, z >= 0
    G = np.array([[1.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    res = solve_qp(np.zeros((2, 2)), np.array([-1.0, -2.0]), G, np.array([1.0, 0.0, 0.0]))
    assert np.allclose(res.z, [0, 1], atol=1e-7)


def test_infeasible():
    G = np.array([[1.0], [-1.0]])
    with pytest.raises(Infeasible):
        solve_qp(np.eye(1), np.zeros(1), G, np.array([-1.0, -1.0]))
