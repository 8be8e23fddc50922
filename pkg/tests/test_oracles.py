import numpy as np
import pytest

from invopt import Dataset, ParameterSpace
from invopt.datadriven import LossSpec, estimate_aso
from invopt.errors import ForwardUnbounded, TooLarge
from invopt.model import MDPModel
from invopt.oracles import (
    brute_force_optimal_set,
    enumerate_vertices,
    grid_min_loss,
    grid_points,
    integer_points,
    mdp_value_iteration,
    policy_value,
    verify_inverse_feasible,
)

from conftest import knapsack


def test_vertices_of_boxed_cover():
    A = np.array([[1.0, 1.0], [1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    b = np.array([1.0, 0.0, 0.0, -1.0, -1.0])
    verts = enumerate_vertices(A, b)
    got = sorted(map(tuple, np.round(verts, 12)))
    assert got == [(0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]


def test_knapsack_optimal_set():
    model = knapsack([1.0, 1.0, 3.0], [2.0, 3.0, 4.0], 5.0)
    opt = brute_force_optimal_set(model)
    np.testing.assert_array_equal(opt.points, [[0.0, 0.0, 1.0]])
    assert opt.value == 3.0
    assert len(integer_points(model)) == 5


def test_unbounded_detected(unit_cover):
    with pytest.raises(ForwardUnbounded):
        brute_force_optimal_set(unit_cover, np.array([-1.0, 1.0]))


def test_verify_inverse_feasible(unit_cover):
    assert verify_inverse_feasible(unit_cover, [0.5, 0.5], [1.0, 0.0])[0]
    ok, gap = verify_inverse_feasible(unit_cover, [0.3, 0.7], [0.0, 1.0])
    assert not ok and gap == pytest.approx(0.4)
    assert verify_inverse_feasible(unit_cover, [1, 1], [-1.0, 2.0]) == (False, float("inf"))


def test_two_state_chain_stay_dominant():
    # action 0 stays, action 1 switches
    P = np.zeros((2, 2, 2))
    P[0, 0, 0] = P[0, 1, 1] = P[1, 0, 1] = P[1, 1, 0] = 1.0
    mdp = MDPModel(P, 0.9)
    theta = np.array([1.0, 0.0, 0.0, 0.0])
    v, policy, _ = mdp_value_iteration(mdp, theta)
    assert policy[0] == 0
    np.testing.assert_allclose(v, policy_value(mdp, theta, policy), atol=1e-8)
    assert v[0] == pytest.approx(10.0, abs=1e-8)


def test_grid_points_simplex():
    pts = grid_points(ParameterSpace.simplex(2), 0.25)
    assert len(pts) == 5
    np.testing.assert_allclose(pts.sum(axis=1), 1.0)
    with pytest.raises(TooLarge):
        grid_points(ParameterSpace(2), 0.1)


def test_aso_grid_agrees_with_estimator(unit_cover):
    data = Dataset.shared(unit_cover, [[1.0, 0.0], [0.0, 1.0]])
    space = ParameterSpace.simplex(2)
    theta, val = grid_min_loss(LossSpec("aso"), data, space, 0.01)
    np.testing.assert_allclose(theta, [0.5, 0.5])
    assert val == pytest.approx(0.0, abs=1e-12)
    assert estimate_aso(data, space).objective_value == pytest.approx(val, abs=1e-9)
