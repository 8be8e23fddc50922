import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from invopt import Dataset, LinearForwardModel, ParameterSpace
from invopt.apps import generate_instance
from invopt.datadriven import (
    LossSpec,
    RiskSpec,
    aggregate_risk,
    delta_net,
    distance_to_optimal_set,
    estimate_aso,
    estimate_distance,
    estimate_kkt,
    estimate_rso,
    estimate_var,
    estimate_vi,
    eval_loss,
)
from invopt.errors import BigMViolation, EmptyNet, NormalizationRequired
from invopt.errors import DegenerateThetaWarning
from invopt.model import ConvexForwardModel, FixedComponent, L1Sphere, Quadratic
from invopt.oracles import grid_min_loss, verify_inverse_feasible

from conftest import random_bounded_lp

RECT = LinearForwardModel(np.zeros(2), np.array([[1.0, 0], [-1.0, 0], [0, 1.0], [0, -1.0]]),
                          np.array([0.0, -5.0, 2.0, -5.0]))
SQUARE = LinearForwardModel(np.zeros(2), np.array([[1.0, 0], [-1.0, 0], [0, 1.0], [0, -1.0]]),
                            np.array([0.0, -1.0, 0.0, -1.0]))


def _unit_box_quadratic(center=(0.0, 0.0)):
    obj = Quadratic(np.eye(2), -np.asarray(center, float), np.zeros(2))
    A = np.vstack([np.eye(2), -np.eye(2)])
    return ConvexForwardModel(obj, A, np.array([0.0, 0.0, -1.0, -1.0]))


# -- losses -------------------------------------------------------------------------------
def test_aso_loss_value(unit_cover):
    assert eval_loss("aso", [0.3, 0.7], [0.0, 1.0], unit_cover) == pytest.approx(0.4)


def test_vi_loss_on_box():
    model = _unit_box_quadratic((0.5, 0.5))
    assert eval_loss("vi", np.zeros(2), [1.0, 1.0], model) == pytest.approx(1.0)


def test_distance_jump_on_rectangle():
    x_hat = np.array([5.5, 4.0])
    near = eval_loss("distance", [-0.0005, -1.0], x_hat, RECT)
    far = eval_loss("distance", [0.0005, -1.0], x_hat, RECT)
    assert near == pytest.approx(np.sqrt(1.25), abs=1e-6)
    assert far == pytest.approx(np.sqrt(31.25), abs=1e-6)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_vi_equals_aso_for_linear(seed):
    rng = np.random.default_rng(seed)
    model = random_bounded_lp(rng)
    theta = rng.normal(size=model.n)
    x = rng.uniform(0, 3, size=model.n)
    if not model.feasible(x):
        x = np.full(model.n, 3.0) if model.feasible(np.full(model.n, 3.0)) else None
    if x is None:
        return
    assert eval_loss("vi", theta, x, model) == pytest.approx(eval_loss("aso", theta, x, model), abs=1e-8)


def test_rso_requires_positive_rhs(unit_cover):
    with pytest.raises(NormalizationRequired):
        estimate_rso(Dataset.shared(unit_cover, [[1.0, 0.0]]), ParameterSpace(2, lb=np.zeros(2)))


@pytest.mark.parametrize(
    "risk, value",
    [(RiskSpec("cvar", 0.5), 3.5), (RiskSpec("cvar", 1.0), 2.5), (RiskSpec("var", 0.75), 3.0), (None, 2.5)],
)
def test_aggregate_risk(risk, value):
    assert aggregate_risk([4.0, 1.0, 3.0, 2.0], risk=risk) == pytest.approx(value)


# -- ASO and its equivalents -------------------------------------------------------------------
def test_aso_two_vertices(unit_cover):
    data = Dataset.shared(unit_cover, [[1.0, 0.0], [0.0, 1.0]])
    for est in (estimate_aso, estimate_vi, estimate_kkt):
        res = est(data, ParameterSpace.simplex(2))
        np.testing.assert_allclose(res.theta_star, [0.5, 0.5], atol=1e-9)
        assert res.objective_value == pytest.approx(0.0, abs=1e-9)


def test_aso_never_infeasible(unit_cover):
    space = ParameterSpace(2, E=np.eye(2), f=[0.0, 1.0])
    res = estimate_aso(Dataset.shared(unit_cover, [[0.0, 1.0]]), space)
    assert res.status == "Optimal"
    assert res.objective_value == pytest.approx(1.0)


def test_aso_reported_losses_match_direct(rng):
    model = random_bounded_lp(rng, 3, 2)
    xs = [x for x in rng.uniform(0, 3, size=(20, 3)) if model.feasible(x)][:5]
    data = Dataset.shared(model, xs)
    res = estimate_aso(data, ParameterSpace(3, normalization=L1Sphere()))
    direct = [eval_loss("aso", res.theta_star, x, model) for x in xs]
    np.testing.assert_allclose(res.per_obs_loss, direct, atol=1e-6)


def test_cvar_upper_bounds_mean(unit_cover):
    data = Dataset.shared(unit_cover, [[1.0, 0.0], [0.0, 1.0], [2.0, 2.0]])
    space = ParameterSpace.simplex(2)
    mean = estimate_aso(data, space).objective_value
    tail = estimate_aso(data, space, risk=RiskSpec("cvar", 0.5)).objective_value
    assert tail >= mean - 1e-9


def test_rso_examples():
    model = LinearForwardModel(np.ones(2), np.array([[1.0, 1.0], [3.0, 1.0], [1.0, 3.0]]), np.array([2.0, 3.0, 3.0]))
    space = ParameterSpace(2, lb=np.zeros(2))
    res = estimate_rso(Dataset.shared(model, [[0.5, 1.5]]), space)
    assert res.objective_value == pytest.approx(0.0, abs=1e-9)
    interior = Dataset.shared(model, [[2.0, 2.0]])
    res = estimate_rso(interior, space)
    assert res.objective_value > 0
    # costs outside the cone of the rows leave the forward unbounded
    boxed = ParameterSpace(2, G=np.array([[-1.0, 3.0], [3.0, -1.0]]), lb=np.zeros(2), ub=np.full(2, 2.0))
    _, grid = grid_min_loss(LossSpec("rso"), interior, boxed, 1e-2)
    assert res.objective_value == pytest.approx(grid, abs=1e-3)


def test_vi_and_kkt_quadratic_interior():
    model = ConvexForwardModel(Quadratic(np.eye(2), np.zeros(2), np.zeros(2)),
                               np.vstack([np.eye(2), -np.eye(2)]), np.array([0.0, 0.0, -1.0, -1.0]))
    data = Dataset.shared(model, [[0.2, 0.7]])
    space = ParameterSpace(2, normalization=FixedComponent(0, 0.2))
    for est in (estimate_vi, estimate_kkt):
        res = est(data, space)
        np.testing.assert_allclose(res.theta_star, [0.2, 0.7], atol=1e-8)
        assert res.objective_value == pytest.approx(0.0, abs=1e-9)


def test_kkt_degenerate_flagged():
    model = ConvexForwardModel(Quadratic(np.zeros((2, 2)), np.zeros(2), np.zeros(2)), np.eye(2), np.zeros(2))
    data = Dataset.shared(model, [[0.0, 1.0]])
    with pytest.warns(DegenerateThetaWarning):
        res = estimate_kkt(data, ParameterSpace(2, E=np.eye(2), f=np.zeros(2)))
    assert res.objective_value == pytest.approx(0.0, abs=1e-12)
    assert res.status == "Degenerate"


def test_kkt_boundary_matches_lambda_grid():
    # f = 0.5|x|^2 - theta'x on x >= 0; x_hat on the boundary, theta pinned to a wrong value
    model = ConvexForwardModel(Quadratic(np.eye(2), np.zeros(2), np.zeros(2)), np.eye(2), np.zeros(2))
    x_hat = np.array([0.0, 2.0])
    theta = np.array([1.0, 1.0])
    direct = eval_loss("kkt", theta, x_hat, model)
    # stationarity x - theta - lam = 0, complementarity lam_j x_j
    grad = x_hat - theta
    lams = np.linspace(0, 3, 3001)
    best = min(np.abs(grad[0] - l1) + abs(grad[1] - 0.0 * 0) * 0 + np.abs(grad[1]) for l1 in lams)
    assert direct == pytest.approx(best, abs=1e-3)
    res = estimate_kkt(Dataset.shared(model, [x_hat]), ParameterSpace(2, E=np.eye(2), f=theta))
    assert res.objective_value == pytest.approx(direct, abs=1e-9)


# -- distance -----------------------------------------------------------------------------------
def test_distance_row_search_square():
    xs = [[1.1, 0.4], [1.1, 0.5], [1.1, 0.6]]
    res = estimate_distance(Dataset.shared(SQUARE, xs), ParameterSpace(2, normalization=L1Sphere()))
    np.testing.assert_allclose(res.theta_star, [-1.0, 0.0], atol=1e-9)
    assert res.objective_value == pytest.approx(0.1, abs=1e-9)
    assert res.diagnostics["method"] == "row_search"


def test_distance_vertex_observation():
    res = estimate_distance(Dataset.shared(SQUARE, [[1.0, 1.0]]), ParameterSpace(2, normalization=L1Sphere()))
    assert res.objective_value == pytest.approx(0.0, abs=1e-12)
    assert verify_inverse_feasible(SQUARE, res.theta_star, [1.0, 1.0])[0]


def test_distance_delta_net_against_grid():
    m2 = LinearForwardModel(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0], [1.0, 0], [0, 1.0], [-1.0, 0], [0, -1.0]]),
                            np.array([2.0, 2.0, 0.0, 0.0, -3.0, -3.0]))
    data = Dataset((([0.2, 1.2], 0), ([1.5, 0.5], 1)), (SQUARE, m2))
    space = ParameterSpace(2, normalization=L1Sphere())
    res = estimate_distance(data, space, delta=0.05)
    _, grid = grid_min_loss(LossSpec("distance"), data, space, 1e-3)
    assert res.diagnostics["method"] == "delta_net"
    assert grid - 1e-9 <= res.objective_value <= grid + 0.05


def test_delta_net_errors():
    with pytest.raises(EmptyNet):
        delta_net(ParameterSpace(2, lb=[0.0, 0.0], ub=[0.1, 0.1], G=np.array([[1.0, 1.0]]), h=[0.15]), delta=1.0)


def test_distance_to_optimal_set_face(unit_cover):
    d, _ = distance_to_optimal_set([1.0, 1.0], [1.0, 1.0], unit_cover)
    assert d == pytest.approx(np.sqrt(0.5))


# -- value at risk --------------------------------------------------------------------------------
def _outlier_data(rng):
    inliers = np.column_stack([1.0 + 0.01 * rng.uniform(size=8), rng.uniform(0.2, 0.8, size=8)])
    outliers = np.array([[0.5, 0.5], [0.4, 0.6]])
    return Dataset.shared(SQUARE, np.vstack([inliers, outliers]))


def test_var_excludes_outliers(rng):
    data = _outlier_data(rng)
    res = estimate_var(data, ParameterSpace(2, normalization=L1Sphere()), chi=0.8)
    np.testing.assert_array_equal(res.extras["selected"], [1] * 8 + [0] * 2)
    assert res.objective_value <= 0.01 + 1e-9


def test_var_small_big_m(rng):
    with pytest.raises(BigMViolation):
        estimate_var(_outlier_data(rng), ParameterSpace(2, normalization=L1Sphere()),
                     chi=1.0, big_m=0.05)


def test_var_identical_optimal_points():
    res = estimate_var(Dataset.shared(SQUARE, [[1.0, 0.5]] * 4), ParameterSpace(2, normalization=L1Sphere()), chi=0.5)
    assert res.objective_value == pytest.approx(0.0, abs=1e-12)


# -- planted noise ----------------------------------------------------------------------------------
@pytest.mark.parametrize("seed", range(3))
def test_noise_monotone_risk(seed):
    vals = []
    for sigma in (0.0, 0.01, 0.1):
        inst = generate_instance("lp", seed=seed, noise=sigma)
        vals.append(estimate_aso(inst.observations, ParameterSpace.simplex(3)).objective_value)
    assert vals[0] == pytest.approx(0.0, abs=1e-9)
    assert vals[0] <= vals[1] + 1e-9 <= vals[2] + 2e-9
