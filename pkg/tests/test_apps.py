import itertools

import numpy as np
import pytest

from invopt import ParameterSpace
from invopt.apps import (
    PathNetwork,
    TrafficInstance,
    bench_pathway,
    bench_traffic,
    calibrate_traffic,
    concordance_omega,
    decompose,
    equilibrium,
    estimate_pathway_costs,
    generate_instance,
    write_series,
)
from invopt.datadriven import estimate_aso
from invopt.errors import DecompositionInfeasible, DegenerateRange, InfeasiblePaths


def diamond():
    return PathNetwork(4, [(0, 1), (0, 2), (1, 3), (2, 3), (1, 2)], 0, 3)


def two_link(c=(1.0, 2.0)):
    return TrafficInstance(2, [(0, 1), (0, 1)], np.array(c), np.ones(2), [(0, 1, 1.0)])


# -- networks ----------------------------------------------------------------------------------
def test_paths_and_shortest_path():
    net = diamond()
    x = net.path_from_nodes([0, 1, 2, 3])
    np.testing.assert_array_equal(x, [1, 0, 0, 1, 1])
    assert net.is_path(x)
    length, sp = net.shortest_path(np.array([1.0, 2.0, 3.0, 1.0, 0.5]))
    assert length == pytest.approx(2.5)
    np.testing.assert_array_equal(sp, x)
    with pytest.raises(InfeasiblePaths):
        net.path_from_nodes([0, 3])


def _stage1_grid(net, paths, step=0.25):
    """Minimum total gap over the nonnegative L-inf sphere, facet by facet."""
    axis = np.arange(0, 1 + 1e-12, step)
    best = np.inf
    for i in range(net.n_arcs):
        for rest in itertools.product(axis, repeat=net.n_arcs - 1):
            th = np.insert(np.array(rest), i, 1.0)
            sp, _ = net.shortest_path(th)
            best = min(best, sum(th @ x - sp for x in paths))
    return best


def test_pathway_stage_one_matches_facet_sweep():
    net = diamond()
    clinical = [net.path_from_nodes([0, 1, 3]), net.path_from_nodes([0, 2, 3]), net.path_from_nodes([0, 1, 2, 3])]
    est = estimate_pathway_costs(net, clinical)
    assert est["stage1"] == pytest.approx(_stage1_grid(net, clinical), abs=1e-9)
    np.testing.assert_allclose(np.max(np.abs(est["theta"])), 1.0)


def test_pathway_stage_two_separates():
    net = diamond()
    clinical = [net.path_from_nodes([0, 1, 3]), net.path_from_nodes([0, 1, 2, 3])]
    est = estimate_pathway_costs(net, clinical, survived_paths=[clinical[0]], died_paths=[net.path_from_nodes([0, 2, 3])])
    assert est["stage1"] == pytest.approx(0.0, abs=1e-9)
    assert est["stage2"] < 0


def test_pathway_squared_variant_agrees_at_zero_gap():
    net = diamond()
    clinical = [net.path_from_nodes([0, 1, 3]), net.path_from_nodes([0, 1, 2, 3])]
    est = estimate_pathway_costs(net, clinical, variant="squared")
    assert est["stage1"] == pytest.approx(0.0, abs=1e-8)


def test_pathway_rejects_broken_paths():
    with pytest.raises(InfeasiblePaths):
        estimate_pathway_costs(diamond(), [np.array([1.0, 0, 0, 0, 0])])


def test_concordance_extremes_and_intermediate():
    net = diamond()
    ends = np.array([1.0, 2.0, 3.0, 1.0, 2.0])
    assert concordance_omega(ends, net.path_from_nodes([0, 2, 3]), net) == 1.0
    assert concordance_omega(ends, net.path_from_nodes([0, 1, 3]), net) == 0.0
    # the 3-arc path is shortest here, so both 2-arc paths sit strictly inside
    theta = np.array([1.0, 2.0, 3.0, 1.0, 0.5])
    mid = concordance_omega(theta, net.path_from_nodes([0, 2, 3]), net)
    assert mid == pytest.approx(2 / 3)
    raised = theta.copy()
    raised[1] += 0.5
    assert concordance_omega(raised, net.path_from_nodes([0, 2, 3]), net) < mid
    with pytest.raises(DegenerateRange):
        concordance_omega(np.ones(5), net.path_from_nodes([0, 1, 3]), net)


def test_concordance_monotone_in_detour_cost(rng):
    net = diamond()
    x = net.path_from_nodes([0, 2, 3])
    for _ in range(50):
        theta = rng.uniform(0.1, 2.0, size=5)
        _, sp = net.shortest_path(theta)
        arcs = [a for a in np.flatnonzero(x) if sp[a] == 0]
        if not arcs:
            continue
        try:
            before = concordance_omega(theta, x, net)
            theta2 = theta.copy()
            theta2[arcs[0]] += rng.uniform(0.1, 1.0)
            after = concordance_omega(theta2, x, net)
        except DegenerateRange:
            continue
        assert after <= before + 1e-12


# -- traffic ---------------------------------------------------------------------------------------
def test_two_link_equilibrium_flows():
    np.testing.assert_allclose(equilibrium(two_link(), [4.0]), [0.75, 0.25], atol=1e-4)


def test_calibration_recovers_four():
    res = calibrate_traffic(two_link(), [np.array([0.75, 0.25])], kappa=1e-6)
    assert res["theta"][0] == pytest.approx(4.0, abs=1e-3)
    np.testing.assert_allclose(equilibrium(two_link(), res["theta"]), [0.75, 0.25], atol=1e-3)


def test_symmetric_split_is_uninformative():
    res = calibrate_traffic(two_link((1.0, 1.0)), [np.array([0.5, 0.5])], kappa=0.1)
    assert res["theta"][0] == pytest.approx(0.0, abs=1e-9)


def test_bad_flows_rejected():
    with pytest.raises(DecompositionInfeasible):
        decompose(two_link(), np.array([0.5, 0.2]))
    with pytest.raises(DecompositionInfeasible):
        calibrate_traffic(two_link(), [np.array([2.0, -1.0])])


def test_bench_series(tmp_path):
    thetas, series = bench_traffic(two_link(), [np.array([0.75, 0.25])], [1e-6, 1e-2, 1.0])
    assert series["theta_0"][0] == pytest.approx(4.0, abs=1e-3)
    assert series["theta_0"][0] >= series["theta_0"][-1]
    write_series(tmp_path / "k.csv", series)
    lines = (tmp_path / "k.csv").read_text().splitlines()
    assert lines[0] == "kappa,theta_0,flow_error" and len(lines) == 4
    net = diamond()
    clinical = [net.path_from_nodes([0, 1, 3]), net.path_from_nodes([0, 1, 2, 3])]
    _, om = bench_pathway(net, clinical)
    assert om["group"] == ["clinical", "clinical"]


# -- generators --------------------------------------------------------------------------------------
@pytest.mark.parametrize("kind", ["lp", "knapsack", "path", "traffic"])
def test_generators_deterministic(kind):
    a = generate_instance(kind, seed=7)
    b = generate_instance(kind, seed=7)
    np.testing.assert_array_equal(a.theta_true, b.theta_true)


def test_planted_lp_zero_loss_and_noise():
    inst = generate_instance("lp", seed=3)
    res = estimate_aso(inst.observations, ParameterSpace.simplex(3))
    assert res.objective_value == pytest.approx(0.0, abs=1e-9)
    np.testing.assert_allclose(res.theta_star, inst.theta_true, atol=1e-4)
    noisy = generate_instance("lp", seed=3, noise=0.1)
    assert estimate_aso(noisy.observations, ParameterSpace.simplex(3)).objective_value > 0


def test_planted_traffic_recovered():
    inst = generate_instance("traffic", seed=4)
    res = calibrate_traffic(inst.model, inst.observations, kappa=1e-8)
    np.testing.assert_allclose(res["theta"], inst.theta_true, atol=1e-3)


def test_unknown_kind():
    with pytest.raises(ValueError):
        generate_instance("tsp")
