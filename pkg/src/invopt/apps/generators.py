"""Synthetic instances with a planted parameter."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..model.data import Dataset
from ..model.forward import LinearForwardModel
from ..oracles import enumerate_vertices
from ..solve import solve_forward
from .network import PathNetwork
from .traffic import TrafficInstance, equilibrium

KINDS = ("lp", "knapsack", "path", "traffic")


@dataclass
class PlantedInstance:
    """A generated instance: forward data, the planted parameter and observations."""

    kind: str
    model: object
    theta_true: np.ndarray
    observations: object
    extra: dict = field(default_factory=dict)


def covering_lp(rng, n, m):
    """``min theta' x`` over ``{x >= 0, A x >= b}`` with ``A >= 0`` and ``b > 0``."""
    A = rng.uniform(0.2, 1.0, size=(m, n))
    b = rng.uniform(1.0, 2.0, size=m)
    return LinearForwardModel(np.ones(n), np.vstack([np.eye(n), A]), np.concatenate([np.zeros(n), b]))


def _facet_vertices(model, j):
    verts = enumerate_vertices(model.A, model.b, model.senses)
    on = np.abs(verts @ model.A[j] - model.b[j]) <= 1e-9
    return verts[on]


def _lp(rng, size, n_obs, noise):
    n = size or 3
    for _ in range(100):
        model = covering_lp(rng, n, n + 1)
        facets = [j for j in range(n, model.m) if len(_facet_vertices(model, j)) >= n]
        if not facets:
            continue
        j = int(rng.choice(facets))
        verts = _facet_vertices(model, j)
        a = model.A[j]
        theta = a / np.abs(a).sum()
        k = n_obs or 2 * n
        xs = rng.dirichlet(np.ones(len(verts)), size=k) @ verts
        if noise > 0:
            xs = xs + noise * np.abs(rng.standard_normal(xs.shape))
        return PlantedInstance("lp", model, theta, Dataset.shared(model, xs), {"row": j, "facet_vertices": verts})
    raise RuntimeError("could not draw a covering LP with a full facet")


def _knapsack(rng, size, n_obs, noise):
    n = size or 6
    w = rng.integers(1, 6, size=n).astype(float)
    cap = float(np.floor(w.sum() / 2))
    theta = rng.uniform(1.0, 5.0, size=n)
    A = np.vstack([w, np.eye(n), np.eye(n)])
    b = np.concatenate([[cap], np.ones(n), np.zeros(n)])
    senses = ["<="] * (n + 1) + [">="] * n
    model = LinearForwardModel(theta, A, b, senses, integer=np.ones(n, dtype=bool), sense="max")
    x = solve_forward(model).primal
    return PlantedInstance("knapsack", model, theta, Dataset.shared(model, [np.round(x)]), {"weights": w, "capacity": cap})


def layered_network(width, layers):
    """Source, ``layers`` columns of ``width`` nodes fully linked column to column, sink."""
    arcs = []
    col = [[1 + layer * width + i for i in range(width)] for layer in range(layers)]
    sink = 1 + layers * width
    arcs += [(0, v) for v in col[0]]
    for left, right in zip(col[:-1], col[1:]):
        arcs += [(u, v) for u in left for v in right]
    arcs += [(u, sink) for u in col[-1]]
    return PathNetwork(sink + 1, arcs, 0, sink)


def _path(rng, size, n_obs, noise):
    net = layered_network(2, size or 2)
    theta = rng.uniform(0.1, 1.0, size=net.n_arcs)
    _, x = net.shortest_path(theta)
    return PlantedInstance("path", net, theta, [x], {})


def _traffic(rng, size, n_obs, noise):
    arcs = [(0, 1), (0, 2), (1, 3), (2, 3), (1, 2)]
    c = rng.uniform(1.0, 3.0, size=len(arcs))
    m = rng.uniform(1.0, 2.0, size=len(arcs))
    inst = TrafficInstance(4, arcs, c, m, [(0, 3, float(rng.uniform(1.0, 3.0)))], degree=1)
    theta = np.array([rng.uniform(0.5, 5.0)])
    flows = [equilibrium(inst, theta)]
    return PlantedInstance("traffic", inst, theta, flows, {})


def generate_instance(kind, seed=0, size=None, n_obs=None, noise=0.0):
    """Reproducible instance with observations optimal for a planted parameter.

    Parameters
    ----------
    kind : {'lp', 'knapsack', 'path', 'traffic'}
    seed : int
    size : int, optional
        Number of variables (lp, knapsack) or layers (path).
    n_obs : int, optional
        Observations for the lp kind (``2 n`` by default).
    noise : float
        Scale of the nonnegative perturbation added to lp observations;
        covering regions stay feasible under it.

    Notes
    -----
    For the lp kind ``theta_true`` is the L1-normalized normal of a facet
    and the observations are random points of that facet, so the planted
    parameter is the only zero-loss point on the simplex.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown instance kind {kind!r}; expected one of {', '.join(KINDS)}")
    rng = np.random.default_rng(seed)
    return {"lp": _lp, "knapsack": _knapsack, "path": _path, "traffic": _traffic}[kind](rng, size, n_obs, noise)
