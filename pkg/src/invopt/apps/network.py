"""Shortest-path networks: two-stage pathway cost estimation and the concordance metric."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..classical._common import solve_pieces
from ..errors import DegenerateRange, InfeasiblePaths
from ..model.space import LInfSphere, ParameterSpace
from ..solve import LPBuilder, frank_wolfe


@dataclass(frozen=True)
class PathNetwork:
    """Directed network with one source and one sink.

    Parameters
    ----------
    n_nodes : int
    arcs : sequence of (tail, head)
    source, sink : int

    Notes
    -----
    A path is a 0/1 vector over arcs.  The incidence matrix has ``+1`` at
    an arc's tail and ``-1`` at its head, so a source-sink path satisfies
    ``A x = b`` with ``b = e_source - e_sink``.
    """

    n_nodes: int
    arcs: tuple
    source: int
    sink: int

    def __post_init__(self):
        arcs = tuple((int(i), int(j)) for i, j in self.arcs)
        if not arcs:
            raise ValueError("a network needs at least one arc")
        for i, j in arcs:
            if not (0 <= i < self.n_nodes and 0 <= j < self.n_nodes) or i == j:
                raise ValueError(f"invalid arc ({i}, {j})")
        if self.source == self.sink:
            raise ValueError("source and sink must differ")
        object.__setattr__(self, "arcs", arcs)

    @property
    def n_arcs(self):
        return len(self.arcs)

    @property
    def incidence(self):
        A = np.zeros((self.n_nodes, self.n_arcs))
        for a, (i, j) in enumerate(self.arcs):
            A[i, a] = 1.0
            A[j, a] = -1.0
        return A

    @property
    def balance(self):
        b = np.zeros(self.n_nodes)
        b[self.source] = 1.0
        b[self.sink] = -1.0
        return b

    def is_path(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float).ravel()
        return (
            x.size == self.n_arcs
            and bool(np.all(np.abs(x * (1 - x)) <= tol))
            and bool(np.allclose(self.incidence @ x, self.balance, atol=tol))
        )

    def path_from_nodes(self, nodes):
        """0/1 arc vector of the walk visiting ``nodes`` in order."""
        index = {arc: a for a, arc in enumerate(self.arcs)}
        x = np.zeros(self.n_arcs)
        for u, v in zip(nodes[:-1], nodes[1:]):
            if (u, v) not in index:
                raise InfeasiblePaths(f"no arc ({u}, {v}) in the network")
            x[index[(u, v)]] += 1.0
        return x

    def shortest_path(self, theta):
        """Bellman-Ford shortest source-sink path; returns ``(length, x)``."""
        theta = np.asarray(theta, dtype=float)
        dist = np.full(self.n_nodes, np.inf)
        pred = np.full(self.n_nodes, -1)
        dist[self.source] = 0.0
        for _ in range(self.n_nodes - 1):
            changed = False
            for a, (i, j) in enumerate(self.arcs):
                if dist[i] + theta[a] < dist[j] - 1e-15:
                    dist[j] = dist[i] + theta[a]
                    pred[j] = a
                    changed = True
            if not changed:
                break
        else:
            if any(dist[i] + theta[a] < dist[j] - 1e-12 for a, (i, j) in enumerate(self.arcs)):
                raise InfeasiblePaths("the network has a negative-cost cycle")
        if not np.isfinite(dist[self.sink]):
            raise InfeasiblePaths("the sink is unreachable from the source")
        x = np.zeros(self.n_arcs)
        node = self.sink
        while node != self.source:
            a = pred[node]
            x[a] = 1.0
            node = self.arcs[a][0]
        return float(dist[self.sink]), x

    def longest_walk(self, theta, steps):
        """Maximum cost of a source-sink walk with exactly ``steps`` arcs (DP over node and step)."""
        theta = np.asarray(theta, dtype=float)
        best = np.full(self.n_nodes, -np.inf)
        best[self.source] = 0.0
        for _ in range(int(steps)):
            nxt = np.full(self.n_nodes, -np.inf)
            for a, (i, j) in enumerate(self.arcs):
                if best[i] > -np.inf:
                    nxt[j] = max(nxt[j], best[i] + theta[a])
            best = nxt
        return float(best[self.sink])


def _check_paths(network, paths, what):
    out = []
    for k, x in enumerate(paths):
        x = np.asarray(x, dtype=float).ravel()
        if x.size != network.n_arcs or not np.allclose(network.incidence @ x, network.balance, atol=1e-9):
            raise InfeasiblePaths(f"{what} path {k} violates flow balance")
        if np.any(x < -1e-12):
            raise InfeasiblePaths(f"{what} path {k} has negative arc entries")
        out.append(x)
    return out


def _add_duality(b, network, theta, paths, name):
    """Potentials ``lam`` with ``A' lam <= theta`` and one gap variable per path."""
    A, bal = network.incidence, network.balance
    bound = network.n_arcs + 1.0
    lb = np.full(network.n_nodes, -bound)
    ub = np.full(network.n_nodes, bound)
    lb[network.sink] = ub[network.sink] = 0.0
    lam = b.var("lam", network.n_nodes, lb=lb, ub=ub) if "lam" not in b.blocks else b.blocks["lam"]
    if name == "eps":
        b.rows([(theta, np.eye(network.n_arcs)), (lam, -A.T)], ">=", np.zeros(network.n_arcs))
    eps = b.var(name, len(paths), lb=0.0)
    X = np.array(paths).reshape(len(paths), network.n_arcs)
    # theta' x_r - b' lam - eps_r = 0
    b.rows([(theta, X), (lam, -np.tile(bal, (len(paths), 1))), (eps, -np.eye(len(paths)))], "=",
           np.zeros(len(paths)))
    return lam, eps


def _cost_space(network, nonnegative):
    return ParameterSpace(network.n_arcs, lb=0.0 if nonnegative else None, normalization=LInfSphere())


def estimate_pathway_costs(network, clinical_paths, survived_paths=(), died_paths=(), variant="l1",
                           nonnegative=True, circulation=False, config=None):
    """Two-stage arc-cost estimation from observed care pathways.

    Stage one finds costs with ``||theta||_inf = 1`` minimizing the
    aggregate optimality gap ``eps_r = theta' x_r - b' lam`` of the clinical
    paths under dual feasibility ``A' lam <= theta`` (one program per
    L-inf facet).  Stage two fixes those gaps and, over the same system,
    minimizes ``(D / S) sum eps_s - sum eps_d`` so that survived paths look
    near-optimal and died paths do not.

    Parameters
    ----------
    variant : {'l1', 'squared'}
        Stage-one aggregate: sum of gaps (LP) or sum of squared gaps
        (conditional gradient per facet).
    nonnegative : bool
        Restrict costs to ``theta >= 0``.
    circulation : bool
        Also impose ``A theta = 0``.

    Returns
    -------
    dict
        ``theta``, ``stage1`` (objective), ``eps_clinical``, ``stage2``
        (objective or None), ``eps_survived``, ``eps_died``, ``duals``.

    Raises
    ------
    InfeasiblePaths
    """
    if variant not in ("l1", "squared"):
        raise ValueError("variant must be 'l1' or 'squared'")
    clinical = _check_paths(network, clinical_paths, "clinical")
    survived = _check_paths(network, survived_paths, "survived")
    died = _check_paths(network, died_paths, "died")
    if not clinical:
        raise InfeasiblePaths("at least one clinical path is required")
    space = _cost_space(network, nonnegative)
    A = network.incidence

    def base(b, theta):
        lam, eps = _add_duality(b, network, theta, clinical, "eps")
        if circulation:
            b.rows([(theta, A)], "=", np.zeros(network.n_nodes))
        return lam, eps

    if variant == "l1":
        def build1(b, theta, _):
            _, eps = base(b, theta)
            b.minimize(eps, np.ones(len(clinical)))

        k, sol = solve_pieces(space, build1, config)
        if k is None:
            raise InfeasiblePaths("no admissible cost vector satisfies the duality system")
        eps_star = sol["eps"]
        stage1 = float(eps_star.sum())
        theta, lam = sol["theta"], sol["lam"]
    else:
        theta, lam, eps_star, k = _squared_stage(network, clinical, space, base)
        stage1 = float(np.sum(eps_star ** 2))

    out = {"theta": theta, "stage1": stage1, "eps_clinical": eps_star, "duals": lam, "facet": k,
           "stage2": None, "eps_survived": np.zeros(0), "eps_died": np.zeros(0)}
    if not (survived or died):
        return out

    S, D = max(len(survived), 1), len(died)

    def build2(b, theta, _):
        _, eps = base(b, theta)
        b.rows([(eps, np.eye(len(clinical)))], "=", eps_star)
        if survived:
            _, es = _add_duality(b, network, theta, survived, "eps_s")
            b.minimize(es, np.full(len(survived), D / S))
        if died:
            _, ed = _add_duality(b, network, theta, died, "eps_d")
            b.minimize(ed, -np.ones(len(died)))

    k2, sol2 = solve_pieces(space, build2, config)
    if k2 is None:
        # fixed stage-one gaps can be slightly off on other facets; keep stage one
        return out
    out.update(
        theta=sol2["theta"], duals=sol2["lam"], facet=k2, stage2=float(sol2.objective),
        eps_survived=sol2["eps_s"] if survived else np.zeros(0),
        eps_died=sol2["eps_d"] if died else np.zeros(0),
    )
    out["eps_clinical"] = np.array([out["theta"] @ x - network.balance @ out["duals"] for x in clinical])
    return out


def _squared_stage(network, clinical, space, base):
    """Sum of squared gaps, minimized by conditional gradient on each facet."""
    best = None
    for k, piece in enumerate(space.pieces()):
        b = LPBuilder()
        theta = piece.add_to(b, "theta")
        base(b, theta)
        c, Aeq, beq, senses, lb, ub, _ = b.arrays()
        idx = b.blocks["eps"].slice

        def fun(z):
            return float(np.sum(z[idx] ** 2))

        def grad(z):
            g = np.zeros_like(z)
            g[idx] = 2 * z[idx]
            return g

        def curvature(z, d):
            return 2 * float(np.sum(d[idx] ** 2))

        res = frank_wolfe(fun, grad, Aeq, beq, senses, lb, ub, tol=1e-10, curvature=curvature)
        if res.x is None:
            continue
        val = fun(res.x)
        if best is None or val < best[0] - 1e-9:
            best = (val, k, res.x, b)
    if best is None:
        raise InfeasiblePaths("no admissible cost vector satisfies the duality system")
    _, k, z, b = best
    sol = b.solution(z)
    return sol["theta"], sol["lam"], sol["eps"], k


def concordance_omega(theta, x_hat, network, formula="prose"):
    """Concordance of a path with the costs ``theta``, in ``[0, 1]``.

    ``omega = 1 - (theta' x_hat - theta' x*) / (M - theta' x*)`` where
    ``x*`` is a shortest path and ``M`` the maximum cost of a walk with as
    many arcs as ``x_hat``.  ``formula='display'`` uses ``M - theta' x_hat``
    as the denominator instead.

    Raises
    ------
    DegenerateRange
        If the denominator is below ``1e-9``.
    """
    theta = np.asarray(theta, dtype=float).ravel()
    (x_hat,) = _check_paths(network, [x_hat], "observed")
    short, _ = network.shortest_path(theta)
    steps = int(round(x_hat.sum()))
    M = network.longest_walk(theta, steps)
    cost = float(theta @ x_hat)
    if formula == "prose":
        denom = M - short
    elif formula == "display":
        denom = M - cost
    else:
        raise ValueError("formula must be 'prose' or 'display'")
    if denom < 1e-9:
        raise DegenerateRange("longest walk and shortest path have the same cost")
    return float(np.clip(1.0 - (cost - short) / denom, 0.0, 1.0))
