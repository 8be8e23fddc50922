"""Wardrop-equilibrium traffic: forward assignment and polynomial cost calibration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DecompositionInfeasible
from ..model.forward import ConvexForwardModel
from ..model.objectives import Basis, PowerTerm
from ..solve import LPBuilder, frank_wolfe, linprog, solve_forward


@dataclass(frozen=True)
class TrafficInstance:
    """Road network with link travel times ``c_a (1 + sum_k theta_k (x_a / m_a)^k)``.

    Parameters
    ----------
    n_nodes : int
    arcs : sequence of (tail, head)
    free_flow : (n_arcs,) array
        Free-flow times ``c_a > 0``.
    capacity : (n_arcs,) array
        Capacities ``m_a > 0``.
    demands : sequence of (origin, destination, amount)
    degree : int
        Number of polynomial weights.
    """

    n_nodes: int
    arcs: tuple
    free_flow: np.ndarray
    capacity: np.ndarray
    demands: tuple
    degree: int = 1

    def __post_init__(self):
        arcs = tuple((int(i), int(j)) for i, j in self.arcs)
        c = np.asarray(self.free_flow, dtype=float).ravel()
        m = np.asarray(self.capacity, dtype=float).ravel()
        if c.size != len(arcs) or m.size != len(arcs):
            raise ValueError("one free-flow time and capacity per arc")
        if np.any(c <= 0) or np.any(m <= 0):
            raise ValueError("free-flow times and capacities must be positive")
        demands = tuple((int(o), int(d), float(q)) for o, d, q in self.demands)
        if any(q < 0 for _, _, q in demands):
            raise ValueError("demands must be nonnegative")
        if self.degree < 1:
            raise ValueError("degree must be at least 1")
        object.__setattr__(self, "arcs", arcs)
        object.__setattr__(self, "free_flow", c)
        object.__setattr__(self, "capacity", m)
        object.__setattr__(self, "demands", demands)

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

    def od_balance(self, k):
        o, d, q = self.demands[k]
        b = np.zeros(self.n_nodes)
        b[o], b[d] = q, -q
        return b

    def travel_times(self, x, theta):
        """Link times ``c_a (1 + sum_k theta_k (x_a / m_a)^k)``."""
        u = np.asarray(x, dtype=float) / self.capacity
        powers = np.column_stack([u ** (k + 1) for k in range(self.degree)])
        return self.free_flow * (1.0 + powers @ np.asarray(theta, dtype=float))


def _aggregation(inst):
    K = len(inst.demands)
    return np.hstack([np.eye(inst.n_arcs)] * K)


def forward_model(inst, theta=None):
    """Beckmann program over per-OD arc flows; its minimizer is the equilibrium."""
    K, n = len(inst.demands), inst.n_arcs
    S = _aggregation(inst)
    base = (PowerTerm(inst.free_flow, 1.0, inst.capacity, S),)
    terms = tuple(PowerTerm(inst.free_flow, k + 2.0, inst.capacity, S) for k in range(inst.degree))
    A_inc = inst.incidence
    rows, rhs = [], []
    for k in range(K):
        block = np.zeros((inst.n_nodes, K * n))
        block[:, k * n:(k + 1) * n] = A_inc
        rows.append(block)
        rhs.append(inst.od_balance(k))
    A = np.vstack(rows + [np.eye(K * n)])
    b = np.concatenate(rhs + [np.zeros(K * n)])
    senses = ["="] * (K * inst.n_nodes) + [">="] * (K * n)
    theta = np.zeros(inst.degree) if theta is None else theta
    return ConvexForwardModel(Basis(terms, base, theta), A, b, senses)


def equilibrium(inst, theta, tol=1e-10):
    """Aggregate equilibrium arc flows under ``theta``."""
    rep = solve_forward(forward_model(inst, theta), theta=np.asarray(theta, dtype=float),
                        config={"fw.tol": tol, "fw.max_iter": 50_000})
    return _aggregation(inst) @ rep.primal


def decompose(inst, x):
    """Per-OD flows summing to ``x``; raises if none exist."""
    K, n = len(inst.demands), inst.n_arcs
    A_inc = inst.incidence
    b = LPBuilder()
    ys = [b.var(f"y{k}", n, lb=0.0) for k in range(K)]
    for k, y in enumerate(ys):
        b.rows([(y, A_inc)], "=", inst.od_balance(k))
    b.rows([(y, np.eye(n)) for y in ys], "=", x)
    sol = b.solve()
    if not sol.ok:
        raise DecompositionInfeasible("observed flows are not a sum of origin-destination flows")
    return [sol[y] for y in ys]


def calibrate_traffic(inst, flows, kappa=1e-6, weights=None, theta_max=1e3, tol=1e-12):
    """Polynomial cost weights under which the observed flows are equilibria.

    For each period the variational-inequality gap
    ``t(x; theta)' x - sum_w q_w (pi_w[d] - pi_w[o])`` is minimized, with
    node potentials ``pi_w`` satisfying ``pi_w[j] - pi_w[i] <= t_a(x; theta)``
    on every arc, plus the ridge ``kappa sum_k delta_k theta_k^2``.  The
    weights are kept in ``[0, theta_max]``; with ``theta = 0`` the travel
    times stay at their free-flow values, never zero.  Solved by conditional
    gradient with exact line search.

    Parameters
    ----------
    flows : sequence of (n_arcs,) arrays
        Observed aggregate flows, one per period.
    kappa : float
        Ridge weight.
    weights : (degree,) array, optional
        Ridge weights ``delta_k`` (ones by default).

    Returns
    -------
    dict
        ``theta``, ``gap`` (total VI gap), ``objective``, ``potentials``.

    Raises
    ------
    DecompositionInfeasible
    """
    flows = [np.asarray(x, dtype=float).ravel() for x in np.atleast_2d(flows)]
    for x in flows:
        if x.size != inst.n_arcs or np.any(x < -1e-12):
            raise DecompositionInfeasible("flow vectors need one nonnegative entry per arc")
        decompose(inst, x)
    D = inst.degree
    delta = np.ones(D) if weights is None else np.asarray(weights, dtype=float).ravel()
    K, N, n = len(inst.demands), inst.n_nodes, inst.n_arcs
    umax = max(float(np.max(x / inst.capacity)) for x in flows)
    bound = float(np.sum(inst.free_flow)) * (1.0 + theta_max * sum(umax ** (k + 1) for k in range(D))) + 1.0

    b = LPBuilder()
    theta = b.var("theta", D, lb=0.0, ub=theta_max)
    gap_lin = np.zeros(D)
    gap_const = 0.0
    pots = []
    for p, x in enumerate(flows):
        u = x / inst.capacity
        P = np.column_stack([u ** (k + 1) for k in range(D)])
        # t(x; theta) = c + (c * P) theta
        cP = inst.free_flow[:, None] * P
        gap_lin += cP.T @ x
        gap_const += float(inst.free_flow @ x)
        for w, (o, d, q) in enumerate(inst.demands):
            lb = np.full(N, -bound)
            ub = np.full(N, bound)
            lb[o] = ub[o] = 0.0
            pi = b.var(f"pi{p}_{w}", N, lb=lb, ub=ub)
            pots.append(pi)
            # t_a - pi[j] + pi[i] >= 0
            b.rows([(theta, cP), (pi, inst.incidence.T)], ">=", -inst.free_flow)
            coef = np.zeros(N)
            coef[d] = -q
            b.minimize(pi, coef)
    b.minimize(theta, gap_lin)
    b.obj_const += gap_const
    c, A, rhs, senses, lo, hi, _ = b.arrays()
    sl = theta.slice

    def fun(z):
        return float(c @ z) + b.obj_const + kappa * float(delta @ z[sl] ** 2)

    def grad(z):
        g = c.copy()
        g[sl] += 2 * kappa * delta * z[sl]
        return g

    def curvature(z, dvec):
        return 2 * kappa * float(delta @ dvec[sl] ** 2)

    if kappa > 0:
        res = frank_wolfe(fun, grad, A, rhs, senses, lo, hi, tol=tol, max_iter=100_000, curvature=curvature)
    else:
        res = linprog(c, A, rhs, senses, lo, hi)
    if res.x is None:
        raise DecompositionInfeasible(f"calibration program ended {res.status}")
    sol = b.solution(res.x)
    th = sol["theta"]
    return {
        "theta": th,
        "gap": float(sol.objective),
        "objective": fun(res.x),
        "potentials": [sol[pi] for pi in pots],
        "status": res.status,
    }
