"""Inverse problems over the constraint data."""

from __future__ import annotations

import numpy as np

from .. import config as _config
from ..errors import InverseInfeasible, NoCandidateFacet, UnsupportedCombination
from ..model.data import EstimationResult
from ..model.forward import LinearForwardModel
from ..model.space import NormToPrior, ParameterSpace
from ..solve import LPBuilder
from ._common import Timer, forward_gap, solve_pieces


BETA_FLOOR = 1e-6


def _add_distance(b, terms, target, p):
    """Minimize ``||sum_k M_k v_k - target||_p`` for blocks ``v_k``."""
    d = target.size
    eye = np.eye(d)
    if p == 1:
        t = b.var("dist", d, lb=0.0)
        b.rows([(t, eye)] + [(v, M) for v, M in terms], ">=", target)
        b.rows([(t, eye)] + [(v, -M) for v, M in terms], ">=", -target)
        b.minimize(t, np.ones(d))
    else:
        s = b.var("dist", 1, lb=0.0)
        ones = np.ones((d, 1))
        b.rows([(s, ones)] + [(v, M) for v, M in terms], ">=", target)
        b.rows([(s, ones)] + [(v, -M) for v, M in terms], ">=", -target)
        b.minimize(s, [1.0])


def estimate_constraint_matrix(model, x_hat, prior=None, p=1, config=None):
    """Perturb the nearest facet so that ``x_hat`` becomes optimal.

    Exactly one row ``j`` of the constraint matrix changes.  For each row
    the cheapest replacement ``phi`` with ``phi' x_hat = b_j`` is found in
    two ways: keeping ``phi`` out of the certificate (then ``c`` must lie in
    the cone of the other active rows, and ``phi`` is a projection onto
    a hyperplane), or writing ``phi = beta c - sum_k mu_k a_k`` over the
    other active rows with ``beta > 0, mu >= 0``, which is linear.  Rows whose
    removal leaves ``x_hat`` infeasible are skipped.  Candidates are
    re-certified by a forward solve; the cheapest wins, ties to the lowest
    row index.

    Parameters
    ----------
    model : LinearForwardModel
        Known cost ``c`` and right-hand side ``b``.
    prior : (m, n) array, optional
        Prior matrix; ``model.A`` by default.
    p : {1, inf}

    Returns
    -------
    EstimationResult
        ``theta_star`` is the recovered matrix; ``extras['row']`` is ``j``.

    Raises
    ------
    NoCandidateFacet
    """
    if model.is_integer:
        raise UnsupportedCombination("constraint-matrix estimation needs a continuous forward")
    if p not in (1, np.inf):
        raise ValueError("p must be 1 or inf")
    if any(s != ">=" for s in model.senses):
        raise UnsupportedCombination("constraint-matrix estimation expects >= rows")
    c = model.c if model.sense == "min" else -model.c
    Phi0 = np.array(model.A if prior is None else prior, dtype=float)
    b_vec = model.b
    m, n = Phi0.shape
    x_hat = np.asarray(x_hat, dtype=float).ravel()
    act_tol = _config.get(config, "activity.tol")
    slack = Phi0 @ x_hat - b_vec
    active = np.abs(slack) <= act_tol * (1 + np.abs(b_vec))
    feasible = slack >= -act_tol * (1 + np.abs(b_vec))
    tol = _config.get(config, "lp.tol")

    candidates = []
    with Timer() as tm:
        for j in range(m):
            others = [k for k in range(m) if k != j]
            if not np.all(feasible[others]):
                continue
            act = [k for k in others if active[k]]
            options = []
            # phi outside the certificate: c in cone of the other active rows
            if act:
                b = LPBuilder()
                mu = b.var("mu", len(act), lb=0.0)
                b.rows([(mu, Phi0[act].T)], "=", c)
                cone_ok = b.solve(tol=tol).ok
            else:
                cone_ok = not np.any(c)
            if cone_ok:
                b = LPBuilder()
                phi = b.var("phi", n)
                b.row([(phi, x_hat)], "=", b_vec[j])
                _add_distance(b, [(phi, np.eye(n))], Phi0[j], p)
                sol = b.solve(tol=tol)
                if sol.ok:
                    options.append(sol["phi"])
            # phi = beta c - sum mu_k a_k
            b = LPBuilder()
            # beta = 0 drops c from the certificate, so it must stay positive
            beta = b.var("beta", 1, lb=BETA_FLOOR * max(1.0, np.abs(Phi0[j]).max()) / max(1e-12, np.abs(c).max()))
            mu = b.var("mu", len(act), lb=0.0)
            terms = [(beta, c.reshape(n, 1))]
            if act:
                terms.append((mu, -Phi0[act].T))
            b.row([(beta, [c @ x_hat])] + ([(mu, -Phi0[act] @ x_hat)] if act else []), "=", b_vec[j])
            _add_distance(b, terms, Phi0[j], p)
            sol = b.solve(tol=tol)
            if sol.ok:
                phi = sol["beta"][0] * c - (Phi0[act].T @ sol["mu"] if act else 0.0)
                options.append(phi)
            for phi in options:
                Phi = Phi0.copy()
                Phi[j] = phi
                fwd = LinearForwardModel(c, Phi, b_vec)
                if forward_gap(fwd, c, x_hat, config) <= 1e-6 * max(1.0, abs(c @ x_hat)):
                    dist = float(np.linalg.norm(phi - Phi0[j], ord=p))
                    candidates.append((dist, j, Phi))
    if not candidates:
        raise NoCandidateFacet("no single-row perturbation makes the observation optimal")
    best = min(candidates, key=lambda t: (round(t[0], 9), t[1]))
    dist, j, Phi = best
    return EstimationResult(
        theta_star=Phi,
        objective_value=dist,
        per_obs_loss=np.zeros(1),
        diagnostics={"row": j, "candidates": len(candidates), "runtime": tm.elapsed},
        extras={"row": j, "Phi": Phi},
    )


def estimate_constraints_feasibility(prior_Phi, prior_psi, x_hat, space=None, p=1, adjustable="both",
                                     config=None):
    """Closest constraint data ``(Phi, psi)`` under which ``x_hat`` is feasible.

    Solves ``min ||(Phi, psi) - (Phi0, psi0)||_p`` subject to
    ``Phi x_hat >= psi`` and ``(Phi, psi)`` admissible.  The stacked vector
    is ``Phi`` row-major followed by ``psi``.

    Parameters
    ----------
    adjustable : {'both', 'rhs', 'matrix'}
        Which block may move when ``space`` is not given.

    Raises
    ------
    InverseInfeasible
    """
    Phi0 = np.atleast_2d(np.asarray(prior_Phi, dtype=float))
    psi0 = np.asarray(prior_psi, dtype=float).ravel()
    m, n = Phi0.shape
    x_hat = np.asarray(x_hat, dtype=float).ravel()
    prior = np.concatenate([Phi0.ravel(), psi0])
    d = prior.size
    if space is None:
        lb = np.full(d, -np.inf)
        ub = np.full(d, np.inf)
        if adjustable == "rhs":
            lb[: m * n] = ub[: m * n] = Phi0.ravel()
        elif adjustable == "matrix":
            lb[m * n:] = ub[m * n:] = psi0
        elif adjustable != "both":
            raise ValueError("adjustable must be 'both', 'rhs' or 'matrix'")
        space = ParameterSpace(d, lb=lb, ub=ub, prior=prior, objective_mode=NormToPrior(p))
    elif space.prior is None:
        space = space.replace(prior=prior, objective_mode=NormToPrior(p))
    if space.dim != d:
        raise ValueError(f"space must have {d} components (Phi row-major, then psi)")
    # Phi x_hat - psi >= 0 written on the stacked vector
    rows = np.zeros((m, d))
    for j in range(m):
        rows[j, j * n:(j + 1) * n] = x_hat
        rows[j, m * n + j] = -1.0

    def build(b, theta, _):
        b.rows([(theta, rows)], ">=", np.zeros(m))
        space.add_h(b, theta)

    with Timer() as tm:
        k, sol = solve_pieces(space, build, config)
    if k is None:
        raise InverseInfeasible("no admissible constraint data keeps the observation feasible")
    vec = sol["theta"]
    Phi, psi = vec[: m * n].reshape(m, n), vec[m * n:]
    return EstimationResult(
        theta_star=vec,
        objective_value=space.h_value(vec),
        per_obs_loss=np.zeros(1),
        diagnostics={"piece": k, "min_slack": float(np.min(Phi @ x_hat - psi)), "runtime": tm.elapsed},
        extras={"Phi": Phi, "psi": psi},
    )
