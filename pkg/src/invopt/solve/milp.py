"""Depth-first branch and bound over the simplex relaxation."""

import math

import numpy as np

from .simplex import INFEASIBLE, ITERATION_LIMIT, OPTIMAL, UNBOUNDED, LPResult, linprog

INT_TOL = 1e-6


def branch_and_bound(c, A, b, senses, lb, ub, integer, tol=1e-9, node_cap=100_000):
    """Minimize ``c'x`` with integrality on the flagged variables.

    Branches on the most fractional variable; the child on the side the
    relaxation value rounds to is explored first.  Returns an
    :class:`LPResult` whose ``info`` carries ``nodes`` and ``relaxation``.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    lb = np.full(n, -np.inf) if lb is None else np.asarray(lb, dtype=float)
    ub = np.full(n, np.inf) if ub is None else np.asarray(ub, dtype=float)
    integer = np.asarray(integer, dtype=bool)
    lb = np.where(integer, np.ceil(lb - INT_TOL), lb)
    ub = np.where(integer, np.floor(ub + INT_TOL), ub)

    best = None
    best_val = math.inf
    nodes = 0
    root_val = None
    stack = [(lb, ub)]
    while stack:
        if nodes >= node_cap:
            return LPResult(ITERATION_LIMIT, x=None if best is None else best.x,
                            info={"nodes": nodes})
        lo, hi = stack.pop()
        nodes += 1
        res = linprog(c, A, b, senses, lo, hi, tol=tol)
        if res.status == UNBOUNDED:
            if root_val is None:
                return LPResult(UNBOUNDED, info={"nodes": nodes})
            continue
        if res.status == ITERATION_LIMIT:
            return LPResult(ITERATION_LIMIT, info={"nodes": nodes})
        if not res.ok:
            if root_val is None:
                root_val = math.inf
            continue
        if root_val is None:
            root_val = res.objective
        if res.objective >= best_val - 1e-9 * max(1.0, abs(best_val)):
            continue
        x = res.x
        frac = np.where(integer, np.abs(x - np.round(x)), 0.0)
        j = int(np.argmax(frac))
        if frac[j] <= INT_TOL:
            x = np.where(integer, np.round(x), x)
            res.x = x
            res.objective = float(c @ x)
            best, best_val = res, res.objective
            continue
        down_hi = hi.copy()
        down_hi[j] = math.floor(x[j])
        up_lo = lo.copy()
        up_lo[j] = math.ceil(x[j])
        down, up = (lo, down_hi), (up_lo, hi)
        # pushed last is explored first
        if x[j] - math.floor(x[j]) >= 0.5:
            stack.extend([down, up])
        else:
            stack.extend([up, down])
    if best is None:
        return LPResult(INFEASIBLE, info={"nodes": nodes})
    best.info = {"nodes": nodes, "relaxation": root_val}
    best.status = OPTIMAL
    return best
