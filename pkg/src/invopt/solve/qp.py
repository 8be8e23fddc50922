"""Primal active-set method for strictly convex quadratic programs.

Used for Euclidean projections (distance losses, online updates) and for
strictly convex quadratic forward models.
"""

import numpy as np

from .simplex import INFEASIBLE, ITERATION_LIMIT, OPTIMAL, LPResult, linprog


def _to_geq(A, b, senses, lb, ub):
    """Split the general form into equality rows and ``>=`` rows."""
    n = A.shape[1]
    eq_rows, eq_rhs, ge_rows, ge_rhs = [], [], [], []
    for a, r, s in zip(A, b, senses):
        if s == "=":
            eq_rows.append(a)
            eq_rhs.append(r)
        elif s == "<=":
            ge_rows.append(-a)
            ge_rhs.append(-r)
        else:
            ge_rows.append(a)
            ge_rhs.append(r)
    eye = np.eye(n)
    for j in range(n):
        if np.isfinite(lb[j]):
            ge_rows.append(eye[j])
            ge_rhs.append(lb[j])
        if np.isfinite(ub[j]):
            ge_rows.append(-eye[j])
            ge_rhs.append(-ub[j])
    E = np.array(eq_rows).reshape(-1, n)
    G = np.array(ge_rows).reshape(-1, n)
    return E, np.array(eq_rhs), G, np.array(ge_rhs)


def _independent(rows, new, tol=1e-9):
    if rows.shape[0] == 0:
        return np.linalg.norm(new) > tol
    M = np.vstack([rows, new])
    return np.linalg.matrix_rank(M, tol=tol * max(1.0, np.abs(M).max())) > np.linalg.matrix_rank(
        rows, tol=tol * max(1.0, np.abs(rows).max())
    )


def solve_qp(Q, q, A=None, b=None, senses=None, lb=None, ub=None, x0=None, tol=1e-10, max_iter=None):
    """Minimize ``0.5 x'Qx + q'x`` over a polyhedron.

    ``Q`` must be positive definite on the feasible directions.  Returns an
    :class:`LPResult` with ``info['multipliers']`` holding the ``>=``-row
    multipliers of the internal form.
    """
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    q = np.asarray(q, dtype=float).ravel()
    n = q.size
    A = np.zeros((0, n)) if A is None else np.asarray(A, dtype=float).reshape(-1, n)
    b = np.zeros(A.shape[0]) if b is None else np.asarray(b, dtype=float).ravel()
    if senses is None:
        senses = [">="] * A.shape[0]
    elif isinstance(senses, str):
        senses = [senses] * A.shape[0]
    senses = [{"G": ">=", "L": "<=", "E": "=", "==": "="}.get(s, s) for s in senses]
    lb = np.full(n, -np.inf) if lb is None else np.asarray(lb, dtype=float)
    ub = np.full(n, np.inf) if ub is None else np.asarray(ub, dtype=float)
    E, e, G, g = _to_geq(A, b, senses, lb, ub)

    if x0 is None or not _feasible(x0, E, e, G, g):
        start = linprog(np.zeros(n), A, b, senses, lb, ub)
        if not start.ok:
            return LPResult(INFEASIBLE if start.status == INFEASIBLE else start.status)
        x = start.x.copy()
    else:
        x = np.asarray(x0, dtype=float).copy()

    scale = max(1.0, float(np.abs(g).max(initial=0.0)), float(np.abs(e).max(initial=0.0)))
    act_tol = 1e-9 * scale
    # working set: indices into G that are treated as equalities
    work = []
    base = E.copy()
    for i in np.flatnonzero(np.abs(G @ x - g) <= act_tol) if G.size else []:
        rows = np.vstack([base] + [G[work]]) if work else base
        if _independent(rows, G[i]):
            work.append(int(i))
    if max_iter is None:
        max_iter = 50 * (n + G.shape[0] + 10)

    for it in range(max_iter):
        W = np.vstack([E, G[work]]) if work else E
        k = W.shape[0]
        grad = Q @ x + q
        K = np.zeros((n + k, n + k))
        K[:n, :n] = Q
        K[:n, n:] = -W.T
        K[n:, :n] = W
        rhs = np.concatenate([-grad, np.zeros(k)])
        sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
        p = sol[:n]
        mu = sol[n:]
        if k >= n and np.linalg.matrix_rank(W) == n:
            # a vertex of the working set admits no step; roundoff would otherwise cycle
            p = np.zeros(n)
        pscale = max(1.0, float(np.abs(x).max(initial=0.0)))
        if np.abs(p).max(initial=0.0) <= 1e-11 * pscale:
            mu_ineq = mu[E.shape[0]:]
            if mu_ineq.size == 0 or mu_ineq.min() >= -tol * max(1.0, np.abs(grad).max()):
                mult = np.zeros(G.shape[0])
                mult[work] = mu_ineq
                return LPResult(
                    OPTIMAL,
                    x=x,
                    objective=float(0.5 * x @ Q @ x + q @ x),
                    iterations=it,
                    info={"multipliers": mult, "eq_multipliers": mu[: E.shape[0]]},
                )
            work.pop(int(np.argmin(mu_ineq)))
            continue
        alpha = 1.0
        block = None
        if G.shape[0]:
            Gp = G @ p
            slack = G @ x - g
            W_rows = np.vstack([E, G[work]]) if work else E
            for i in np.flatnonzero(Gp < -1e-12):
                if i in work or not _independent(W_rows, G[i]):
                    continue
                step = max(slack[i], 0.0) / -Gp[i]
                if step < alpha:
                    alpha, block = step, int(i)
        x = x + alpha * p
        if block is not None:
            work.append(block)
    return LPResult(ITERATION_LIMIT, x=x)


def _feasible(x, E, e, G, g, tol=1e-9):
    x = np.asarray(x, dtype=float)
    ok = True
    if E.size:
        ok &= np.all(np.abs(E @ x - e) <= tol * (1 + np.abs(e)))
    if G.size:
        ok &= np.all(G @ x - g >= -tol * (1 + np.abs(g)))
    return bool(ok)


def project(point, A=None, b=None, senses=None, lb=None, ub=None):
    """Euclidean projection of ``point`` onto a polyhedron."""
    point = np.asarray(point, dtype=float).ravel()
    n = point.size
    return solve_qp(np.eye(n), -point, A, b, senses, lb, ub)
