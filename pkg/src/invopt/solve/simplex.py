"""Dense two-phase revised simplex.

The solver works on the general form

    min c'x  s.t.  A_i x (>=|<=|=) b_i,   lb <= x <= ub

and returns one dual value per input row.  Duals follow the minimization
convention: nonnegative for ``>=`` rows, nonpositive for ``<=`` rows and
free for equalities, so that ``c = A'y`` plus bound multipliers.

Pricing is Dantzig's rule; after any degenerate pivot the next choice
switches to Bland's rule, which rules out cycling.  The basis inverse is
kept explicitly, updated with eta transformations and recomputed from
scratch every ``refactor_every`` pivots.
"""

from dataclasses import dataclass, field

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration_limit"

SENSES = (">=", "<=", "=")


@dataclass
class LPResult:
    status: str
    x: np.ndarray | None = None
    objective: float = float("nan")
    row_duals: np.ndarray | None = None
    iterations: int = 0
    info: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.status == OPTIMAL


def _normalize_senses(senses, m):
    if senses is None:
        return [">="] * m
    if isinstance(senses, str):
        return [senses] * m
    out = []
    for s in senses:
        s = {"G": ">=", "L": "<=", "E": "=", "==": "="}.get(s, s)
        if s not in SENSES:
            raise ValueError(f"unknown constraint sense {s!r}")
        out.append(s)
    if len(out) != m:
        raise ValueError("one sense per row is required")
    return out


class _Standardizer:
    """Maps the general form onto  M z = r, z >= 0."""

    def __init__(self, c, A, b, senses, lb, ub):
        n = c.size
        m = A.shape[0]
        cols = []  # (original index, sign)
        shift = np.zeros(n)
        ub_rows = []  # (std column, bound)
        for j in range(n):
            lo, hi = lb[j], ub[j]
            if np.isfinite(lo):
                shift[j] = lo
                cols.append((j, 1.0))
                if np.isfinite(hi):
                    if hi < lo - 1e-12:
                        raise _BoundConflict()
                    ub_rows.append((len(cols) - 1, hi - lo))
            elif np.isfinite(hi):
                shift[j] = hi
                cols.append((j, -1.0))
            else:
                cols.append((j, 1.0))
                cols.append((j, -1.0))
        nz = len(cols)
        T = np.zeros((n, nz))
        for k, (j, s) in enumerate(cols):
            T[j, k] = s
        self.T = T
        self.shift = shift
        self.const = float(c @ shift)
        AT = A @ T
        rhs = b - A @ shift

        n_slack = sum(1 for s in senses if s != "=") + len(ub_rows)
        rows = m + len(ub_rows)
        M = np.zeros((rows, nz + n_slack))
        r = np.zeros(rows)
        M[:m, :nz] = AT
        r[:m] = rhs
        k = nz
        for i, s in enumerate(senses):
            if s == ">=":
                M[i, k] = -1.0
                k += 1
            elif s == "<=":
                M[i, k] = 1.0
                k += 1
        for t, (col, bound) in enumerate(ub_rows):
            M[m + t, col] = 1.0
            M[m + t, k] = 1.0
            r[m + t] = bound
            k += 1
        flip = np.where(r < 0, -1.0, 1.0)
        self.M = M * flip[:, None]
        self.r = r * flip
        self.flip = flip
        self.cost = np.concatenate([T.T @ c, np.zeros(n_slack)])
        self.n_struct = nz
        self.m_input = m

    def recover(self, z):
        return self.shift + self.T @ z[: self.n_struct]


class _BoundConflict(Exception):
    pass


def linprog(
    c,
    A=None,
    b=None,
    senses=None,
    lb=None,
    ub=None,
    tol=1e-9,
    max_iter=None,
    refactor_every=50,
):
    """Solve a dense LP with the revised simplex method.

    Parameters
    ----------
    c : (n,) array
        Objective coefficients (minimized).
    A, b : (m, n) array and (m,) array, optional
        Constraint rows.
    senses : sequence of {'>=', '<=', '='}, optional
        Row senses, ``'>='`` for every row when omitted.
    lb, ub : (n,) arrays, optional
        Variable bounds; defaults are free variables.

    Returns
    -------
    LPResult
    """
    c = np.asarray(c, dtype=float).ravel()
    n = c.size
    A = np.zeros((0, n)) if A is None else np.atleast_2d(np.asarray(A, dtype=float))
    if A.size == 0:
        A = A.reshape(0, n)
    b = np.zeros(A.shape[0]) if b is None else np.asarray(b, dtype=float).ravel()
    if A.shape[1] != n or b.size != A.shape[0]:
        raise ValueError("inconsistent LP dimensions")
    senses = _normalize_senses(senses, A.shape[0])
    lb = np.full(n, -np.inf) if lb is None else np.asarray(lb, dtype=float).copy()
    ub = np.full(n, np.inf) if ub is None else np.asarray(ub, dtype=float).copy()

    try:
        std = _Standardizer(c, A, b, senses, lb, ub)
    except _BoundConflict:
        return LPResult(INFEASIBLE)
    M, r = std.M, std.r
    rows, N = M.shape
    if max_iter is None:
        max_iter = 20 * (rows + N) + 1000

    scale = max(1.0, float(np.abs(r).max(initial=0.0)))
    feas_tol = 1e-8 * scale

    # phase I on an artificial identity basis
    Mx = np.hstack([M, np.eye(rows)])
    allowed = np.ones(N + rows, dtype=bool)
    basis = np.arange(N, N + rows)
    cost1 = np.concatenate([np.zeros(N), np.ones(rows)])
    state = _Simplex(Mx, r, basis, tol, refactor_every)
    status = state.run(cost1, allowed, max_iter)
    if status == ITERATION_LIMIT:
        return LPResult(ITERATION_LIMIT, iterations=state.iterations)
    if float(cost1[state.basis] @ state.xB) > feas_tol:
        return LPResult(INFEASIBLE, iterations=state.iterations)
    state.drive_out_artificials(N)

    # phase II, artificials may stay basic (redundant rows) but never enter
    allowed[N:] = False
    cost2 = np.concatenate([std.cost, np.zeros(rows)])
    status = state.run(cost2, allowed, max_iter)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, iterations=state.iterations)
    if status == ITERATION_LIMIT:
        return LPResult(ITERATION_LIMIT, iterations=state.iterations)

    state.refactor()
    z = np.zeros(N + rows)
    z[state.basis] = np.maximum(state.xB, 0.0)
    x = std.recover(z)
    y_std = cost2[state.basis] @ state.Binv
    y = (y_std * std.flip)[: std.m_input]
    return LPResult(
        OPTIMAL,
        x=x,
        objective=float(c @ x),
        row_duals=y,
        iterations=state.iterations,
    )


class _Simplex:
    def __init__(self, M, r, basis, tol, refactor_every):
        self.M = M
        self.r = r
        self.basis = np.array(basis)
        self.tol = tol
        self.refactor_every = refactor_every
        self.iterations = 0
        self.refactor()

    def refactor(self):
        self.Binv = np.linalg.inv(self.M[:, self.basis])
        self.xB = self.Binv @ self.r
        self.xB[np.abs(self.xB) < 1e-13] = 0.0
        self.since_refactor = 0

    def pivot(self, p, q, col):
        piv = col[p]
        row_p = self.Binv[p] / piv
        self.Binv -= np.outer(col, row_p)
        self.Binv[p] = row_p
        step = self.xB[p] / piv
        self.xB -= step * col
        self.xB[p] = step
        self.basis[p] = q
        self.iterations += 1
        self.since_refactor += 1
        if self.since_refactor >= self.refactor_every:
            self.refactor()

    def run(self, cost, allowed, max_iter):
        M = self.M
        tol = self.tol
        opt_tol = tol * max(1.0, float(np.abs(cost).max(initial=0.0)))
        bland = False
        while True:
            if self.iterations >= max_iter:
                return ITERATION_LIMIT
            y = cost[self.basis] @ self.Binv
            d = cost - y @ M
            mask = allowed.copy()
            mask[self.basis] = False
            cand = np.flatnonzero(mask & (d < -opt_tol))
            if cand.size == 0:
                return OPTIMAL
            q = int(cand[0]) if bland else int(cand[np.argmin(d[cand])])
            col = self.Binv @ M[:, q]
            pos = np.flatnonzero(col > 1e-9)
            if pos.size == 0:
                return UNBOUNDED
            xB = np.maximum(self.xB[pos], 0.0)
            ratios = xB / col[pos]
            best = ratios.min()
            ties = pos[ratios <= best + 1e-12 * max(1.0, best)]
            if bland:
                p = int(ties[np.argmin(self.basis[ties])])
            else:
                p = int(ties[np.argmax(col[ties])])
            bland = best <= 1e-12
            self.xB[pos] = np.maximum(self.xB[pos], 0.0)
            self.pivot(p, q, col)

    def drive_out_artificials(self, n_real):
        for p in range(self.basis.size):
            if self.basis[p] < n_real:
                continue
            row = self.Binv[p] @ self.M[:, :n_real]
            row[self.basis[self.basis < n_real]] = 0.0
            j = int(np.argmax(np.abs(row)))
            if abs(row[j]) > 1e-7:
                col = self.Binv @ self.M[:, j]
                self.pivot(p, j, col)
        self.refactor()
