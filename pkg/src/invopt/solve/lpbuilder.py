"""Small block-structured model builder used by every estimator."""

import numpy as np

from .simplex import OPTIMAL, LPResult, linprog
from .milp import branch_and_bound


class Block:
    """A contiguous group of variables inside an :class:`LPBuilder`."""

    def __init__(self, name, start, size, shape):
        self.name = name
        self.start = start
        self.size = size
        self.shape = shape

    @property
    def slice(self):
        return slice(self.start, self.start + self.size)

    def __repr__(self):
        return f"Block({self.name!r}, {self.start}:{self.start + self.size})"


class Solution:
    def __init__(self, builder, result):
        self.builder = builder
        self.result = result
        self.status = result.status
        self.x = result.x
        self.objective = result.objective
        self.row_duals = result.row_duals

    @property
    def ok(self):
        return self.result.ok

    def __getitem__(self, block):
        if isinstance(block, str):
            block = self.builder.blocks[block]
        v = self.x[block.slice]
        return v.reshape(block.shape) if block.shape else v


class LPBuilder:
    def __init__(self):
        self.blocks = {}
        self.n = 0
        self._lb = []
        self._ub = []
        self._int = []
        self._rows = []  # (dict start->coef array, sense, rhs)
        self._obj = {}
        self.obj_const = 0.0

    def var(self, name, size, lb=-np.inf, ub=np.inf, integer=False, shape=None):
        size = int(size)
        block = Block(name, self.n, size, shape)
        self.blocks[name] = block
        self.n += size
        self._lb.append(np.broadcast_to(np.asarray(lb, dtype=float), (size,)).copy())
        self._ub.append(np.broadcast_to(np.asarray(ub, dtype=float), (size,)).copy())
        self._int.append(np.full(size, bool(integer)))
        return block

    def row(self, terms, sense, rhs):
        """Add one constraint ``sum coef_k' x[block_k] (sense) rhs``."""
        entry = {}
        for block, coef in terms:
            coef = np.broadcast_to(np.asarray(coef, dtype=float).ravel(), (block.size,))
            entry[block.start] = entry.get(block.start, 0) + coef
        self._rows.append((entry, sense, float(rhs)))

    def rows(self, terms, sense, rhs):
        """Add several rows at once; each coefficient is a (k, block.size) matrix."""
        rhs = np.atleast_1d(np.asarray(rhs, dtype=float))
        mats = [(block, np.asarray(coef, dtype=float).reshape(rhs.size, block.size))
                for block, coef in terms]
        for i in range(rhs.size):
            self.row([(block, mat[i]) for block, mat in mats], sense, rhs[i])

    def minimize(self, block, coef):
        coef = np.broadcast_to(np.asarray(coef, dtype=float).ravel(), (block.size,))
        self._obj[block.start] = self._obj.get(block.start, 0) + coef

    def arrays(self):
        n = self.n
        c = np.zeros(n)
        for start, coef in self._obj.items():
            c[start:start + coef.size] += coef
        A = np.zeros((len(self._rows), n))
        b = np.zeros(len(self._rows))
        senses = []
        for i, (entry, sense, rhs) in enumerate(self._rows):
            for start, coef in entry.items():
                A[i, start:start + coef.size] += coef
            b[i] = rhs
            senses.append(sense)
        lb = np.concatenate(self._lb) if self._lb else np.zeros(0)
        ub = np.concatenate(self._ub) if self._ub else np.zeros(0)
        integ = np.concatenate(self._int) if self._int else np.zeros(0, dtype=bool)
        return c, A, b, senses, lb, ub, integ

    def solve(self, tol=1e-9, node_cap=100_000):
        c, A, b, senses, lb, ub, integ = self.arrays()
        if integ.any():
            res = branch_and_bound(c, A, b, senses, lb, ub, integ, tol=tol, node_cap=node_cap)
        else:
            res = linprog(c, A, b, senses, lb, ub, tol=tol)
        if res.ok:
            res.objective += self.obj_const
        return Solution(self, res)

    def solution(self, x):
        """Wrap a point found by another method so blocks can be read from it."""
        x = np.asarray(x, dtype=float)
        c = self.arrays()[0]
        return Solution(self, LPResult(OPTIMAL, x, float(c @ x) + self.obj_const))
