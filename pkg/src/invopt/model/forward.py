"""Forward models: the parametric problems assumed to generate decisions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch
from .objectives import Linear, ObjectiveSpec

_SENSE_ALIASES = {">=": ">=", "G": ">=", "<=": "<=", "L": "<=", "=": "=", "==": "=", "E": "="}


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def _canonical_rows(A, b, senses):
    rows, rhs = [], []
    for a, r, s in zip(A, b, senses):
        if s == ">=":
            rows.append(a)
            rhs.append(r)
        elif s == "<=":
            rows.append(-a)
            rhs.append(-r)
        else:
            rows.extend([a, -a])
            rhs.extend([r, -r])
    n = A.shape[1]
    return np.array(rows, dtype=float).reshape(-1, n), np.array(rhs, dtype=float)


@dataclass(frozen=True)
class LinearForwardModel:
    """``min c'x`` (or max) subject to ``A x (senses) b`` and integrality flags.

    Variable bounds are ordinary rows, so every constraint has a dual.

    Parameters
    ----------
    c : (n,) array
        Cost vector.  For inverse problems this is the nominal or prior cost.
    A : (m, n) array
    b : (m,) array
    senses : sequence of str, optional
        ``'>='`` (default), ``'<='`` or ``'='`` per row.
    integer : (n,) bool array, optional
    sense : {'min', 'max'}
    """

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    senses: tuple = None
    integer: np.ndarray = None
    sense: str = "min"

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        c = np.asarray(self.c, dtype=float).ravel()
        b = np.asarray(self.b, dtype=float).ravel()
        if A.size == 0:
            A = A.reshape(0, c.size)
        if A.shape[1] != c.size:
            raise DimensionMismatch(f"A has {A.shape[1]} columns but c has {c.size} entries")
        if b.size != A.shape[0]:
            raise DimensionMismatch(f"A has {A.shape[0]} rows but b has {b.size} entries")
        senses = self.senses
        if senses is None:
            senses = (">=",) * A.shape[0]
        elif isinstance(senses, str):
            senses = (senses,) * A.shape[0]
        try:
            senses = tuple(_SENSE_ALIASES[s] for s in senses)
        except KeyError as exc:
            raise ValueError(f"unknown constraint sense {exc.args[0]!r}") from None
        if len(senses) != A.shape[0]:
            raise DimensionMismatch("one sense per constraint row is required")
        integer = np.zeros(c.size, dtype=bool) if self.integer is None else np.asarray(self.integer, dtype=bool).ravel()
        if integer.size != c.size:
            raise DimensionMismatch("integrality flags must match the number of variables")
        if self.sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "b", _frozen(b))
        object.__setattr__(self, "c", _frozen(c))
        object.__setattr__(self, "senses", senses)
        object.__setattr__(self, "integer", _frozen(integer, bool))

    @property
    def n(self):
        return self.c.size

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def is_integer(self):
        return bool(self.integer.any())

    @property
    def is_canonical(self):
        return self.sense == "min" and all(s == ">=" for s in self.senses)

    def with_cost(self, c):
        return LinearForwardModel(c, self.A, self.b, self.senses, self.integer, self.sense)

    def objective(self, x, theta=None):
        cost = self.c if theta is None else np.asarray(theta, dtype=float)
        return float(cost @ np.asarray(x, dtype=float))

    def feasible(self, x, tol=1e-7):
        x = np.asarray(x, dtype=float)
        if x.size != self.n:
            raise DimensionMismatch(f"decision has {x.size} entries, model has {self.n} variables")
        A, b = _canonical_rows(self.A, self.b, self.senses)
        ok = np.all(A @ x - b >= -tol * (1 + np.abs(b)))
        if self.is_integer:
            ok &= np.all(np.abs(x[self.integer] - np.round(x[self.integer])) <= 1e-6)
        return bool(ok)


def canonicalize(model):
    """Return the equivalent ``min`` model whose rows are all ``>=``.

    ``max c'x`` becomes ``min (-c)'x``, ``<=`` rows are negated and
    equalities are split into two opposite rows.  Canonical input is returned
    unchanged.
    """
    if isinstance(model, ConvexForwardModel):
        if all(s == ">=" for s in model.senses):
            return model
        A, b = _canonical_rows(model.A, model.b, model.senses)
        return ConvexForwardModel(model.objective, A, b)
    if model.is_canonical:
        return model
    A, b = _canonical_rows(model.A, model.b, model.senses)
    c = -model.c if model.sense == "max" else model.c
    return LinearForwardModel(c, A, b, None, model.integer, "min")


@dataclass(frozen=True)
class ConvexForwardModel:
    """``min f(x, theta)`` over the polyhedron ``A x (senses) b``."""

    objective: ObjectiveSpec
    A: np.ndarray
    b: np.ndarray
    senses: tuple = field(default=None)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).ravel()
        n = self.objective.n
        if A.size == 0:
            A = A.reshape(0, n)
        if A.shape[1] != n:
            raise DimensionMismatch(f"A has {A.shape[1]} columns but the objective has {n} variables")
        if b.size != A.shape[0]:
            raise DimensionMismatch(f"A has {A.shape[0]} rows but b has {b.size} entries")
        senses = self.senses
        if senses is None:
            senses = (">=",) * A.shape[0]
        elif isinstance(senses, str):
            senses = (senses,) * A.shape[0]
        senses = tuple(_SENSE_ALIASES[s] for s in senses)
        if len(senses) != A.shape[0]:
            raise DimensionMismatch("one sense per constraint row is required")
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "b", _frozen(b))
        object.__setattr__(self, "senses", senses)

    @property
    def n(self):
        return self.objective.n

    @property
    def m(self):
        return self.A.shape[0]

    def feasible(self, x, tol=1e-7):
        A, b = _canonical_rows(self.A, self.b, self.senses)
        return bool(np.all(A @ np.asarray(x, dtype=float) - b >= -tol * (1 + np.abs(b))))


def as_convex(model):
    """View a linear forward model as a convex one with a linear objective."""
    if isinstance(model, ConvexForwardModel):
        return model
    model = canonicalize(model)
    return ConvexForwardModel(Linear(model.c), model.A, model.b)
