"""Admissible parameter sets and the inverse objective ``h(theta)``."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, TooLarge

MAX_ORTHANTS = 4096


@dataclass(frozen=True)
class L1Sphere:
    """``sum |theta_i| = 1`` over the normalized components."""


@dataclass(frozen=True)
class LInfSphere:
    """``max |theta_i| = 1`` over the normalized components."""


@dataclass(frozen=True)
class FixedComponent:
    index: int
    value: float = 1.0


@dataclass(frozen=True)
class NormToPrior:
    """``h(theta) = ||theta - prior||_p`` with ``p`` in {1, inf}."""

    p: float = 1

    def __post_init__(self):
        if self.p not in (1, np.inf):
            raise ValueError("only p = 1 and p = inf keep the inverse problem linear")


@dataclass(frozen=True)
class LinearCost:
    w: np.ndarray


@dataclass(frozen=True)
class Zero:
    """Pure feasibility: every admissible parameter is equally good."""


@dataclass(frozen=True)
class Polyhedron:
    """``G t >= h, E t = f, lb <= t <= ub``."""

    G: np.ndarray
    h: np.ndarray
    E: np.ndarray
    f: np.ndarray
    lb: np.ndarray
    ub: np.ndarray

    @property
    def dim(self):
        return self.lb.size

    def contains(self, theta, tol=1e-8):
        return not _violations(self, theta, tol)

    def add_to(self, builder, name="theta"):
        """Create a variable block constrained to this polyhedron."""
        block = builder.var(name, self.dim, lb=self.lb, ub=self.ub)
        if self.G.shape[0]:
            builder.rows([(block, self.G)], ">=", self.h)
        if self.E.shape[0]:
            builder.rows([(block, self.E)], "=", self.f)
        return block

    def linprog_args(self):
        """``(A, b, senses, lb, ub)`` for the solvers."""
        A = np.vstack([self.G, self.E])
        b = np.concatenate([self.h, self.f])
        senses = [">="] * self.G.shape[0] + ["="] * self.E.shape[0]
        return A, b, senses, self.lb, self.ub


def _violations(poly, theta, tol):
    theta = np.asarray(theta, dtype=float).ravel()
    out = []
    if theta.size != poly.dim:
        return [f"dimension {theta.size} != {poly.dim}"]
    if not np.all(np.isfinite(theta)):
        return ["non-finite entries"]
    for i in np.flatnonzero(theta < poly.lb - tol):
        out.append(f"theta[{i}] = {theta[i]:.6g} below lower bound {poly.lb[i]:.6g}")
    for i in np.flatnonzero(theta > poly.ub + tol):
        out.append(f"theta[{i}] = {theta[i]:.6g} above upper bound {poly.ub[i]:.6g}")
    if poly.G.shape[0]:
        r = poly.G @ theta - poly.h
        for i in np.flatnonzero(r < -tol):
            out.append(f"inequality row {i} violated by {-r[i]:.6g}")
    if poly.E.shape[0]:
        r = poly.E @ theta - poly.f
        for i in np.flatnonzero(np.abs(r) > tol):
            out.append(f"equality row {i} off by {r[i]:.6g}")
    return out


def _mat(a, cols):
    a = np.asarray(a if a is not None else np.zeros((0, cols)), dtype=float)
    if a.size == 0:
        a = a.reshape(0, cols)
    a = np.atleast_2d(a)
    if a.shape[1] != cols:
        raise DimensionMismatch(f"constraint matrix has {a.shape[1]} columns, expected {cols}")
    return a


@dataclass(frozen=True)
class ParameterSpace:
    """The admissible parameter set together with the inverse objective.

    Parameters
    ----------
    dim : int
    G, h : optional
        Inequalities ``G theta >= h``.
    E, f : optional
        Equalities ``E theta = f``.
    lb, ub : optional
        Box bounds (``-inf``/``inf`` by default).
    normalization : None, L1Sphere, LInfSphere or FixedComponent
    norm_dims : sequence of int, optional
        Components the normalization acts on; all by default.
    prior : (dim,) array, optional
    objective_mode : NormToPrior, LinearCost or Zero, optional
        Defaults to ``NormToPrior(1)`` when a prior is given, ``Zero``
        otherwise.
    """

    dim: int
    G: np.ndarray = None
    h: np.ndarray = None
    E: np.ndarray = None
    f: np.ndarray = None
    lb: np.ndarray = None
    ub: np.ndarray = None
    normalization: object = None
    norm_dims: tuple = None
    prior: np.ndarray = None
    objective_mode: object = field(default=None)

    def __post_init__(self):
        d = int(self.dim)
        object.__setattr__(self, "dim", d)
        G = _mat(self.G, d)
        E = _mat(self.E, d)
        h = np.zeros(G.shape[0]) if self.h is None else np.asarray(self.h, dtype=float).ravel()
        f = np.zeros(E.shape[0]) if self.f is None else np.asarray(self.f, dtype=float).ravel()
        if h.size != G.shape[0] or f.size != E.shape[0]:
            raise DimensionMismatch("right-hand sides must match constraint rows")
        lb = np.full(d, -np.inf) if self.lb is None else np.broadcast_to(np.asarray(self.lb, dtype=float), (d,)).copy()
        ub = np.full(d, np.inf) if self.ub is None else np.broadcast_to(np.asarray(self.ub, dtype=float), (d,)).copy()
        for name, val in (("G", G), ("h", h), ("E", E), ("f", f), ("lb", lb), ("ub", ub)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        dims = tuple(range(d)) if self.norm_dims is None else tuple(int(i) for i in self.norm_dims)
        object.__setattr__(self, "norm_dims", dims)
        if self.prior is not None:
            prior = np.asarray(self.prior, dtype=float).ravel()
            if prior.size != d:
                raise DimensionMismatch(f"prior has {prior.size} entries, expected {d}")
            prior.setflags(write=False)
            object.__setattr__(self, "prior", prior)
        mode = self.objective_mode
        if mode is None:
            mode = NormToPrior(1) if self.prior is not None else Zero()
        if isinstance(mode, NormToPrior) and self.prior is None:
            raise ValueError("a norm-to-prior objective needs a prior")
        if isinstance(mode, LinearCost):
            w = np.asarray(mode.w, dtype=float).ravel()
            if w.size != d:
                raise DimensionMismatch("linear cost must have one weight per component")
            mode = LinearCost(w)
        object.__setattr__(self, "objective_mode", mode)
        if isinstance(self.normalization, FixedComponent) and not 0 <= self.normalization.index < d:
            raise DimensionMismatch("fixed component index out of range")

    # -- convenience constructors -------------------------------------------------
    @classmethod
    def simplex(cls, dim, **kw):
        """``theta >= 0, sum theta = 1``."""
        return cls(dim, lb=np.zeros(dim), normalization=L1Sphere(), **kw)

    def replace(self, **kw):
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(kw)
        if "prior" in kw and "objective_mode" not in kw and isinstance(self.objective_mode, Zero):
            fields["objective_mode"] = None
        return ParameterSpace(**fields)

    # -- structure ----------------------------------------------------------------
    @property
    def base(self):
        return Polyhedron(self.G, self.h, self.E, self.f, self.lb, self.ub)

    def _signs(self, i):
        if self.lb[i] >= 0:
            return (1.0,)
        if self.ub[i] <= 0:
            return (-1.0,)
        return (1.0, -1.0)

    def pieces(self):
        """Convex pieces whose union is the admissible set.

        L1 normalization yields one piece per admissible sign orthant (a
        single hyperplane when the components are sign-constrained); L-inf
        yields one piece per facet ``theta_i = +-1``.
        """
        d = self.dim
        norm = self.normalization
        if norm is None:
            return [self.base]
        dims = list(self.norm_dims)
        out = []
        if isinstance(norm, FixedComponent):
            row = np.zeros((1, d))
            row[0, norm.index] = 1.0
            out.append(self._extend(E=row, f=[norm.value]))
        elif isinstance(norm, L1Sphere):
            choices = [self._signs(i) for i in dims]
            count = int(np.prod([len(c) for c in choices]))
            if count > MAX_ORTHANTS:
                raise TooLarge(
                    f"L1 normalization over {len(dims)} sign-free components needs {count} orthants; "
                    "add sign constraints"
                )
            for signs in itertools.product(*choices):
                E = np.zeros((1, d))
                lb = self.lb.copy()
                ub = self.ub.copy()
                for i, s in zip(dims, signs):
                    E[0, i] = s
                    if s > 0:
                        lb[i] = max(lb[i], 0.0)
                    else:
                        ub[i] = min(ub[i], 0.0)
                out.append(self._extend(E=E, f=[1.0], lb=lb, ub=ub))
        elif isinstance(norm, LInfSphere):
            for i in dims:
                for s in self._signs(i):
                    lb = self.lb.copy()
                    ub = self.ub.copy()
                    lb[dims] = np.maximum(lb[dims], -1.0)
                    ub[dims] = np.minimum(ub[dims], 1.0)
                    if lb[i] > s + 1e-12 or ub[i] < s - 1e-12:
                        continue
                    lb[i] = ub[i] = s
                    out.append(self._extend(lb=lb, ub=ub))
        else:
            raise TypeError(f"unknown normalization {norm!r}")
        return out

    def _extend(self, G=None, h=None, E=None, f=None, lb=None, ub=None):
        G2 = self.G if G is None else np.vstack([self.G, G])
        h2 = self.h if h is None else np.concatenate([self.h, h])
        E2 = self.E if E is None else np.vstack([self.E, E])
        f2 = self.f if f is None else np.concatenate([self.f, f])
        return Polyhedron(G2, h2, E2, f2, self.lb if lb is None else lb, self.ub if ub is None else ub)

    @property
    def excludes_zero(self):
        norm = self.normalization
        if isinstance(norm, (L1Sphere, LInfSphere)):
            return True
        if isinstance(norm, FixedComponent):
            return norm.value != 0
        return not self.base.contains(np.zeros(self.dim))

    # -- membership and objective ---------------------------------------------------
    def violations(self, theta, tol=1e-8):
        theta = np.asarray(theta, dtype=float).ravel()
        out = _violations(self.base, theta, tol)
        if out:
            return out
        norm = self.normalization
        sub = theta[list(self.norm_dims)]
        if isinstance(norm, L1Sphere) and abs(np.abs(sub).sum() - 1) > tol:
            out.append(f"L1 norm {np.abs(sub).sum():.6g} != 1")
        elif isinstance(norm, LInfSphere) and abs(np.abs(sub).max(initial=0.0) - 1) > tol:
            out.append(f"L-inf norm {np.abs(sub).max(initial=0.0):.6g} != 1")
        elif isinstance(norm, FixedComponent) and abs(theta[norm.index] - norm.value) > tol:
            out.append(f"theta[{norm.index}] = {theta[norm.index]:.6g} != {norm.value:.6g}")
        return out

    def contains(self, theta, tol=1e-8):
        return not self.violations(theta, tol)

    def h_value(self, theta):
        theta = np.asarray(theta, dtype=float).ravel()
        mode = self.objective_mode
        if isinstance(mode, NormToPrior):
            return float(np.linalg.norm(theta - self.prior, ord=mode.p))
        if isinstance(mode, LinearCost):
            return float(mode.w @ theta)
        return 0.0

    def add_h(self, builder, theta_block, weight=1.0):
        """Add ``weight * h(theta)`` to a builder's objective."""
        mode = self.objective_mode
        d = self.dim
        if isinstance(mode, NormToPrior):
            eye = np.eye(d)
            if mode.p == 1:
                t = builder.var("h_abs", d, lb=0.0)
                builder.rows([(t, eye), (theta_block, -eye)], ">=", -self.prior)
                builder.rows([(t, eye), (theta_block, eye)], ">=", self.prior)
                builder.minimize(t, weight * np.ones(d))
            else:
                s = builder.var("h_max", 1, lb=0.0)
                ones = np.ones((d, 1))
                builder.rows([(s, ones), (theta_block, -eye)], ">=", -self.prior)
                builder.rows([(s, ones), (theta_block, eye)], ">=", self.prior)
                builder.minimize(s, [weight])
        elif isinstance(mode, LinearCost):
            builder.minimize(theta_block, weight * mode.w)


def validate_parameter(theta, space, tol=1e-8):
    """List the constraints of ``space`` that ``theta`` violates (empty if admissible)."""
    return space.violations(theta, tol)
