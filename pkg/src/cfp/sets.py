"""Closed convex sets K with membership, exact projection and level oracles.

Every set kind is duck-typed with ``dim``, ``contains(x, tol)``,
``project(x)`` and ``oracle(x) -> (g(x), grad g(x))``; kinds that lack a
projector or an oracle raise :class:`NoExactProjector` / :class:`NoOracle`.
The flat sets of :mod:`cfp.geometry` follow the same protocol.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from . import kernels
from .errors import DimensionMismatch, InvalidSet, NewtonStall, NoExactProjector, NoOracle, ZeroGradient
from .geometry import AffineSubspace, HalfSpace, as_vector, check_same_dim

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 200

Oracle = Callable[[np.ndarray], "tuple[float, np.ndarray]"]


def _check_dim(s, x):
    if x.shape[0] != s.dim:
        raise DimensionMismatch(f"point of dimension {x.shape[0]} for a set in R^{s.dim}")


class EllipsoidStack:
    """Stacked data of m ellipsoids in R^n, the layout the block kernels take."""

    def __init__(self, A, b, alpha):
        self.A = np.ascontiguousarray(A, dtype=np.float64)
        self.b = np.ascontiguousarray(b, dtype=np.float64)
        self.alpha = np.ascontiguousarray(alpha, dtype=np.float64)
        self.m, self.n = self.b.shape
        self._G = np.empty(self.m)

    @classmethod
    def of(cls, ellipsoids):
        ellipsoids = list(ellipsoids)
        if not ellipsoids:
            raise InvalidSet("need at least one ellipsoid")
        n = ellipsoids[0].dim
        if any(e.dim != n for e in ellipsoids):
            raise DimensionMismatch("ellipsoids of different dimensions in one stack")
        return cls([e.A for e in ellipsoids], [e.b for e in ellipsoids], [e.alpha for e in ellipsoids])

    def exact_displacement(self, X):
        D = np.empty_like(X)
        bad = kernels.project_blocks(self.A, self.b, self.alpha, X, D, NEWTON_TOL, NEWTON_MAX_ITER)
        if bad >= 0:
            raise NewtonStall(f"ellipsoid {bad}: multiplier solve exceeded {NEWTON_MAX_ITER} iterations")
        return D

    def cut_displacement(self, X):
        D = np.empty_like(X)
        bad = kernels.cut_blocks(self.A, self.b, self.alpha, X, D, self._G)
        if bad >= 0:
            raise ZeroGradient(f"block {bad} lies outside its ellipsoid with zero gradient")
        return D


@dataclass(frozen=True, eq=False)
class Ellipsoid:
    """``{x : x^T A x + 2 x^T b - alpha <= 0}`` with A symmetric positive definite."""

    A: np.ndarray = field(repr=False)
    b: np.ndarray
    alpha: float

    def __post_init__(self):
        A = np.ascontiguousarray(self.A, dtype=np.float64)
        b = np.ascontiguousarray(as_vector(self.b, "b"))
        n = b.shape[0]
        if A.shape != (n, n):
            raise DimensionMismatch(f"A has shape {A.shape}, expected {(n, n)}")
        scale = np.abs(A).max()
        if np.abs(A - A.T).max() > 1e-12 * scale:
            raise InvalidSet("A is not symmetric")
        try:
            np.linalg.cholesky(A)
        except np.linalg.LinAlgError:
            raise InvalidSet("A is not positive definite") from None
        if not self.alpha > 0:
            raise InvalidSet(f"alpha must be positive, got {self.alpha}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "alpha", float(self.alpha))

    @cached_property
    def _stack(self):
        return EllipsoidStack(self.A[None], self.b[None], [self.alpha])

    @property
    def dim(self):
        return self.b.shape[0]

    def value(self, x):
        return float(x @ (self.A @ x) + 2.0 * (x @ self.b) - self.alpha)

    def contains(self, x, tol=0.0):
        return self.value(x) <= tol

    def oracle(self, x):
        x = as_vector(x)
        _check_dim(self, x)
        r = self.A @ x + self.b
        return float(x @ (r + self.b) - self.alpha), 2.0 * r

    def project(self, x):
        x = as_vector(x)
        _check_dim(self, x)
        X = np.ascontiguousarray(x[None])
        return x + self._stack.exact_displacement(X)[0]


@dataclass(frozen=True, eq=False)
class Ball:
    """Closed Euclidean ball, with level function ``|x - c|^2 - r^2``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center, "center"))
        if not self.radius > 0:
            raise InvalidSet(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.shape[0]

    def contains(self, x, tol=0.0):
        d = x - self.center
        return float(d @ d) - self.radius**2 <= tol

    def oracle(self, x):
        d = as_vector(x) - self.center
        return float(d @ d) - self.radius**2, 2.0 * d

    def project(self, x):
        x = as_vector(x)
        _check_dim(self, x)
        d = x - self.center
        dist = np.linalg.norm(d)
        if dist <= self.radius:
            return x.copy()
        return self.center + (self.radius / dist) * d


@dataclass(frozen=True, eq=False)
class SublevelSet:
    """``{x : g(x) <= 0}`` for a smooth convex `g` returning ``(value, gradient)``.

    When `slater_point` is given it must satisfy ``g < 0``.
    """

    g: Oracle
    dim: int
    slater_point: np.ndarray | None = None

    def __post_init__(self):
        if self.slater_point is not None:
            p = as_vector(self.slater_point, "slater_point")
            if p.shape[0] != self.dim:
                raise DimensionMismatch("slater_point dimension does not match the set")
            if not self.g(p)[0] < 0:
                raise InvalidSet("slater_point does not satisfy g < 0")
            object.__setattr__(self, "slater_point", p)

    def contains(self, x, tol=0.0):
        return self.g(x)[0] <= tol

    def oracle(self, x):
        value, grad = self.g(as_vector(x))
        return float(value), np.asarray(grad, dtype=np.float64)

    def project(self, x):
        raise NoExactProjector("general sublevel sets have no exact projector; use a separator")


@dataclass(frozen=True, eq=False)
class Epigraph:
    """``{(x, s) in R^(n+1) : f(x) <= s}`` for a smooth convex f on R^n.

    Its level function is ``g(x, s) = f(x) - s`` with gradient ``(grad f(x), -1)``.
    """

    f: Oracle
    n: int

    @property
    def dim(self):
        return self.n + 1

    def contains(self, z, tol=0.0):
        return self.f(z[:-1])[0] - z[-1] <= tol

    def oracle(self, z):
        z = as_vector(z)
        _check_dim(self, z)
        value, grad = self.f(z[:-1])
        return float(value) - float(z[-1]), np.append(np.asarray(grad, dtype=np.float64), -1.0)

    def project(self, z):
        raise NoExactProjector("epigraphs have no exact projector here; use a separator")


class ProductSet:
    """Cartesian product ``K_1 x ... x K_m`` of sets in a common R^n.

    Points are flat vectors of length n*m, block i occupying ``[i*n, (i+1)*n)``.
    Products of ellipsoids route projections through the block kernels.
    """

    def __init__(self, sets):
        self.sets = tuple(sets)
        if not self.sets:
            raise InvalidSet("empty product")
        self.n = self.sets[0].dim
        if any(s.dim != self.n for s in self.sets):
            raise DimensionMismatch("product factors must share one dimension")
        self.m = len(self.sets)
        self.stack = EllipsoidStack.of(self.sets) if all(isinstance(s, Ellipsoid) for s in self.sets) else None

    @property
    def dim(self):
        return self.n * self.m

    def blocks(self, x):
        return np.asarray(x, dtype=np.float64).reshape(self.m, self.n)

    def contains(self, x, tol=0.0):
        return all(s.contains(xi, tol) for s, xi in zip(self.sets, self.blocks(x)))

    def exact_displacement(self, x):
        X = np.ascontiguousarray(self.blocks(x))
        if self.stack is not None:
            return self.stack.exact_displacement(X).ravel()
        return np.concatenate([s.project(xi) - xi for s, xi in zip(self.sets, X)])

    def project(self, x):
        x = as_vector(x)
        _check_dim(self, x)
        return x + self.exact_displacement(x)

    def oracle(self, x):
        raise NoOracle("products expose per-block oracles only; use a product separator")


def project_exact(s, x):
    """Exact Euclidean projection of `x` onto the set `s`."""
    return s.project(x)


def contains(s, x, tol=0.0):
    """Membership test with additive tolerance `tol` on the defining inequality."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    x = as_vector(x)
    _check_dim(s, x)
    return bool(s.contains(x, tol))


def eval_oracle(s, x):
    """Return ``(g(x), grad g(x))`` for sets defined by a level function."""
    return s.oracle(x)


__all__ = [
    "AffineSubspace",
    "Ball",
    "Ellipsoid",
    "EllipsoidStack",
    "Epigraph",
    "HalfSpace",
    "ProductSet",
    "SublevelSet",
    "check_same_dim",
    "contains",
    "eval_oracle",
    "project_exact",
]
