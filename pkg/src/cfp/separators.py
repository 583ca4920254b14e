"""Separating operators S and the outer-approximate projection P^S(x) = P_{S(x)}(x).

Three kinds are provided:

* :class:`ExactSeparator` -- the trivial operator ``S(x) = K``; with it the
  approximate methods reduce to their exact counterparts.
* :class:`SubgradientSeparator` -- for ``K = {g <= 0}``: ``S(x) = K`` when
  ``x`` is in K, otherwise the cut ``{z : grad g(x)^T (z - x) + g(x) <= 0}``.
* :class:`ProductSeparator` -- blockwise product of the above over
  ``K_1 x ... x K_m``.

Every separator has ``displacement(x)``, returning ``P^S(x) - x``; the
solvers work with displacements only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, ZeroGradient
from .geometry import HalfSpace, as_vector
from .sets import Ellipsoid, EllipsoidStack, ProductSet


@dataclass(frozen=True)
class WholeSet:
    """``S(x) = K``: the query point was a member (or the separator is exact)."""


@dataclass(frozen=True, eq=False)
class CutHalfSpace:
    """``S(x)`` is the half-space `halfspace`, which excludes the query point."""

    halfspace: HalfSpace


WHOLE = WholeSet()


def _cut(value, grad, x):
    grad = np.asarray(grad, dtype=np.float64)
    if not np.any(grad):
        raise ZeroGradient(f"g(x) = {value:.3e} > 0 but the gradient vanishes")
    return HalfSpace(grad, float(grad @ x) - value)


class ExactSeparator:
    """The trivial separating operator ``S(x) = K`` (needs an exact projector)."""

    def __init__(self, K):
        self.K = K
        self.dim = K.dim

    def separate(self, x):
        return WHOLE

    def displacement(self, x):
        exact = getattr(self.K, "exact_displacement", None)
        if exact is not None:
            return exact(x)
        return self.K.project(x) - x


class SubgradientSeparator:
    """Gradient cut of a smooth level-set ``K = {g <= 0}``."""

    def __init__(self, K):
        self.K = K
        self.dim = K.dim

    def separate(self, x):
        value, grad = self.K.oracle(x)
        if value <= 0.0:
            return WHOLE
        return CutHalfSpace(_cut(value, grad, x))

    def displacement(self, x):
        value, grad = self.K.oracle(x)
        if value <= 0.0:
            return np.zeros_like(x)
        gg = float(grad @ grad)
        if gg == 0.0:
            raise ZeroGradient(f"g(x) = {value:.3e} > 0 but the gradient vanishes")
        return (-value / gg) * grad


class ProductSeparator:
    """``S(x) = S_1(x^1) x ... x S_m(x^m)`` on flat vectors of length n*m.

    When every factor is the same kind over an ellipsoid, the whole product
    is evaluated by one call into the block kernels.
    """

    def __init__(self, children):
        self.children = tuple(children)
        if not self.children:
            raise DimensionMismatch("empty product separator")
        self.n = self.children[0].dim
        if any(c.dim != self.n for c in self.children):
            raise DimensionMismatch("product separator blocks must share one dimension")
        self.m = len(self.children)
        self.dim = self.n * self.m
        self._stack = None
        self._kind = None
        for kind in (SubgradientSeparator, ExactSeparator):
            if all(type(c) is kind and isinstance(c.K, Ellipsoid) for c in self.children):
                self._stack = EllipsoidStack.of(c.K for c in self.children)
                self._kind = kind

    def blocks(self, x):
        return np.asarray(x, dtype=np.float64).reshape(self.m, self.n)

    def separate(self, x):
        return [c.separate(xi) for c, xi in zip(self.children, self.blocks(x))]

    def displacement(self, x):
        X = np.ascontiguousarray(self.blocks(x))
        if self._kind is SubgradientSeparator:
            return self._stack.cut_displacement(X).ravel()
        if self._kind is ExactSeparator:
            return self._stack.exact_displacement(X).ravel()
        return np.concatenate([c.displacement(xi) for c, xi in zip(self.children, X)])


def subgradient_product(K: ProductSet):
    """Blockwise subgradient separator for a product of level sets."""
    return ProductSeparator([SubgradientSeparator(s) for s in K.sets])


def separate(s, x):
    """The separating set S(x): :data:`WHOLE`, a :class:`CutHalfSpace`, or a per-block list."""
    x = as_vector(x)
    if x.shape[0] != s.dim:
        raise DimensionMismatch(f"point of dimension {x.shape[0]} for a separator on R^{s.dim}")
    return s.separate(x)


def approx_project(s, x):
    """Return ``(P^S(x), dist(x, S(x)))``."""
    x = as_vector(x)
    if x.shape[0] != s.dim:
        raise DimensionMismatch(f"point of dimension {x.shape[0]} for a separator on R^{s.dim}")
    d = s.displacement(x)
    return x + d, float(np.linalg.norm(d))
