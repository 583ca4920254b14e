"""Problems with known ``K n U``: the epigraph families and two-set fixtures in the plane.

Family one takes ``K`` the epigraph of a convex f with ``f(0) = 0`` and
``grad f(0) = 0``; family two uses ``f(x) = phi(|x|)`` with ``phi(0) < 0``.
In both, U is the hyperplane ``{(x, 0)}`` of R^(n+1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .analysis import Family
from .errors import HypothesisViolation
from .geometry import AffineSubspace, HalfSpace, as_vector
from .separators import SubgradientSeparator
from .sets import Ball, Epigraph
from .solvers import Problem

HYPOTHESIS_TOL = 1e-12


@dataclass(frozen=True)
class PointIntersection:
    point: np.ndarray

    def distance(self, x):
        return float(np.linalg.norm(as_vector(x) - self.point))

    def project(self, x):
        return self.point.copy()


@dataclass(frozen=True)
class SegmentIntersection:
    """``{start + s * direction : 0 <= s <= length}`` with a unit `direction`; length may be inf."""

    start: np.ndarray
    direction: np.ndarray
    length: float = math.inf

    def project(self, x):
        s = float(np.clip((as_vector(x) - self.start) @ self.direction, 0.0, self.length))
        return self.start + s * self.direction

    def distance(self, x):
        return float(np.linalg.norm(as_vector(x) - self.project(x)))


@dataclass(frozen=True)
class DiskIntersection:
    """``{(x, 0) : |x| <= radius}`` inside R^(n+1)."""

    radius: float

    def project(self, z):
        z = as_vector(z)
        x = z[:-1]
        t = np.linalg.norm(x)
        out = np.zeros_like(z)
        out[:-1] = x if t <= self.radius else (self.radius / t) * x
        return out

    def distance(self, z):
        return float(np.linalg.norm(as_vector(z) - self.project(z)))


@dataclass
class Fixture:
    name: str
    problem: Problem
    x0: np.ndarray
    omega: float | None = None


def horizontal(n):
    """U = ``{(x, 0)}`` in R^(n+1)."""
    return AffineSubspace(np.zeros(n + 1), np.eye(n + 1)[:n])


def quadratic(x):
    return float(x @ x), 2.0 * x


def quartic(x):
    s = float(x @ x)
    return s * s, 4.0 * s * x


def make_anisotropic(weights):
    w = np.asarray(weights, dtype=np.float64)

    def f(x):
        return float(x @ (w * x)), 2.0 * w * x

    return f


def phi_quadratic(t):
    return t * t - 1.0, 2.0 * t


def phi_quartic(t):
    return t**4 - 1.0, 4.0 * t**3


FAMILY1_SHAPES = {"quadratic": quadratic, "quartic": quartic}
FAMILY2_SHAPES = {"quadratic": phi_quadratic, "quartic": phi_quartic}


def radial(phi):
    """``f(x) = phi(|x|)`` with its gradient (zero at the origin)."""

    def f(x):
        t = float(np.linalg.norm(x))
        value, slope = phi(t)
        if t == 0.0:
            return float(value), np.zeros_like(x)
        return float(value), (slope / t) * x

    return f


def phi_root(phi):
    """Smallest positive zero of phi, bracketed by doubling."""
    hi = 1.0
    while phi(hi)[0] <= 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise HypothesisViolation("phi never becomes positive")
    return brentq(lambda t: phi(t)[0], 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def make_family(family, shape, n):
    """Epigraph problem of the given family in R^(n+1).

    `shape` is a name from the shape tables or a callable: ``f(x) -> (f, grad)``
    for family one, ``phi(t) -> (phi, phi')`` for family two. Hypotheses are
    checked at the origin.
    """
    family = Family(family)
    if n < 1:
        raise ValueError("n must be positive")
    table = FAMILY1_SHAPES if family is Family.ONE else FAMILY2_SHAPES
    if isinstance(shape, str):
        if shape not in table:
            raise KeyError(f"unknown shape {shape!r}; choose from {sorted(table)}")
        shape = table[shape]
    origin = np.zeros(n + 1)
    if family is Family.ONE:
        value, grad = shape(np.zeros(n))
        if abs(value) > HYPOTHESIS_TOL:
            raise HypothesisViolation(f"f(0) = 0 fails: f(0) = {value:.3e}")
        if np.linalg.norm(grad) > HYPOTHESIS_TOL:
            raise HypothesisViolation("grad f(0) = 0 fails")
        f = shape
        inter = PointIntersection(origin)
    else:
        value, slope = shape(0.0)
        if not value < 0.0:
            raise HypothesisViolation(f"phi(0) < 0 fails: phi(0) = {value:.3e}")
        if abs(slope) > HYPOTHESIS_TOL:
            raise HypothesisViolation(f"phi'(0) = 0 fails: phi'(0) = {slope:.3e}")
        f = radial(shape)
        inter = DiskIntersection(phi_root(shape))
    K = Epigraph(f, n)
    return Problem(K, horizontal(n), SubgradientSeparator(K), intersection=inter, feasible_point=origin)


def family_start(n, scale=1.0):
    """Default start ``(scale * e / sqrt(n), 0)``, a point at distance `scale` from the origin in U."""
    z = np.zeros(n + 1)
    z[:n] = scale / math.sqrt(n)
    return z


def _x_axis():
    return AffineSubspace(np.zeros(2), np.array([[1.0, 0.0]]))


def two_line(theta, variant="disk", radius=1.0, start=0.5):
    """U the x-axis and K a set whose boundary crosses it at the origin at angle `theta`.

    ``variant`` is ``"line"`` (K the line itself), ``"halfplane"`` or
    ``"disk"`` (a ball of `radius` tangent to that line at the origin). The
    start is ``(-start, 0)``; the error-bound constant there is ``sin(theta)``.
    """
    if not 0.0 < theta <= math.pi / 2:
        raise ValueError("theta must lie in (0, pi/2]")
    direction = np.array([math.cos(theta), math.sin(theta)])
    normal = np.array([-math.sin(theta), math.cos(theta)])
    x_axis = np.array([1.0, 0.0])
    origin = np.zeros(2)
    if variant == "line":
        K = AffineSubspace(origin, direction[None])
        return Fixture(
            f"line-{math.degrees(theta):g}",
            Problem(K, _x_axis(), intersection=PointIntersection(origin), feasible_point=origin),
            np.array([-start, 0.0]),
            math.sin(theta),
        )
    if variant == "halfplane":
        K = HalfSpace(normal, 0.0)
        inter = SegmentIntersection(origin, x_axis)
    elif variant == "disk":
        K = Ball(-radius * normal, radius)
        inter = SegmentIntersection(origin, x_axis, 2.0 * radius * math.sin(theta))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    problem = Problem(K, _x_axis(), SubgradientSeparator(K), intersection=inter, feasible_point=origin)
    return Fixture(f"{variant}-{math.degrees(theta):g}", problem, np.array([-start, 0.0]), math.sin(theta))


def random_halfspace_line(rng, n):
    """A half-space and a line in R^n that cross, with a start on the line outside K.

    The line direction is kept away from the hyperplane so the crossing is
    well conditioned.
    """
    while True:
        a = rng.standard_normal(n)
        e = rng.standard_normal(n)
        a /= np.linalg.norm(a)
        e /= np.linalg.norm(e)
        if abs(a @ e) > 0.1:
            break
    offset = float(rng.standard_normal())
    anchor = rng.standard_normal(n)
    K = HalfSpace(a, offset)
    U = AffineSubspace.from_spanning(anchor, e[None])
    # crossing point on the line: a.(anchor + s e) = offset
    s_cross = (offset - a @ anchor) / (a @ e)
    cross = anchor + s_cross * e
    step = 1.0 + 4.0 * rng.random()
    x0 = cross + np.sign(a @ e) * step * e
    inward = -np.sign(a @ e) * e
    problem = Problem(K, U, SubgradientSeparator(K), intersection=SegmentIntersection(cross, inward), feasible_point=cross)
    return Fixture(f"halfspace-line-{n}", problem, x0)
