"""Dense vector helpers, circumcenters, and projections onto flat sets.

Points are plain one-dimensional ``float64`` numpy arrays. Half-spaces and
affine subspaces expose the same small duck-typed surface as the sets in
:mod:`cfp.sets` (``dim``, ``contains``, ``project``, and where meaningful
``oracle``), so the solvers treat them uniformly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCircumcenter, DimensionMismatch, InvalidSet, NoOracle

# Gram determinant threshold, relative to |u|^2 |v|^2 (squared sine of the angle).
RANK_TOL = 1e-12
# Two of the three points are considered equal below this fraction of the spread.
COINCIDE_TOL = 1e-10


def as_vector(x, name="x"):
    """Return `x` as a finite 1-D float64 array (no copy when already one)."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatch(f"{name} must be a non-empty 1-D vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def check_same_dim(*vectors):
    n = vectors[0].shape[0]
    for v in vectors[1:]:
        if v.shape[0] != n:
            raise DimensionMismatch(f"dimension {v.shape[0]} does not match {n}")
    return n


def circumcenter_coefficients(u, v):
    """Solve for ``(s, t)`` with ``x + s*u + t*v`` equidistant from x, x+u, x+v.

    Works on the offsets ``u = y - x`` and ``v = z - x`` directly, which is what
    the solvers have on hand; forming y and z first and subtracting again
    loses the small components of the offsets to cancellation.

    Raises
    ------
    DegenerateCircumcenter
        When the three points are collinear and pairwise distinct.
    """
    uu = float(u @ u)
    vv = float(v @ v)
    if uu == 0.0 and vv == 0.0:
        return 0.0, 0.0
    uv = float(u @ v)
    det = uu * vv - uv * uv
    if uu > 0.0 and vv > 0.0 and det > RANK_TOL * uu * vv:
        return 0.5 * vv * (uu - uv) / det, 0.5 * uu * (vv - uv) / det

    # collinear: only solvable when two of the points coincide
    d_xy = np.sqrt(uu)
    d_xz = np.sqrt(vv)
    d_yz = float(np.linalg.norm(u - v))
    tol = COINCIDE_TOL * max(d_xy, d_xz, d_yz)
    if d_yz <= tol:
        return 0.5, 0.0
    if d_xy <= tol:
        return 0.0, 0.5
    if d_xz <= tol:
        return 0.5, 0.0
    raise DegenerateCircumcenter(
        f"collinear distinct points (|y-x|={d_xy:.3e}, |z-x|={d_xz:.3e}, |z-y|={d_yz:.3e})"
    )


def circumcenter(x, y, z):
    """Circumcenter of three points: the point of aff{x, y, z} equidistant to all.

    ``circumcenter(x, y, y)`` is the midpoint of x and y, and
    ``circumcenter(x, x, x)`` is x.
    """
    x, y, z = as_vector(x), as_vector(y, "y"), as_vector(z, "z")
    check_same_dim(x, y, z)
    u = y - x
    v = z - x
    s, t = circumcenter_coefficients(u, v)
    return x + s * u + t * v


def reflect(projected, x):
    """Reflection ``2 p - x`` of `x` through its projection `projected`."""
    p, x = as_vector(projected, "projected"), as_vector(x)
    check_same_dim(p, x)
    return 2.0 * p - x


@dataclass(frozen=True, eq=False)
class HalfSpace:
    """The half-space ``{y : a^T y <= alpha}``."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        a = as_vector(self.normal, "normal")
        if not np.any(a):
            raise InvalidSet("half-space normal must be nonzero")
        object.__setattr__(self, "normal", a)
        object.__setattr__(self, "offset", float(self.offset))

    @property
    def dim(self):
        return self.normal.shape[0]

    def residual(self, x):
        return float(self.normal @ x) - self.offset

    def contains(self, x, tol=0.0):
        return self.residual(x) <= tol

    def project(self, x):
        x = as_vector(x)
        check_same_dim(self.normal, x)
        excess = max(0.0, self.residual(x))
        if excess == 0.0:
            return x.copy()
        return x - (excess / float(self.normal @ self.normal)) * self.normal

    def oracle(self, x):
        return self.residual(x), self.normal.copy()


def project_halfspace(h, x):
    """Project `x` onto the half-space `h`."""
    return h.project(x)


def _orthonormalize(vectors, n):
    """Modified Gram-Schmidt with one re-orthogonalization pass.

    Vectors that vanish (relative to their input norm) are dropped, so a
    linearly dependent spanning set yields a basis of its span.
    """
    basis = []
    for w in vectors:
        w = as_vector(w, "basis vector").copy()
        if w.shape[0] != n:
            raise DimensionMismatch(f"basis vector of dimension {w.shape[0]}, expected {n}")
        scale = np.linalg.norm(w)
        for _ in range(2):
            for q in basis:
                w -= (q @ w) * q
        norm = np.linalg.norm(w)
        if norm > 1e-10 * scale:
            basis.append(w / norm)
    return np.array(basis, dtype=np.float64).reshape(len(basis), n)


@dataclass(frozen=True, eq=False)
class AffineSubspace:
    """``anchor + span(basis)`` with the rows of `basis` orthonormal.

    Build one with :meth:`from_spanning` or :meth:`from_equations`; the
    constructor itself only validates.
    """

    anchor: np.ndarray
    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        anchor = as_vector(self.anchor, "anchor")
        basis = np.asarray(self.basis, dtype=np.float64).reshape(-1, anchor.shape[0])
        if basis.shape[0] and not np.allclose(basis @ basis.T, np.eye(basis.shape[0]), atol=1e-12, rtol=0):
            raise InvalidSet("basis rows must be orthonormal within 1e-12")
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "basis", basis)

    @classmethod
    def from_spanning(cls, anchor, vectors):
        anchor = as_vector(anchor, "anchor")
        return cls(anchor, _orthonormalize(vectors, anchor.shape[0]))

    @classmethod
    def from_equations(cls, Q, b):
        """The solution set of ``Q x = b`` (assumed consistent)."""
        import scipy.linalg

        Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
        b = np.asarray(b, dtype=np.float64)
        anchor, *_ = np.linalg.lstsq(Q, b, rcond=None)
        null = scipy.linalg.null_space(Q)
        return cls.from_spanning(anchor, null.T)

    @property
    def dim(self):
        return self.anchor.shape[0]

    def project_linear(self, d):
        """Project a direction onto the subspace parallel to U."""
        return self.basis.T @ (self.basis @ d)

    def project(self, x):
        x = as_vector(x)
        check_same_dim(self.anchor, x)
        return self.anchor + self.project_linear(x - self.anchor)

    def distance(self, x):
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, x, tol=0.0):
        return self.distance(x) <= tol

    def oracle(self, x):
        raise NoOracle("affine subspaces have no level-function oracle")


def project_affine(u, x):
    """Project `x` onto the affine subspace `u`."""
    return u.project(x)
