"""Pierra's product space: block vectors in R^(n*m) and the diagonal subspace D.

A block vector is an (m, n) array whose rows are the blocks. The solvers
carry points flattened to length n*m; :class:`Diagonal` works on that flat
layout and plays the role of the affine subspace U.
"""

import numpy as np

from .geometry import as_vector


def lift(x, m):
    """``(x, x, ..., x)`` with `m` copies, as an (m, n) array."""
    if m < 1:
        raise ValueError("m must be at least 1")
    x = as_vector(x)
    return np.tile(x, (m, 1))


def diag_project(v):
    """Orthogonal projection onto D: every block replaced by the block mean."""
    v = np.asarray(v, dtype=np.float64)
    return np.broadcast_to(v.mean(axis=0), v.shape).copy()


def diag_reflect(v):
    """Reflection ``2 P_D(v) - v`` through the diagonal."""
    v = np.asarray(v, dtype=np.float64)
    return 2.0 * v.mean(axis=0) - v


class Diagonal:
    """The diagonal subspace ``{(x, ..., x)}`` of R^(n*m), on flat vectors."""

    def __init__(self, n, m):
        if n < 1 or m < 1:
            raise ValueError("n and m must be positive")
        self.n = n
        self.m = m

    @property
    def dim(self):
        return self.n * self.m

    def project_linear(self, d):
        D = np.asarray(d, dtype=np.float64).reshape(self.m, self.n)
        return np.tile(D.mean(axis=0), self.m)

    # D is a linear subspace, so the affine and linear projectors coincide
    project = project_linear

    def distance(self, x):
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, x, tol=0.0):
        return self.distance(x) <= tol

    def lift(self, x):
        return lift(x, self.m).ravel()

    def point(self, x):
        """The common block of a point of D (the mean block in general)."""
        return np.asarray(x, dtype=np.float64).reshape(self.m, self.n).mean(axis=0)
