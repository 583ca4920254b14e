"""MAP, MAAP, CRM and CARM for finding a point in K n U.

All four share one driver. Each iteration evaluates a single displacement
``d = P(x) - x`` (exact projection for MAP/CRM, separator projection for
MAAP/CARM), uses ``|d|`` as the stopping gap, and then feeds the same `d`
into the step, so no projection is computed twice.

For the circumcenter steps, x lies in U, so the reflections ``x + 2d`` and
``R_U(x + 2d)`` are mirror images across ``x + U`` and the circumcenter lies
on ``x + span(p)`` with ``p = P_lin(d)``: it is ``x + (|d|^2 / |p|^2) p``.
"""

from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import CFPError, DegenerateCircumcenter, DimensionMismatch, NotInSubspace
from .geometry import as_vector
from .separators import ExactSeparator

logger = logging.getLogger(__name__)

IN_U_TOL = 1e-9


class Method(str, enum.Enum):
    MAP = "map"
    MAAP = "maap"
    CRM = "crm"
    CARM = "carm"

    @property
    def exact(self):
        return self in (Method.MAP, Method.CRM)

    @property
    def circumcentered(self):
        return self in (Method.CRM, Method.CARM)

    @property
    def label(self):
        return self.name


class Status(str, enum.Enum):
    CONVERGED = "converged"
    ITERATION_CAP = "iteration_cap"
    DEGENERATE_CIRCUMCENTER = "degenerate_circumcenter"
    FAILED = "failed"


@dataclass
class Problem:
    """Find a point of ``K n U``.

    Parameters
    ----------
    K : set
        Closed convex set (see :mod:`cfp.sets`), or a :class:`~cfp.sets.ProductSet`.
    U : AffineSubspace or Diagonal
        Anything with ``project``, ``project_linear`` and ``dim``.
    separator : optional
        Separating operator used by MAAP and CARM. Defaults to the exact one.
    intersection : optional
        Known ``K n U`` with a ``distance(x)`` method, used by the rate audits.
    feasible_point : optional
        A known point of ``K n U``, used by Fejér-monotonicity checks.
    """

    K: object
    U: object
    separator: object = None
    intersection: object = None
    feasible_point: np.ndarray | None = None
    exact: ExactSeparator = field(init=False, repr=False)

    def __post_init__(self):
        if self.K.dim != self.U.dim:
            raise DimensionMismatch(f"K lives in R^{self.K.dim}, U in R^{self.U.dim}")
        self.exact = ExactSeparator(self.K)
        if self.separator is None:
            self.separator = self.exact
        elif self.separator.dim != self.K.dim:
            raise DimensionMismatch("separator dimension does not match K")

    @property
    def dim(self):
        return self.K.dim

    def separator_for(self, method):
        return self.exact if Method(method).exact else self.separator


@dataclass(frozen=True)
class SolverConfig:
    method: Method
    eps: float = 1e-6
    max_iter: int = 50000
    record_iterates: bool = False

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass
class RunRecord:
    """Trace of one solver run. ``gap_trace[k]`` is the gap at iterate k."""

    method: Method
    status: Status
    iterations: int
    wall_time: float
    final_point: np.ndarray
    gap_trace: list
    iterate_trace: list | None = None
    message: str = ""

    @property
    def final_gap(self):
        return self.gap_trace[-1] if self.gap_trace else math.nan

    @property
    def converged(self):
        return self.status is Status.CONVERGED


# |P_lin(d)| / |d| below which the reflections and x are treated as collinear;
# P_lin(d) carries an absolute error of order eps |d|
ORTHOGONAL_TOL = 1e-12


def _circumcenter_step(U, x, d):
    # y = x + 2d and z = x + 2p - 2d with p the part of d along U. The
    # triangle is symmetric about x + span(p), which gives the circumcenter in
    # closed form and avoids the Gram system going singular as d turns
    # orthogonal to U (thin cuts nearly parallel to U)
    p = U.project_linear(d)
    pp = float(p @ p)
    dd = float(d @ d)
    if dd == 0.0:
        return x.copy()
    if pp <= ORTHOGONAL_TOL**2 * dd:
        raise DegenerateCircumcenter(
            f"displacement orthogonal to U (|P d| = {np.sqrt(pp):.3e}, |d| = {np.sqrt(dd):.3e})"
        )
    return x + (dd / pp) * p


def advance(problem, method, x, d):
    """Next iterate from `x` given its displacement ``d = P(x) - x``."""
    if Method(method).circumcentered:
        return _circumcenter_step(problem.U, x, d)
    return problem.U.project(x + d)


def _require_in_U(U, x):
    gap = float(np.linalg.norm(x - U.project(x)))
    if gap > IN_U_TOL * (1.0 + float(np.linalg.norm(x))):
        raise NotInSubspace(f"circumcenter steps need x in U; dist(x, U) = {gap:.3e}")


def _step(problem, method, x):
    x = as_vector(x)
    if x.shape[0] != problem.dim:
        raise DimensionMismatch(f"point of dimension {x.shape[0]} for a problem in R^{problem.dim}")
    if method.circumcentered:
        _require_in_U(problem.U, x)
    d = problem.separator_for(method).displacement(x)
    return advance(problem, method, x, d)


def map_step(problem, x):
    """``P_U(P_K(x))``."""
    return _step(problem, Method.MAP, x)


def maap_step(problem, x):
    """``P_U(P^S(x))``."""
    return _step(problem, Method.MAAP, x)


def crm_step(problem, x):
    """``circum(x, R_K(x), R_U(R_K(x)))`` for x in U."""
    return _step(problem, Method.CRM, x)


def carm_step(problem, x):
    """``circum(x, R^S(x), R_U(R^S(x)))`` for x in U."""
    return _step(problem, Method.CARM, x)


STEPS = {Method.MAP: map_step, Method.MAAP: maap_step, Method.CRM: crm_step, Method.CARM: carm_step}


def solve(problem, cfg, x0):
    """Iterate ``cfg.method`` from `x0` until the gap drops below ``cfg.eps``.

    Circumcentered methods start from ``P_U(x0)``. Step failures end the run
    with a non-converged status instead of raising.
    """
    method = cfg.method
    x = as_vector(x0, "x0").astype(np.float64, copy=True)
    if x.shape[0] != problem.dim:
        raise DimensionMismatch(f"x0 of dimension {x.shape[0]} for a problem in R^{problem.dim}")
    if method.circumcentered:
        px = problem.U.project(x)
        if np.linalg.norm(px - x) > IN_U_TOL * (1.0 + np.linalg.norm(x)):
            logger.info("%s: initial point replaced by its projection onto U", method.label)
        x = px
    sep = problem.separator_for(method)
    U = problem.U
    eps = cfg.eps
    max_iter = cfg.max_iter
    gaps = []
    iterates = [x.copy()] if cfg.record_iterates else None
    status = Status.ITERATION_CAP
    message = ""
    k = 0

    start = time.perf_counter()
    try:
        while True:
            try:
                d = sep.displacement(x)
            except CFPError:
                gaps.append(math.nan)
                raise
            gap = math.sqrt(float(d @ d))
            gaps.append(gap)
            if gap < eps:
                status = Status.CONVERGED
                break
            if k >= max_iter:
                break
            if method.circumcentered:
                x = _circumcenter_step(U, x, d)
            else:
                x = U.project(x + d)
            k += 1
            if iterates is not None:
                iterates.append(x.copy())
    except DegenerateCircumcenter as exc:
        status, message = Status.DEGENERATE_CIRCUMCENTER, str(exc)
    except CFPError as exc:
        status, message = Status.FAILED, f"{type(exc).__name__}: {exc}"
    wall = time.perf_counter() - start

    if message:
        logger.warning("%s stopped at iteration %d: %s", method.label, k, message)
    return RunRecord(method, status, k, wall, x, gaps, iterates, message)
