"""Empirical checks of the convergence theory.

Rate estimation replaces each ``limsup`` by a maximum over the last
`tail_window` entries of a finite trace. The classification thresholds are
conventions of this package: ``q <= 0.05`` counts as superlinear and
``q >= 0.95`` as sublinear.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData, InsufficientTrace, NoIntersectionOracle, RadialSingularity
from .geometry import as_vector
from .solvers import Method

LIMIT_TOL = 1e-14
SUPERLINEAR_Q = 0.05
SUBLINEAR_Q = 0.95
AUDIT_SLACK = 0.02


class Rate(str, enum.Enum):
    SUPERLINEAR = "superlinear"
    LINEAR = "linear"
    SUBLINEAR = "sublinear"


def classify(q):
    if q <= SUPERLINEAR_Q:
        return Rate.SUPERLINEAR
    if q >= SUBLINEAR_Q:
        return Rate.SUBLINEAR
    return Rate.LINEAR


@dataclass(frozen=True)
class RateReport:
    q_estimate: float
    r_estimate: float
    classification: Rate
    tail_window: int
    ratios: np.ndarray


def _distances(trace, limit):
    limit = np.atleast_1d(np.asarray(limit, dtype=np.float64))
    return np.array([np.linalg.norm(np.atleast_1d(np.asarray(z, dtype=np.float64)) - limit) for z in trace])


def estimate_rates(trace, limit, tail_window=10):
    """Q- and R-rate estimates of a sequence converging to `limit`.

    The trace is cut at the first iterate within 1e-14 of the limit. Over the
    last `tail_window` steps, ``q`` is the largest ratio
    ``|z_{k+1} - z*| / |z_k - z*|`` and ``r`` the largest ``|z_k - z*|^(1/k)``.
    """
    if tail_window < 1:
        raise ValueError("tail_window must be positive")
    dist = _distances(trace, limit)
    close = np.flatnonzero(dist <= LIMIT_TOL)
    if close.size:
        dist = dist[: close[0]]
    if dist.size < tail_window + 2:
        raise InsufficientTrace(f"need {tail_window + 2} iterates away from the limit, have {dist.size}")
    ratios = dist[1:] / dist[:-1]
    tail = ratios[-tail_window:]
    k = np.arange(dist.size - tail_window, dist.size)
    roots = dist[-tail_window:] ** (1.0 / k)
    q = float(tail.max())
    return RateReport(q, float(roots.max()), classify(q), tail_window, tail)


@dataclass(frozen=True)
class ErrorBoundEstimate:
    omega: float
    sample_count: int
    sampling_radius: float


def _intersection(problem):
    if problem.intersection is None:
        raise NoIntersectionOracle("this problem has no known K n U to measure distances against")
    return problem.intersection


def estimate_error_bound(problem, reference, radius, samples=1000, seed=0, separator=None):
    """Smallest sampled ``dist(x, S(x)) / dist(x, K n U)`` over ``U n B(reference, radius)``.

    Points inside K are skipped. `separator` defaults to the problem's own.
    """
    inter = _intersection(problem)
    sep = problem.separator if separator is None else separator
    rng = np.random.default_rng(seed)
    center = problem.U.project(as_vector(reference, "reference"))
    best = math.inf
    used = 0
    for _ in range(samples):
        direction = problem.U.project_linear(rng.standard_normal(problem.dim))
        norm = np.linalg.norm(direction)
        if norm == 0.0:
            continue
        x = center + (radius * rng.random() / norm) * direction
        if problem.K.contains(x):
            continue
        far = inter.distance(x)
        if far <= 0.0:
            continue
        used += 1
        best = min(best, float(np.linalg.norm(sep.displacement(x))) / far)
    if not used:
        raise InsufficientData("every sampled point was inside K")
    return ErrorBoundEstimate(best, used, float(radius))


def rate_bound(method, omega):
    """Asymptotic rate bound for MAAP/MAP and CARM/CRM under an error bound ``omega``."""
    if not 0.0 < omega <= 1.0:
        raise ValueError("omega must lie in (0, 1]")
    w2 = omega * omega
    if Method(method).circumcentered:
        return math.sqrt((1.0 - w2) / (1.0 + w2))
    return math.sqrt(1.0 - w2)


@dataclass(frozen=True)
class AuditReport:
    method: Method
    omega: float
    bound: float
    max_ratio: float
    ratios: np.ndarray
    passed: bool


def audit_rate_bounds(record, omega, method=None, *, intersection, tail_window=10, slack=AUDIT_SLACK):
    """Compare the tail of ``dist(x_k, K n U)`` ratios with the theoretical bound.

    Steps whose starting distance is below 1e-14 are dropped; a run that
    lands in K n U in fewer steps than `tail_window` is audited on what it has.
    """
    if intersection is None:
        raise NoIntersectionOracle("audits need a known K n U")
    if not record.iterate_trace:
        raise InsufficientTrace("audits need a run recorded with record_iterates=True")
    method = Method(method if method is not None else record.method)
    dist = np.array([intersection.distance(x) for x in record.iterate_trace])
    keep = dist[:-1] > LIMIT_TOL
    ratios = (dist[1:] / np.where(keep, dist[:-1], 1.0))[keep]
    if ratios.size == 0:
        raise InsufficientTrace("the run started inside K n U")
    tail = ratios[-tail_window:]
    bound = rate_bound(method, omega)
    worst = float(tail.max())
    return AuditReport(method, float(omega), bound, worst, tail, worst <= bound + slack)


def a3_surrogate(problem, record, tol=1e-6):
    """On a converged run the final point must satisfy K's inequality within `tol`."""
    if not record.converged:
        return False
    return bool(problem.K.contains(record.final_point, tol))


class Family(enum.IntEnum):
    ONE = 1
    TWO = 2


def family_oracles(family, params, x):
    """Closed-form ``(T^S(x, 0), C^S(x, 0))`` for the epigraph families, as points of R^n.

    `params` is the oracle ``f(x) -> (f, grad f)`` for family one and
    ``phi(t) -> (phi, phi')`` for family two.
    """
    family = Family(family)
    x = as_vector(x)
    if family is Family.ONE:
        value, grad = params(x)
        grad = np.asarray(grad, dtype=np.float64)
        if value <= 0.0:
            return x.copy(), x.copy()
        gg = float(grad @ grad)
        return x - (value / (gg + 1.0)) * grad, x - (value / gg) * grad
    t = float(np.linalg.norm(x))
    if t == 0.0:
        raise RadialSingularity("the radial formulas are undefined at x = 0")
    phi, dphi = params(t)
    if phi <= 0.0:
        return x.copy(), x.copy()
    maap = 1.0 - phi * dphi / ((dphi * dphi + 1.0) * t)
    carm = 1.0 - phi / (dphi * t)
    return maap * x, carm * x
