"""Invariant checks shared by the property tests and the acceptance suite.

Each ``check_*`` takes the values drawn by its strategy and asserts. ``run``
turns a check into a hypothesis test with a given example count.
"""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from cfp.geometry import AffineSubspace, HalfSpace, circumcenter
from cfp.instances import gen_ellipsoids
from cfp.productspace import Diagonal
from cfp.separators import ExactSeparator, ProductSeparator, SubgradientSeparator
from cfp.sets import Ball, Ellipsoid, ProductSet
from cfp.solvers import Method, Problem, SolverConfig, carm_step, crm_step, map_step, maap_step, solve

seeds = st.integers(0, 2**32 - 1)


def run(check, strategy, examples):
    test = settings(max_examples=examples, derandomize=True)(given(strategy)(check))
    test()


# ---------------------------------------------------------------- circumcenter


def _triples(n):
    coords = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
    v = hnp.arrays(np.float64, n, elements=coords)
    return st.tuples(v, v, v)


triples = st.integers(2, 6).flatmap(_triples)


def check_circumcenter(pts):
    x, y, z = pts
    u, v = y - x, z - x
    uu, vv, uv = u @ u, v @ v, u @ v
    # keep well-separated, clearly non-collinear triples
    if uu < 1e-4 or vv < 1e-4 or uu * vv - uv * uv < 1e-6 * uu * vv:
        return
    c = circumcenter(x, y, z)
    r = np.linalg.norm(c - x)
    assert abs(r - np.linalg.norm(c - y)) <= 1e-9 * (1 + r)
    assert abs(r - np.linalg.norm(c - z)) <= 1e-9 * (1 + r)
    M = np.column_stack([u, v])
    coef, *_ = np.linalg.lstsq(M, c - x, rcond=None)
    assert np.linalg.norm(M @ coef - (c - x)) <= 1e-9 * (1 + r)


# ----------------------------------------------------------------- projectors


def _random_ellipsoid(rng, n):
    B = rng.standard_normal((n, n)) * (rng.random((n, n)) < 0.7)
    A = np.eye(n) + B.T @ B
    A = 0.5 * (A + A.T)
    b = rng.random(n)
    return Ellipsoid(A, b, float(b @ A @ b) + 0.1 + 9.9 * rng.random())


def random_projector(rng):
    """A set with an exact projector, and its dimension."""
    n = int(rng.integers(1, 6))
    kind = int(rng.integers(0, 6))
    if kind == 0:
        return HalfSpace(rng.standard_normal(n), rng.standard_normal()), n
    if kind == 1:
        k = int(rng.integers(1, n + 1))
        return AffineSubspace.from_spanning(rng.standard_normal(n), rng.standard_normal((k, n))), n
    if kind == 2:
        return Ball(rng.standard_normal(n), 0.1 + 3 * rng.random()), n
    if kind == 3:
        return _random_ellipsoid(rng, max(n, 2)), max(n, 2)
    if kind == 4:
        m = int(rng.integers(1, 4))
        return Diagonal(n, m), n * m
    m = int(rng.integers(1, 4))
    return ProductSet([_random_ellipsoid(rng, max(n, 2)) for _ in range(m)]), max(n, 2) * m


def check_firm_nonexpansive(seed):
    rng = np.random.default_rng(seed)
    P, n = random_projector(rng)
    x = 5 * rng.standard_normal(n)
    y = x + rng.standard_normal(n) * 10 ** rng.uniform(-3, 1)
    px, py = P.project(x), P.project(y)
    dp = px - py
    assert dp @ dp <= (x - y) @ dp + 1e-10


# ----------------------------------------------------------------- separators


def sample_ellipsoid(E, rng, count):
    """Uniform-ish points of E: c + r L^{-T} w with |w| <= 1."""
    L = np.linalg.cholesky(E.A)
    c = -np.linalg.solve(E.A, E.b)
    radius = np.sqrt(E.alpha + E.b @ np.linalg.solve(E.A, E.b))
    w = rng.standard_normal((count, E.dim))
    w *= (rng.random((count, 1)) ** (1 / E.dim)) / np.linalg.norm(w, axis=1, keepdims=True)
    return c + radius * np.linalg.solve(L.T, w.T).T


def check_separator_cut(seed):
    rng = np.random.default_rng(seed)
    E = _random_ellipsoid(rng, int(rng.integers(2, 6)))
    x = 10 * rng.standard_normal(E.dim)
    sep = SubgradientSeparator(E)
    g, _ = E.oracle(x)
    S = sep.separate(x)
    if g <= 0:
        assert not hasattr(S, "halfspace")
        return
    h = S.halfspace
    # exclusion: the cut is violated at x by exactly g(x)
    assert abs(h.residual(x) - g) <= 1e-10 * (1 + abs(g))
    # containment: every sampled point of K satisfies the cut
    W = sample_ellipsoid(E, rng, 1000)
    scale = np.linalg.norm(h.normal) * (1 + np.abs(W).max())
    assert np.all(W @ h.normal - h.offset <= 1e-10 * scale)


# ------------------------------------------------------------------- solvers


def small_instance(seed):
    rng = np.random.default_rng(seed)
    return gen_ellipsoids(int(rng.integers(2, 6)), int(rng.integers(1, 4)), seed)


def check_solver_run(args):
    """Fejér monotonicity for all four methods, plus U-membership and the segment property for CARM."""
    seed, method = args
    inst = small_instance(seed)
    problem = inst.problem()
    rec = solve(problem, SolverConfig(method, 1e-8, 15, record_iterates=True), inst.lifted_x0())
    z = problem.feasible_point
    dist = [np.linalg.norm(x - z) for x in rec.iterate_trace]
    assert all(b <= a + 1e-9 for a, b in zip(dist, dist[1:]))
    if Method(method).circumcentered:
        for x in rec.iterate_trace:
            assert np.linalg.norm(x - problem.U.project(x)) <= 1e-8
    if Method(method) is Method.CARM:
        for x in rec.iterate_trace[:-1]:
            check_segment(problem, x)


def check_segment(problem, x):
    """T^S(x) lies on the segment from x to C^S(x)."""
    c = carm_step(problem, x)
    t = maap_step(problem, x)
    dc = c - x
    if dc @ dc == 0.0:
        assert np.linalg.norm(t - x) <= 1e-8
        return
    theta = (t - x) @ dc / (dc @ dc)
    assert -1e-12 <= theta <= 1 + 1e-12
    assert np.linalg.norm(t - x - theta * dc) <= 1e-8


solver_cases = st.tuples(seeds, st.sampled_from(list(Method)))


def check_exact_reduction(seed):
    """With exact separators MAAP is MAP and CARM is CRM."""
    inst = small_instance(seed)
    K = ProductSet(inst.ellipsoids())
    exact_blocks = ProductSeparator([ExactSeparator(E) for E in K.sets])
    plain = Problem(K, Diagonal(inst.n, inst.m))
    approx = Problem(K, Diagonal(inst.n, inst.m), exact_blocks)
    x = inst.lifted_x0()
    for _ in range(3):
        tol = 1e-12 * (1 + np.linalg.norm(x))
        assert np.linalg.norm(maap_step(approx, x) - map_step(plain, x)) <= tol
        nxt = crm_step(plain, x)
        assert np.linalg.norm(carm_step(approx, x) - nxt) <= tol
        x = nxt


INVARIANT_SUITES = {
    "circumcenter equidistance and affine hull": (check_circumcenter, triples),
    "firm nonexpansiveness of projectors": (check_firm_nonexpansive, seeds),
    "separator containment and exclusion": (check_separator_cut, seeds),
    "Fejer monotonicity, CARM in U, segment property": (check_solver_run, solver_cases),
    "exact-separator reduction": (check_exact_reduction, seeds),
}
