import math

import numpy as np
import pytest

from cfp.errors import HypothesisViolation
from cfp.fixtures import (
    DiskIntersection,
    SegmentIntersection,
    family_start,
    make_anisotropic,
    make_family,
    phi_root,
    random_halfspace_line,
    two_line,
)


def test_family_hypotheses_checked():
    with pytest.raises(HypothesisViolation, match="f\\(0\\) = 0"):
        make_family(1, lambda x: (float(x @ x) + 1.0, 2 * x), 2)
    with pytest.raises(HypothesisViolation, match="grad"):
        make_family(1, lambda x: (float(np.sum(x)), np.ones_like(x)), 2)
    with pytest.raises(HypothesisViolation, match="phi\\(0\\) < 0"):
        make_family(2, lambda t: (t * t, 2 * t), 2)
    with pytest.raises(KeyError):
        make_family(1, "cubic", 2)


def test_anisotropic_family():
    p = make_family(1, make_anisotropic([1.0, 4.0]), 2)
    assert p.dim == 3
    assert p.K.contains(np.zeros(3))


def test_phi_root():
    assert phi_root(lambda t: (t * t - 9.0, 2 * t)) == pytest.approx(3.0, rel=1e-14)
    assert make_family(2, "quartic", 3).intersection.radius == pytest.approx(1.0, rel=1e-14)


def test_family_start_distance():
    for n in (1, 4, 9):
        z = family_start(n, 2.5)
        assert np.linalg.norm(z) == pytest.approx(2.5)
        assert z[-1] == 0


def test_disk_intersection():
    D = DiskIntersection(1.0)
    np.testing.assert_allclose(D.project([3.0, 4.0, 2.0]), [0.6, 0.8, 0.0])
    assert D.distance([0.5, 0.0, 0.0]) == 0.0


def test_segment_intersection():
    S = SegmentIntersection(np.zeros(2), np.array([1.0, 0.0]), 2.0)
    np.testing.assert_array_equal(S.project([5.0, 1.0]), [2, 0])
    np.testing.assert_array_equal(S.project([-1.0, 1.0]), [0, 0])
    assert S.distance([1.0, 3.0]) == 3.0


@pytest.mark.parametrize("deg", [30, 45, 60])
def test_two_line_disk_geometry(deg):
    theta = math.radians(deg)
    fx = two_line(theta, "disk")
    chord = 2 * math.sin(theta)
    # endpoints of K n U lie on the ball boundary, the interior of the chord inside
    for s in (0.0, chord):
        assert abs(np.linalg.norm(np.array([s, 0.0]) - fx.problem.K.center) - 1.0) <= 1e-12
    assert fx.problem.K.contains(np.array([chord / 2, 0.0]))
    assert not fx.problem.K.contains(fx.x0)
    assert fx.omega == pytest.approx(math.sin(theta))


def test_two_line_validation():
    with pytest.raises(ValueError):
        two_line(0.0)
    with pytest.raises(ValueError):
        two_line(1.0, "cone")


def test_random_halfspace_line(rng):
    fx = random_halfspace_line(rng, 5)
    p = fx.problem
    assert p.U.contains(fx.x0, 1e-12)
    assert not p.K.contains(fx.x0)
    assert p.K.contains(p.feasible_point, 1e-9) and p.U.contains(p.feasible_point, 1e-9)
