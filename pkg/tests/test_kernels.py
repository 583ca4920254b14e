import numpy as np
import pytest

from cfp import _pykernels, kernels
from cfp.sets import NEWTON_MAX_ITER, NEWTON_TOL

from invariants import _random_ellipsoid


def _stack(rng, m, n):
    Es = [_random_ellipsoid(rng, n) for _ in range(m)]
    A = np.array([E.A for E in Es])
    b = np.array([E.b for E in Es])
    alpha = np.array([E.alpha for E in Es])
    return A, b, alpha


def test_available_and_selection():
    mods = kernels.available()
    assert "python" in mods
    assert kernels.BACKEND in mods
    with pytest.raises(ValueError):
        with kernels.use("fortran"):
            pass


def test_use_restores():
    before = kernels.project_blocks
    with kernels.use("python"):
        assert kernels.project_blocks is _pykernels.project_blocks
    assert kernels.project_blocks is before


@pytest.mark.skipif(kernels.compiled is None, reason="compiled kernels not built")
class TestParity:
    @pytest.mark.parametrize("m,n", [(1, 2), (5, 10), (3, 50)])
    def test_cut(self, rng, m, n):
        A, b, alpha = _stack(rng, m, n)
        X = 5 * rng.standard_normal((m, n))
        out = []
        for mod in (kernels.compiled, _pykernels):
            D, G = np.empty((m, n)), np.empty(m)
            assert mod.cut_blocks(A, b, alpha, X, D, G) == -1
            out.append((D, G))
        np.testing.assert_allclose(out[0][0], out[1][0], rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(out[0][1], out[1][1], rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("m,n", [(1, 2), (5, 10), (3, 50)])
    def test_project(self, rng, m, n):
        A, b, alpha = _stack(rng, m, n)
        X = 5 * rng.standard_normal((m, n))
        out = []
        for mod in (kernels.compiled, _pykernels):
            D = np.empty((m, n))
            assert mod.project_blocks(A, b, alpha, X, D, NEWTON_TOL, NEWTON_MAX_ITER) == -1
            out.append(D)
        np.testing.assert_allclose(out[0], out[1], rtol=1e-9, atol=1e-12)

    def test_zero_gradient_index(self):
        A = np.array([np.eye(2), np.eye(2)])
        b = np.array([[0.0, 0.0], [1.0, 0.0]])
        alpha = np.array([1.0, 0.5])
        # block 1 evaluated at its centre (-1, 0), which is inside: no failure
        X = np.array([[2.0, 0.0], [-1.0, 0.0]])
        for mod in (kernels.compiled, _pykernels):
            D, G = np.empty((2, 2)), np.empty(2)
            assert mod.cut_blocks(A, b, alpha, X, D, G) == -1
            np.testing.assert_array_equal(D[1], 0)
