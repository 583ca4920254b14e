"""Pure numpy/scipy implementations of the block kernels.

Same signatures and conventions as the compiled ``_ckernels`` module: the
product set is given as stacked ellipsoid data ``A`` (m, n, n), ``b`` (m, n)
and ``alpha`` (m,), each ellipsoid being ``{x : x^T A x + 2 x^T b - alpha <= 0}``.
Kernels write the displacement ``P(x_i) - x_i`` of every block into `D` and
return -1 on success, or the index of the first failing block.
"""

import numpy as np
from scipy.linalg import cho_factor, solve_triangular

NAME = "python"


def cut_blocks(A, b, alpha, X, D, G):
    """Subgradient-cut projection of every block of `X`.

    Fills ``G[i] = g_i(x_i)`` and ``D[i] = -max(0, g_i)/|grad g_i|^2 * grad g_i``.
    Returns the index of the first exterior block with zero gradient, else -1.
    """
    R = np.einsum("ijk,ik->ij", A, X) + b  # A x + b, half the gradient
    G[:] = np.einsum("ij,ij->i", X, R + b) - alpha
    grad_sq = 4.0 * np.einsum("ij,ij->i", R, R)
    outside = G > 0.0
    bad = np.flatnonzero(outside & (grad_sq == 0.0))
    if bad.size:
        return int(bad[0])
    step = np.zeros_like(G)
    np.divide(2.0 * G, grad_sq, out=step, where=outside)
    np.multiply(R, -step[:, None], out=D)
    return -1


def _newton_block(A, b, alpha, x, tol, max_iter):
    """Exact projection of `x` onto one ellipsoid; returns (z, converged)."""
    n = x.shape[0]
    eye = np.eye(n)

    def evaluate(lam):
        L, _ = cho_factor(eye + lam * A, lower=True, check_finite=False)
        y = solve_triangular(L, x - lam * b, lower=True, check_finite=False)
        z = solve_triangular(L, y, lower=True, trans="T", check_finite=False)
        w = A @ z + b
        g = z @ (w + b) - alpha
        q = solve_triangular(L, w, lower=True, check_finite=False)
        return z, g, -2.0 * (q @ q)

    w = A @ x + b
    g = x @ (w + b) - alpha
    if g <= 0.0:
        return x.copy(), True
    lam, z, dg = 0.0, x, -2.0 * (w @ w)
    lo, hi = 0.0, 1.0
    count = 0
    z_hi, g_hi, dg_hi = evaluate(hi)
    count += 1
    while g_hi > 0.0:
        lam, z, g, dg = hi, z_hi, g_hi, dg_hi
        lo = hi
        hi *= 10.0
        z_hi, g_hi, dg_hi = evaluate(hi)
        count += 1
        if count >= max_iter:
            return z, False
    if -g_hi <= tol:
        return z_hi, True
    while count < max_iter:
        if abs(g) <= tol:
            return z, True
        if g > 0.0:
            lo = lam
        else:
            hi = lam
        trial = lam - g / dg if dg < 0.0 else 0.5 * (lo + hi)
        if not lo < trial < hi:
            trial = 0.5 * (lo + hi)
        if trial == lam or hi - lo <= 4.0 * np.finfo(float).eps * hi:
            # bracket collapsed to rounding level: z is as accurate as it gets
            return z, True
        lam = trial
        z, g, dg = evaluate(lam)
        count += 1
    return z, False


def project_blocks(A, b, alpha, X, D, tol_rel, max_iter):
    """Exact projection of every block of `X` onto its ellipsoid.

    The multiplier solve stops at ``|g(z)| <= tol_rel * (1 + |alpha_i|)``.
    Returns the index of the first block whose solve exceeded `max_iter`
    evaluations, else -1.
    """
    for i in range(X.shape[0]):
        z, ok = _newton_block(A[i], b[i], alpha[i], X[i], tol_rel * (1.0 + abs(alpha[i])), max_iter)
        if not ok:
            return i
        D[i] = z - X[i]
    return -1
