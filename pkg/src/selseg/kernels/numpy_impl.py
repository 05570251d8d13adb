"""Pure NumPy fallbacks for the compiled kernels.

The eikonal solver applies the Godunov local update as a Jacobi
iteration.  It shares the fixed point of the Gauss-Seidel sweeps but the
front advances at most one pixel layer per pass, so the pass cap scales
with the grid perimeter instead of being a small constant.
"""

import numpy as np

from ..gridops import central_gradient

BIG = 1e30


def solve_eikonal(seed_dist, q, h=1.0, rtol=1e-9):
    """Jacobi relaxation of the Godunov upwind update for |grad D| = q."""
    dist = np.array(seed_dist, dtype=np.float64)
    n, m = dist.shape
    qh = np.asarray(q, dtype=np.float64) * float(h)
    for _ in range(16 * (n + m)):
        p = np.pad(dist, 1, constant_values=BIG)
        a = np.minimum(p[:-2, 1:-1], p[2:, 1:-1])
        b = np.minimum(p[1:-1, :-2], p[1:-1, 2:])
        d = np.abs(a - b)
        two = 0.5 * (a + b + np.sqrt(np.maximum(2.0 * qh * qh - d * d, 0.0)))
        cand = np.where(d >= qh, np.minimum(a, b) + qh, two)
        new = np.minimum(dist, cand)
        delta = float(np.max(dist - new))
        dist = new
        finite = dist[dist < 0.5 * BIG]
        scale = float(finite.max()) if finite.size else 1.0
        if delta <= rtol * max(1.0, scale):
            break
    return dist


def _line_coefficients(G):
    half = 0.5 * (G[:, 1:] + G[:, :-1])
    lower = np.zeros_like(G)
    upper = np.zeros_like(G)
    lower[:, 1:] = half
    upper[:, :-1] = half
    diag = -(lower + upper)
    return lower, diag, upper


def aos_update(u, F, g, lam, alpha, mu, tau, eps1, eps2, zeta, coeff):
    """One modified-AOS update; see solver.aos_step for semantics.

    Vectorized mirror of the compiled kernel: damped explicit force step
    followed by one tridiagonal diffusion solve per axis, averaged.
    """
    u = np.asarray(u, dtype=np.float64)
    F = np.asarray(F, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    gx, gy = central_gradient(u)
    G = g / np.sqrt(gx * gx + gy * gy + eps1 * eps1)
    t = 2.0 * u - 1.0
    root = np.sqrt(t * t + eps2)
    b = root - 1.0
    bp = 2.0 * t / root
    h = 0.5 * (1.0 + (2.0 / np.pi) * np.arctan(b / eps2))
    hp = eps2 / (np.pi * (eps2 * eps2 + b * b))
    f0 = lam * F + alpha * (bp * (h + b * hp))
    band = ((u >= -zeta) & (u <= zeta)) | ((u >= 1.0 - zeta) & (u <= 1.0 + zeta))
    bt = np.where(band, coeff, 0.0)
    inv = 1.0 / (1.0 + tau * alpha * bt)
    ut = u - tau * inv * f0
    scale = 2.0 * tau * mu * inv
    halves = []
    for axis in (1, 0):
        Ga = G if axis == 1 else G.T
        s = scale if axis == 1 else scale.T
        rhs = ut if axis == 1 else ut.T
        lower, diag, upper = _line_coefficients(Ga)
        sol = solve_tridiag_batch(-s * lower, 1.0 - s * diag, -s * upper, rhs)
        halves.append(sol if axis == 1 else sol.T)
    return 0.5 * (halves[0] + halves[1])


def solve_tridiag_batch(lower, diag, upper, rhs):
    """Thomas algorithm vectorized across the batch dimension.

    Same convention as the compiled version: row k encodes
    lower[k,i]*x[i-1] + diag[k,i]*x[i] + upper[k,i]*x[i+1] = rhs[k,i],
    with lower[k,0] and upper[k,-1] ignored.  Diagonal dominance is the
    caller's responsibility.
    """
    lower = np.asarray(lower, dtype=np.float64)
    diag = np.asarray(diag, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    _, n = diag.shape
    cp = np.empty_like(diag)
    dp = np.empty_like(diag)
    cp[:, 0] = upper[:, 0] / diag[:, 0]
    dp[:, 0] = rhs[:, 0] / diag[:, 0]
    for i in range(1, n):
        denom = diag[:, i] - lower[:, i] * cp[:, i - 1]
        cp[:, i] = upper[:, i] / denom
        dp[:, i] = (rhs[:, i] - lower[:, i] * dp[:, i - 1]) / denom
    out = np.empty_like(rhs)
    out[:, n - 1] = dp[:, n - 1]
    for i in range(n - 2, -1, -1):
        out[:, i] = dp[:, i] - cp[:, i] * out[:, i + 1]
    return out
