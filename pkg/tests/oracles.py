"""Independent reference implementations used to validate the package.

Each oracle favors obviousness over speed: exhaustive search, dense
linear algebra, graph shortest paths and finite differences.  None of
them share code with the package internals they check.
"""

import heapq
import itertools

import numpy as np


def euclidean_distance(shape, sources):
    """Exact min-over-sources Euclidean distance; sources are (x, y)."""
    n, m = shape
    ys, xs = np.mgrid[0:n, 0:m]
    dist = np.full(shape, np.inf)
    for x, y in sources:
        dist = np.minimum(dist, np.hypot(xs - x, ys - y))
    return dist


def dijkstra_distance(q, source_mask):
    """8-connected shortest paths with mean-endpoint-q edge weights."""
    q = np.asarray(q, dtype=np.float64)
    n, m = q.shape
    dist = np.full((n, m), np.inf)
    heap = []
    for i in range(n):
        for j in range(m):
            if source_mask[i, j]:
                dist[i, j] = 0.0
                heapq.heappush(heap, (0.0, i, j))
    root2 = np.sqrt(2.0)
    steps = (
        (-1, 0, 1.0),
        (1, 0, 1.0),
        (0, -1, 1.0),
        (0, 1, 1.0),
        (-1, -1, root2),
        (-1, 1, root2),
        (1, -1, root2),
        (1, 1, root2),
    )
    while heap:
        d, i, j = heapq.heappop(heap)
        if d > dist[i, j]:
            continue
        for di, dj, length in steps:
            ni, nj = i + di, j + dj
            if 0 <= ni < n and 0 <= nj < m:
                nd = d + 0.5 * (q[i, j] + q[ni, nj]) * length
                if nd < dist[ni, nj]:
                    dist[ni, nj] = nd
                    heapq.heappush(heap, (nd, ni, nj))
    return dist


def class_sse_literal(hist, lo, hi):
    """Within-class squared error over bins [lo, hi] from the definition."""
    hist = np.asarray(hist, dtype=np.float64)
    centers = (np.arange(hist.size) + 0.5) / hist.size
    w = hist[lo : hi + 1]
    total = w.sum()
    if total == 0.0:
        return 0.0
    mean = (w * centers[lo : hi + 1]).sum() / total
    return float((w * (centers[lo : hi + 1] - mean) ** 2).sum())


def brute_otsu_cuts(hist, n_classes):
    """Exhaustive intra-class-variance minimization over all cut tuples.

    Enumerates every possible cut tuple and returns the first optimum,
    i.e. the lexicographically smallest; a cut k ends a class after bin
    k and bin centers sit at (b + 0.5)/len(hist).  Class errors come
    from prefix sums; class_sse_literal provides the definitional check
    of that algebra.
    """
    hist = np.asarray(hist, dtype=np.float64)
    nbins = hist.size
    centers = (np.arange(nbins) + 0.5) / nbins
    w = np.concatenate(([0.0], np.cumsum(hist)))
    wx = np.concatenate(([0.0], np.cumsum(hist * centers)))
    wxx = np.concatenate(([0.0], np.cumsum(hist * centers * centers)))

    def class_sse(lo, hi):
        total = w[hi + 1] - w[lo]
        if total == 0.0:
            return 0.0
        s = wx[hi + 1] - wx[lo]
        ss = wxx[hi + 1] - wxx[lo]
        return ss - s * s / total

    best = None
    best_cuts = None
    for cuts in itertools.combinations(range(nbins - 1), n_classes - 1):
        bounds = (-1,) + cuts + (nbins - 1,)
        sse = sum(class_sse(bounds[k] + 1, bounds[k + 1]) for k in range(n_classes))
        if best is None or sse < best:
            best = sse
            best_cuts = cuts
    return best_cuts


def _fold(k, n):
    """Half-sample symmetric boundary: ...c b a | a b c... and back."""
    while k < 0 or k >= n:
        if k < 0:
            k = -k - 1
        if k >= n:
            k = 2 * n - 1 - k
    return k


def box_mean_brute(values, window):
    """Mean over a window x window neighborhood, mirrored at edges."""
    values = np.asarray(values, dtype=np.float64)
    n, m = values.shape
    r = window // 2
    out = np.empty_like(values)
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for di in range(-r, r + 1):
                for dj in range(-r, r + 1):
                    acc += values[_fold(i + di, n), _fold(j + dj, m)]
            out[i, j] = acc / (window * window)
    return out


def gaussian_convolve_brute(values, sigma, truncate=4.0):
    """Direct nested-loop Gaussian convolution, mirrored at edges."""
    values = np.asarray(values, dtype=np.float64)
    r = int(truncate * float(sigma) + 0.5)
    offsets = np.arange(-r, r + 1)
    kern = np.exp(-0.5 * (offsets / float(sigma)) ** 2)
    kern /= kern.sum()
    n, m = values.shape
    out = np.zeros_like(values)
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for a, wa in zip(offsets, kern):
                for b, wb in zip(offsets, kern):
                    acc += wa * wb * values[_fold(i + a, n), _fold(j + b, m)]
            out[i, j] = acc
    return out


def dense_aos_oracle(u, F, g, cfg, penalty_prime_fn, coeff):
    """Reference AOS step via dense per-line solves.

    Builds each one-dimensional diffusion matrix explicitly and applies
    numpy.linalg.solve, with the damped explicit force step computed
    from the supplied penalty derivative.  Mirrors the update
      ut     = u - tau (I+Bt)^-1 (lam F + alpha nu'(u))
      u_next = 1/2 sum_axes (I - 2 tau mu (I+Bt)^-1 A_axis)^-1 ut
    """
    u = np.asarray(u, dtype=np.float64)
    n, m = u.shape
    lam = cfg.lambda_tilde
    alpha = cfg.penalty_weight
    tau = cfg.tau
    pad = np.pad(u, 1, mode="edge")
    gx = 0.5 * (pad[1:-1, 2:] - pad[1:-1, :-2])
    gy = 0.5 * (pad[2:, 1:-1] - pad[:-2, 1:-1])
    G = g / np.sqrt(gx * gx + gy * gy + cfg.eps1 * cfg.eps1)
    f0 = lam * F + alpha * penalty_prime_fn(u, cfg.eps2)
    band = ((u >= -cfg.zeta) & (u <= cfg.zeta)) | (
        (u >= 1.0 - cfg.zeta) & (u <= 1.0 + cfg.zeta)
    )
    inv = 1.0 / (1.0 + tau * alpha * np.where(band, coeff, 0.0))
    ut = u - tau * inv * f0
    scale = 2.0 * tau * cfg.mu * inv

    def line_matrix(diffus, svec):
        k = diffus.size
        A = np.zeros((k, k))
        for idx in range(k - 1):
            half = 0.5 * (diffus[idx] + diffus[idx + 1])
            A[idx, idx + 1] += half
            A[idx, idx] -= half
            A[idx + 1, idx] += half
            A[idx + 1, idx + 1] -= half
        return np.eye(k) - svec[:, None] * A

    out = np.zeros_like(u)
    for i in range(n):
        out[i, :] += 0.5 * np.linalg.solve(line_matrix(G[i, :], scale[i, :]), ut[i, :])
    for j in range(m):
        out[:, j] += 0.5 * np.linalg.solve(line_matrix(G[:, j], scale[:, j]), ut[:, j])
    return out


def hull_mask_brute(points, height, width):
    """Point-in-convex-hull test for every pixel via half-plane checks.

    Degenerate inputs (all points collinear or coincident) are not
    handled; callers use this only for full-dimensional hulls.
    """
    from scipy.spatial import ConvexHull

    pts = np.asarray(points, dtype=np.float64)
    hull = ConvexHull(pts)
    mask = np.zeros((height, width), dtype=np.uint8)
    eqs = hull.equations
    for y in range(height):
        for x in range(width):
            vals = eqs[:, 0] * x + eqs[:, 1] * y + eqs[:, 2]
            if np.all(vals <= 1e-9):
                mask[y, x] = 1
    return mask


def tent_brute(z, c1, g1, g2):
    """Pointwise piecewise-linear tent evaluated with plain branches."""
    z = np.asarray(z, dtype=np.float64)
    out = np.zeros_like(z)
    it = np.nditer(z, flags=["multi_index"])
    for v in it:
        v = float(v)
        idx = it.multi_index
        if c1 - g1 <= v <= c1:
            out[idx] = 1.0 + (v - c1) / g1
        elif c1 < v <= c1 + g2:
            out[idx] = 1.0 - (v - c1) / g2
    return out
