"""Marker geometry and the geodesic marker-distance field.

User clicks give a small set of pixel coordinates.  Three or more
markers span a filled convex polygon P; one or two markers degrade to
the marker pixels themselves.  The distance field solves the eikonal
equation |grad D| = q with D = 0 on P, where the speed-reciprocal field

    q = eps_d + beta_g * |grad z|^2

is small in flat image regions and spikes at edges, so level sets of D
hug object boundaries.  With q identically one the same machinery
returns the normalized Euclidean distance instead.  Fields are
normalized to max 1 so they compose with fitting terms on a fixed
scale.
"""

from dataclasses import dataclass, field

import numpy as np

from .gridops import central_gradient
from .image_io import BinaryMask
from .kernels import BIG, solve_eikonal

EPS_D = 1e-3
BETA_G = 1000.0

# Chebyshev-1 neighborhood with Euclidean step lengths.
_SQRT2 = float(np.sqrt(2.0))
_NEIGHBORS = (
    (-1, -1, _SQRT2),
    (-1, 0, 1.0),
    (-1, 1, _SQRT2),
    (0, -1, 1.0),
    (0, 1, 1.0),
    (1, -1, _SQRT2),
    (1, 0, 1.0),
    (1, 1, _SQRT2),
)


def _check_points(points, height, width, label):
    out = []
    for p in points:
        if len(p) != 2:
            raise ValueError(f"{label} must be (x, y) pairs, got {p!r}")
        x, y = int(p[0]), int(p[1])
        if not (0 <= x < width and 0 <= y < height):
            raise ValueError(
                f"{label} point ({x}, {y}) outside {width}x{height} image"
            )
        out.append((x, y))
    return tuple(out)


def _convex_hull(points):
    """Andrew's monotone chain on integer points, counterclockwise."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        # All input points collinear.
        return [pts[0], pts[-1]]
    return hull


def _raster_segment(mask, p0, p1):
    """Bresenham line from p0 to p1, endpoints included."""
    x0, y0 = p0
    x1, y1 = p1
    dx = abs(x1 - x0)
    dy = abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx - dy
    while True:
        mask[y0, x0] = 1
        if x0 == x1 and y0 == y1:
            break
        e2 = 2 * err
        if e2 > -dy:
            err -= dy
            x0 += sx
        if e2 < dx:
            err += dx
            y0 += sy


def fill_polygon(markers, height, width):
    """Rasterize the convex hull of marker points to a BinaryMask.

    Three or more non-collinear markers give the filled hull including
    its boundary pixels; collinear markers give the rasterized segment
    between the extremes; one or two markers give the marker pixels.
    """
    pts = _check_points(markers, height, width, "marker")
    if not pts:
        raise ValueError("at least one marker required")
    mask = np.zeros((height, width), dtype=np.uint8)
    if len(set(pts)) <= 2:
        for x, y in pts:
            mask[y, x] = 1
        return BinaryMask(mask)
    hull = _convex_hull(pts)
    if len(hull) == 2:
        _raster_segment(mask, hull[0], hull[1])
        return BinaryMask(mask)
    xs = np.arange(width, dtype=np.float64)[None, :]
    ys = np.arange(height, dtype=np.float64)[:, None]
    inside = np.ones((height, width), dtype=bool)
    for (x0, y0), (x1, y1) in zip(hull, hull[1:] + hull[:1]):
        inside &= (x1 - x0) * (ys - y0) - (y1 - y0) * (xs - x0) >= 0.0
    mask[inside] = 1
    return BinaryMask(mask)


@dataclass
class MarkerInput:
    """Markers plus the derived seed region P and optional exclusions.

    region holds the filled marker polygon; hard_background marks
    pixels the user scribbled out, which the solver must keep out of
    the final mask.  The two must be disjoint.
    """

    markers: tuple
    region: BinaryMask
    hard_background: BinaryMask | None = None

    def __post_init__(self):
        h, w = self.region.shape
        self.markers = _check_points(self.markers, h, w, "marker")
        if not self.markers:
            raise ValueError("at least one marker required")
        if self.region.data.sum() == 0:
            raise ValueError("marker region is empty")
        if self.hard_background is not None:
            if self.hard_background.shape != self.region.shape:
                raise ValueError("hard background shape mismatch")
            if np.any(self.region.data & self.hard_background.data):
                raise ValueError("markers and hard background overlap")

    @classmethod
    def from_points(cls, markers, height, width, hard_background=None):
        """Build from click coordinates; hard_background is a point list."""
        region = fill_polygon(markers, height, width)
        hb = None
        if hard_background:
            pts = _check_points(hard_background, height, width, "hard background")
            arr = np.zeros((height, width), dtype=np.uint8)
            for x, y in pts:
                arr[y, x] = 1
            hb = BinaryMask(arr)
        return cls(markers=tuple(markers), region=region, hard_background=hb)


@dataclass
class DistanceField:
    """Normalized distance-from-markers field in [0, 1], zero on P."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.values, dtype=np.float64)
        arr.flags.writeable = False
        self.values = arr


def edge_speed(image, eps_d=EPS_D, beta_g=BETA_G):
    """Eikonal right-hand side q = eps_d + beta_g * |grad z|^2."""
    if eps_d <= 0.0:
        raise ValueError(f"eps_d must be positive, got {eps_d}")
    gx, gy = central_gradient(image.data)
    return eps_d + beta_g * (gx * gx + gy * gy)


def uniform_speed(shape):
    """q identically one: the Euclidean special case."""
    return np.ones(shape, dtype=np.float64)


def _seed_distances(region, q):
    """Initial distances: 0 on P, near-exact values one ring out.

    The 8-neighbors of P are seeded with the step length times the mean
    of the endpoint q values.  This removes the first-ring corner error
    of the upwind scheme, which is largest for point-like P.
    """
    dist = np.full(region.shape, BIG, dtype=np.float64)
    src = region.astype(bool)
    dist[src] = 0.0
    h, w = region.shape
    for di, dj, step in _NEIGHBORS:
        # Pixel n picks up cost from a source at n + (di, dj).
        nr = slice(max(0, -di), h - max(0, di))
        sr = slice(max(0, di), h + min(0, di))
        nc = slice(max(0, -dj), w - max(0, dj))
        sc = slice(max(0, dj), w + min(0, dj))
        qbar = 0.5 * (q[sr, sc] + q[nr, nc]) * step
        cand = np.where(src[sr, sc], qbar, BIG)
        dist[nr, nc] = np.minimum(dist[nr, nc], cand)
    return dist


def geodesic_distance(q, marker_input):
    """Solve |grad D| = q with D = 0 on the marker region, then normalize.

    Returns a DistanceField with values in [0, 1]; the maximum is 1
    unless the region covers the whole grid, in which case D is zero
    everywhere.
    """
    q = np.asarray(q, dtype=np.float64)
    if q.shape != marker_input.region.shape:
        raise ValueError("speed field and marker region shapes differ")
    if q.min() <= 0.0:
        raise ValueError("speed field q must be strictly positive")
    seed = _seed_distances(marker_input.region.data, q)
    dist = solve_eikonal(seed, q)
    mx = float(dist.max())
    if mx >= 0.5 * BIG:
        raise RuntimeError("eikonal solve left unreached pixels")
    if mx == 0.0:
        return DistanceField(np.zeros_like(dist))
    return DistanceField(dist / mx)
