"""Evaluation harness: synthetic fixtures, parameter sweeps, robustness.

The fixtures stress selectivity: can the solver take one of two
equally plausible objects and leave the other?  The sweep scores a
(lambda, theta) grid by Tanimoto overlap against ground truth and the
robustness study repeats one configuration over random marker
placements.  All randomness flows through seeded PCG64 generators and
reports serialize deterministically, so repeated runs are
byte-identical.
"""

import json
from dataclasses import dataclass, replace

import numpy as np
from PIL import Image

from .fitting import FittingSpec
from .geodesic import MarkerInput, edge_speed, geodesic_distance, uniform_speed
from .image_io import BinaryMask, GrayImage
from .metrics import tanimoto, tc_color
from .solver import SolverConfig, segment

FIXTURE_KINDS = ("two-equal", "contrast", "noisy-two-equal")

NOISE_SIGMA = 0.05
_NOISE_SEED = 2020

# Sweep axes: a fine unit-step block then a coarse tail, both axes.
_GRID_VALUES = tuple(range(1, 11)) + tuple(range(15, 51, 5))


@dataclass
class Fixture:
    """Synthetic test case: image, ground truth, default markers."""

    name: str
    image: GrayImage
    ground_truth: BinaryMask
    markers: tuple


@dataclass
class SweepGrid:
    """Cartesian (lambda, theta) grid for the sweep."""

    lambda_values: tuple = _GRID_VALUES
    theta_values: tuple = _GRID_VALUES

    def __post_init__(self):
        self.lambda_values = tuple(float(v) for v in self.lambda_values)
        self.theta_values = tuple(float(v) for v in self.theta_values)
        for vals in (self.lambda_values, self.theta_values):
            if not vals:
                raise ValueError("grid axes must be non-empty")
            if any(v <= 0 for v in vals):
                raise ValueError("grid values must be positive")


@dataclass
class HeatmapReport:
    """Per-cell TC scores over a sweep grid plus the best cell."""

    fixture_name: str
    model: str
    grid: SweepGrid
    tc: np.ndarray
    iterations: np.ndarray
    converged: np.ndarray
    best: tuple

    def fraction_at_least(self, threshold):
        return float((self.tc >= threshold).mean())


@dataclass
class RobustnessReport:
    """Scores over randomized marker trials with Tukey outlier fences."""

    fixture_name: str
    model: str
    seed: int
    marker_sets: tuple
    tc: np.ndarray
    q1: float
    q3: float
    lo_fence: float
    hi_fence: float
    outliers: tuple

    @property
    def median(self):
        return float(np.median(self.tc))

    @property
    def non_outlier_min(self):
        keep = np.ones(len(self.tc), dtype=bool)
        keep[list(self.outliers)] = False
        return float(self.tc[keep].min())


def _disc(shape, center, radius):
    ys, xs = np.mgrid[0 : shape[0], 0 : shape[1]]
    return (xs - center[0]) ** 2 + (ys - center[1]) ** 2 <= radius**2


def make_fixture(kind, size=128):
    """Build one of the named synthetic fixtures at the given size.

    two-equal: two discs of intensity 0.5 on black; ground truth is
    the left disc, so only the markers break the tie.  contrast: the
    target disc is brighter (0.75) than the other content (0.49).
    noisy-two-equal adds clipped Gaussian noise with a fixed seed.
    """
    if kind not in FIXTURE_KINDS:
        raise ValueError(f"unknown fixture {kind!r}, expected one of {FIXTURE_KINDS}")
    if size < 32:
        raise ValueError("fixture size must be at least 32")
    shape = (size, size)
    radius = int(round(size * 0.17))
    lc = (int(round(size * 0.28)), size // 2)
    rc = (int(round(size * 0.72)), size // 2)
    left = _disc(shape, lc, radius)
    right = _disc(shape, rc, radius)
    if kind == "contrast":
        img = np.where(left, 0.75, np.where(right, 0.49, 0.0))
    else:
        img = np.where(left | right, 0.5, 0.0)
    if kind == "noisy-two-equal":
        rng = np.random.default_rng(_NOISE_SEED)
        img = np.clip(img + rng.normal(0.0, NOISE_SIGMA, shape), 0.0, 1.0)
    third = max(radius // 3, 2)
    markers = (
        (lc[0] - third, lc[1] - third // 2 - 2),
        (lc[0] + third, lc[1] - third // 2 - 2),
        (lc[0], lc[1] + third + 1),
    )
    return Fixture(
        name=kind,
        image=GrayImage(img),
        ground_truth=BinaryMask(left.astype(np.uint8)),
        markers=markers,
    )


def default_grid():
    return SweepGrid()


def sweep(fixture, fitting_spec, base_config=None, grid=None, markers=None):
    """Score every (lambda, theta) cell of the grid by Tanimoto overlap.

    The marker distance field depends on neither axis, so it is solved
    once and shared.  The best cell is the maximal TC; exact ties
    resolve to the smallest (lambda, theta) pair, independent of the
    order the axes list their values.
    """
    base_config = base_config or SolverConfig()
    grid = grid or default_grid()
    markers = tuple(markers if markers is not None else fixture.markers)
    h, w = fixture.image.shape
    mi = MarkerInput.from_points(markers, h, w)
    if base_config.distance == "geodesic":
        q = edge_speed(fixture.image)
    else:
        q = uniform_speed(fixture.image.shape)
    dist = geodesic_distance(q, mi)

    nl, nt = len(grid.lambda_values), len(grid.theta_values)
    tc = np.zeros((nl, nt))
    iters = np.zeros((nl, nt), dtype=np.int64)
    conv = np.zeros((nl, nt), dtype=bool)
    for i, lam in enumerate(grid.lambda_values):
        for j, theta in enumerate(grid.theta_values):
            cfg = replace(base_config, lambda_tilde=lam, theta=theta)
            res = segment(fixture.image, mi, fitting_spec, cfg, distance=dist)
            tc[i, j] = tanimoto(res.mask, fixture.ground_truth).tc
            iters[i, j] = res.iterations
            conv[i, j] = res.converged
    best = _best_cell(grid, tc)
    return HeatmapReport(
        fixture_name=fixture.name,
        model=fitting_spec.model,
        grid=grid,
        tc=tc,
        iterations=iters,
        converged=conv,
        best=best,
    )


def _best_cell(grid, tc):
    """Argmax TC; ties take the smallest (lambda, theta) values."""
    best = None
    for i, lam in enumerate(grid.lambda_values):
        for j, theta in enumerate(grid.theta_values):
            key = (-tc[i, j], lam, theta)
            if best is None or key < best[0]:
                best = (key, (lam, theta, float(tc[i, j])))
    return best[1]


def randomize_markers(ground_truth, count=3, seed=None, rng=None):
    """Draw distinct marker pixels uniformly from the true object.

    Sampling is without replacement over the ground-truth pixels in
    row-major order, driven by a PCG64 generator.  Pass either a seed
    or an existing generator.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    ys, xs = np.nonzero(ground_truth.data)
    if len(ys) < count:
        raise ValueError(f"ground truth has fewer than {count} pixels")
    picks = rng.choice(len(ys), size=count, replace=False)
    return tuple((int(xs[k]), int(ys[k])) for k in picks)


def robustness_study(
    fixture, fitting_spec, base_config=None, trials=100, seed=0, marker_count=3
):
    """Repeat one configuration over seeded random marker placements.

    Returns per-trial TC scores with Tukey 1.5*IQR outlier fences;
    quartiles use linear interpolation.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    base_config = base_config or SolverConfig()
    rng = np.random.default_rng(seed)
    h, w = fixture.image.shape
    if base_config.distance == "geodesic":
        q = edge_speed(fixture.image)
    else:
        q = uniform_speed(fixture.image.shape)

    marker_sets = []
    scores = np.zeros(trials)
    for t in range(trials):
        markers = randomize_markers(fixture.ground_truth, marker_count, rng=rng)
        marker_sets.append(markers)
        mi = MarkerInput.from_points(markers, h, w)
        dist = geodesic_distance(q, mi)
        res = segment(fixture.image, mi, fitting_spec, base_config, distance=dist)
        scores[t] = tanimoto(res.mask, fixture.ground_truth).tc
    q1, q3 = np.percentile(scores, [25.0, 75.0])
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    outliers = tuple(int(i) for i in np.nonzero((scores < lo) | (scores > hi))[0])
    return RobustnessReport(
        fixture_name=fixture.name,
        model=fitting_spec.model,
        seed=seed,
        marker_sets=tuple(marker_sets),
        tc=scores,
        q1=float(q1),
        q3=float(q3),
        lo_fence=float(lo),
        hi_fence=float(hi),
        outliers=outliers,
    )


def write_heatmap_csv(report, path):
    """One row per grid cell: lambda,theta,tc,iterations,converged."""
    lines = ["lambda,theta,tc,iterations,converged"]
    for i, lam in enumerate(report.grid.lambda_values):
        for j, theta in enumerate(report.grid.theta_values):
            lines.append(
                f"{lam!r},{theta!r},{report.tc[i, j]!r},"
                f"{int(report.iterations[i, j])},{int(report.converged[i, j])}"
            )
    _write_text(path, "\n".join(lines) + "\n")


def write_heatmap_json(report, path):
    doc = {
        "fixture": report.fixture_name,
        "model": report.model,
        "lambda_values": list(report.grid.lambda_values),
        "theta_values": list(report.grid.theta_values),
        "tc": [[float(v) for v in row] for row in report.tc],
        "best": {
            "lambda": report.best[0],
            "theta": report.best[1],
            "tc": report.best[2],
        },
    }
    _write_json(path, doc)


def write_heatmap_png(report, path, cell=16):
    """Color raster of the grid, one tc_color block per cell.

    Rows run over lambda values top to bottom, columns over theta.
    """
    nl, nt = report.tc.shape
    img = np.zeros((nl, nt, 3), dtype=np.uint8)
    for i in range(nl):
        for j in range(nt):
            img[i, j] = tc_color(float(report.tc[i, j]))
    img = np.repeat(np.repeat(img, cell, axis=0), cell, axis=1)
    Image.fromarray(img, mode="RGB").save(path, format="PNG")


def write_robustness_csv(report, path):
    """One row per trial: the marker coordinates then the score."""
    count = len(report.marker_sets[0])
    cols = ",".join(f"x{k + 1},y{k + 1}" for k in range(count))
    lines = [f"trial,{cols},tc"]
    for t, (markers, tc) in enumerate(zip(report.marker_sets, report.tc)):
        flat = ",".join(f"{x},{y}" for x, y in markers)
        lines.append(f"{t},{flat},{tc!r}")
    _write_text(path, "\n".join(lines) + "\n")


def write_robustness_json(report, path):
    doc = {
        "fixture": report.fixture_name,
        "model": report.model,
        "seed": report.seed,
        "trials": len(report.tc),
        "median": report.median,
        "q1": report.q1,
        "q3": report.q3,
        "lo_fence": report.lo_fence,
        "hi_fence": report.hi_fence,
        "outliers": list(report.outliers),
        "non_outlier_min": report.non_outlier_min,
        "tc": [float(v) for v in report.tc],
    }
    _write_json(path, doc)


def _write_text(path, text):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)


def _write_json(path, doc):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
