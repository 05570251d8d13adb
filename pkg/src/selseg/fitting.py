"""Fitting fields: how strongly each pixel prefers foreground or background.

Every model produces a signed field f; negative values pull a pixel
into the object, positive values push it out.  The solver weighs f
against the geodesic marker distance D through

    r = theta * D + f,    F = r / max|r|

so all models compete on a fixed [-1, 1] scale.  Pixels scribbled as
hard background are overridden to +1 after rescaling.

Models:

    cv    piecewise-constant two-phase fit around means c1, c2
    rsf   local Gaussian-window means h1, h2 (intensity inhomogeneity)
    lcv   global fit plus a box-mean residual term
    hyb   lcv structure applied to the product image w = boxmean(z) * z
    gav   generalized power-quotient means; beta1 = beta2 = 1 gives cv
    pm    one-sided fit: quadratic around c1 against a tent-shaped
          background weight of width (gamma1, gamma2), auto-sized from
          multilevel Otsu thresholds when not given

The piecewise-constant constants of cv are fixed from the user input
(mean inside and outside the marker polygon) unless overridden; rsf,
lcv, hyb and gav re-estimate theirs from the current thresholded u
once per solver iteration.
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter, uniform_filter

MODELS = ("cv", "rsf", "lcv", "hyb", "gav", "pm")

# Models whose constants are re-estimated each outer iteration.
ITERATIVE_MODELS = frozenset({"rsf", "lcv", "hyb", "gav"})

# One histogram bin; the narrowest tent half-width and threshold step.
BIN_WIDTH = 1.0 / 256.0

DENOM_FLOOR = 1e-12

GAV_CLIP_LO = 1e-6


@dataclass
class FittingSpec:
    """Model choice plus the parameters that model consults.

    c1/c2 override the derived region means when given.  pm_gamma1 and
    pm_gamma2 default to automatic selection from Otsu thresholds.
    """

    model: str = "pm"
    lambda1: float = 1.0
    lambda2: float = 1.0
    c1: float | None = None
    c2: float | None = None
    rsf_sigma: float = 3.0
    lcv_alpha: float = 1.0
    lcv_beta: float = 1.0
    lcv_window: int = 15
    gav_beta1: float = 1.0
    gav_beta2: float = 1.0
    pm_gamma1: float | None = None
    pm_gamma2: float | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}, expected one of {MODELS}")
        if self.lambda1 <= 0 or self.lambda2 <= 0:
            raise ValueError("lambda1 and lambda2 must be positive")
        if self.rsf_sigma <= 0:
            raise ValueError("rsf_sigma must be positive")
        if self.lcv_window < 1 or self.lcv_window % 2 == 0:
            raise ValueError("lcv_window must be a positive odd integer")
        for g in (self.pm_gamma1, self.pm_gamma2):
            if g is not None and g <= 0:
                raise ValueError("tent half-widths must be positive")
        for c in (self.c1, self.c2):
            if c is not None and not 0.0 <= c <= 1.0:
                raise ValueError("c1/c2 overrides must lie in [0, 1]")


@dataclass
class IntensityConstants:
    """Per-model fitted quantities; only the relevant fields are set."""

    c1: float | None = None
    c2: float | None = None
    d1: float | None = None
    d2: float | None = None
    h1: np.ndarray | None = None
    h2: np.ndarray | None = None
    gamma1: float | None = None
    gamma2: float | None = None


@dataclass
class CombinedField:
    """Rescaled data term F in [-1, 1]; negative favors foreground."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.values, dtype=np.float64)
        arr.flags.writeable = False
        self.values = arr


def _masked_mean(values, weights):
    """Weighted mean with a floored denominator and global-mean fallback."""
    den = float(weights.sum())
    if den < DENOM_FLOOR:
        return float(values.mean())
    return float((values * weights).sum() / den)


def _box_mean(values, window):
    return uniform_filter(values, size=window, mode="reflect")


def _gauss(values, sigma):
    return gaussian_filter(values, sigma=sigma, mode="reflect", truncate=4.0)


def fit_constants(z, spec, u_gamma):
    """Estimate the model constants from a foreground indicator u_gamma.

    u_gamma is the thresholded relaxed solution (the marker polygon on
    the first call).  Explicit c1/c2 overrides in the FittingSpec
    always win.
    """
    fg = u_gamma.astype(np.float64)
    bg = 1.0 - fg
    m = spec.model
    out = IntensityConstants()
    if m in ("cv", "pm"):
        out.c1 = spec.c1 if spec.c1 is not None else _masked_mean(z, fg)
        if m == "cv":
            out.c2 = spec.c2 if spec.c2 is not None else _masked_mean(z, bg)
        else:
            g1, g2 = spec.pm_gamma1, spec.pm_gamma2
            if g1 is None or g2 is None:
                auto1, auto2 = select_gammas(out.c1, otsu_thresholds(z))
                g1 = auto1 if g1 is None else g1
                g2 = auto2 if g2 is None else g2
            out.gamma1, out.gamma2 = g1, g2
    elif m == "rsf":
        ker_fg = _gauss(fg, spec.rsf_sigma)
        ker_bg = _gauss(bg, spec.rsf_sigma)
        num_fg = _gauss(fg * z, spec.rsf_sigma)
        num_bg = _gauss(bg * z, spec.rsf_sigma)
        zbar = float(z.mean())
        out.h1 = np.where(ker_fg < DENOM_FLOOR, zbar, num_fg / np.maximum(ker_fg, DENOM_FLOOR))
        out.h2 = np.where(ker_bg < DENOM_FLOOR, zbar, num_bg / np.maximum(ker_bg, DENOM_FLOOR))
    elif m in ("lcv", "hyb"):
        base = z if m == "lcv" else _box_mean(z, spec.lcv_window) * z
        resid = _box_mean(base, spec.lcv_window) - base
        out.c1 = spec.c1 if spec.c1 is not None else _masked_mean(base, fg)
        out.c2 = spec.c2 if spec.c2 is not None else _masked_mean(base, bg)
        out.d1 = _masked_mean(resid, fg)
        out.d2 = _masked_mean(resid, bg)
    elif m == "gav":
        zt = np.clip(z, GAV_CLIP_LO, 1.0)
        out.c1 = spec.c1 if spec.c1 is not None else _power_quotient(zt, fg, spec.gav_beta1)
        out.c2 = spec.c2 if spec.c2 is not None else _power_quotient(zt, bg, spec.gav_beta2)
    return out


def _power_quotient(zt, weights, beta):
    """Power-mean quotient sum(z^b w) / sum(z^(b-1) w) with fallback."""
    num = float((zt**beta * weights).sum())
    den = float((zt ** (beta - 1.0) * weights).sum())
    if den < DENOM_FLOOR:
        num = float((zt**beta).sum())
        den = float((zt ** (beta - 1.0)).sum())
    return num / den


def tent(z, c1, gamma1, gamma2):
    """Asymmetric tent: 1 at c1, falling to 0 at c1-gamma1 and c1+gamma2."""
    left = 1.0 + (z - c1) / gamma1
    right = 1.0 - (z - c1) / gamma2
    out = np.where(z <= c1, left, right)
    return np.where((z >= c1 - gamma1) & (z <= c1 + gamma2), np.maximum(out, 0.0), 0.0)


def build_field(z, spec, constants):
    """Evaluate the signed fitting field for the given constants."""
    m = spec.model
    l1, l2 = spec.lambda1, spec.lambda2
    if m in ("cv", "gav"):
        return l1 * (z - constants.c1) ** 2 - l2 * (z - constants.c2) ** 2
    if m == "pm":
        f2 = tent(z, constants.c1, constants.gamma1, constants.gamma2)
        return l1 * (z - constants.c1) ** 2 - l2 * f2
    if m == "rsf":
        s = spec.rsf_sigma
        kz = _gauss(z, s)
        kz2 = _gauss(z * z, s)
        f1 = kz2 - 2.0 * constants.h1 * kz + constants.h1**2
        f2 = kz2 - 2.0 * constants.h2 * kz + constants.h2**2
        return l1 * f1 - l2 * f2
    if m in ("lcv", "hyb"):
        base = z if m == "lcv" else _box_mean(z, spec.lcv_window) * z
        resid = _box_mean(base, spec.lcv_window) - base
        a, b = spec.lcv_alpha, spec.lcv_beta
        f1 = a * (base - constants.c1) ** 2 + b * (resid - constants.d1) ** 2
        f2 = a * (base - constants.c2) ** 2 + b * (resid - constants.d2) ** 2
        return l1 * f1 - l2 * f2
    raise ValueError(f"unknown model {m!r}")


def combine(distance, field, theta, hard_background=None):
    """Blend distance and fitting into the rescaled data term F.

    r = theta * D + f, then F = r / max|r| (zero field stays zero).
    Hard-background pixels are forced to +1 after rescaling.
    """
    if theta < 0:
        raise ValueError(f"theta must be non-negative, got {theta}")
    r = theta * distance.values + field
    mx = float(np.abs(r).max())
    if mx > 0.0:
        r = r / mx
    if hard_background is not None:
        r = np.where(hard_background.data > 0, 1.0, r)
    return CombinedField(r)


def otsu_thresholds(values, n_classes=3):
    """Optimal multilevel thresholds over a 256-bin histogram.

    Minimizes the intra-class variance exactly by dynamic programming
    over bin cuts; ties resolve toward smaller thresholds.  Returns
    n_classes - 1 ascending values in (0, 1), each the upper edge of a
    cut bin.  Raises on fewer than two populated bins.
    """
    if n_classes < 2:
        raise ValueError("n_classes must be at least 2")
    v = np.ravel(np.asarray(values, dtype=np.float64))
    if v.size == 0:
        raise ValueError("empty input")
    if v.min() < 0.0 or v.max() > 1.0:
        raise ValueError("values must lie in [0, 1]")
    bins = np.minimum((v * 256.0).astype(np.int64), 255)
    hist = np.bincount(bins, minlength=256).astype(np.float64)
    if int((hist > 0).sum()) < 2:
        raise ValueError("no separable classes: all intensities in one bin")
    cuts = _otsu_cuts(hist, n_classes)
    return [(k + 1) * BIN_WIDTH for k in cuts]


def _class_sse(hist):
    """Within-class sum of squares for every bin range [i, j]."""
    centers = (np.arange(256) + 0.5) * BIN_WIDTH
    c0 = np.concatenate([[0.0], np.cumsum(hist)])
    c1 = np.concatenate([[0.0], np.cumsum(hist * centers)])
    c2 = np.concatenate([[0.0], np.cumsum(hist * centers * centers)])

    def sse(i, j):
        n = c0[j + 1] - c0[i]
        if n <= 0.0:
            return 0.0
        s = c1[j + 1] - c1[i]
        ss = c2[j + 1] - c2[i]
        return ss - s * s / n

    return sse


def _otsu_cuts(hist, n_classes):
    """Cut indices k (class boundary after bin k) minimizing total SSE."""
    sse = _class_sse(hist)
    nb = 256
    # best[j] = minimal SSE of splitting bins [0, j] into the current
    # number of classes; prev[j] tracks the last cut for backtracking.
    best = np.array([sse(0, j) for j in range(nb)])
    cuts_for = [[[] for _ in range(nb)]]
    for _ in range(1, n_classes):
        nxt = np.full(nb, np.inf)
        nxt_cuts = [[] for _ in range(nb)]
        for j in range(nb):
            for t in range(j):
                cand = best[t] + sse(t + 1, j)
                if cand < nxt[j]:
                    nxt[j] = cand
                    nxt_cuts[j] = cuts_for[-1][t] + [t]
        best = nxt
        cuts_for.append(nxt_cuts)
    return cuts_for[-1][nb - 1]


def select_gammas(c1, thresholds):
    """Tent half-widths from c1's position among the Otsu thresholds.

    c1 below the first threshold spans down to zero; above the last,
    up to one; otherwise the enclosing threshold pair bounds the tent.
    Each half-width is widened to at least one bin.
    """
    ts = list(thresholds)
    if not ts:
        raise ValueError("need at least one threshold")
    if sorted(ts) != ts:
        raise ValueError("thresholds must be ascending")
    if c1 <= ts[0]:
        g1, g2 = c1, ts[0] - c1
    elif c1 >= ts[-1]:
        g1, g2 = c1 - ts[-1], 1.0 - c1
    else:
        i = next(k for k in range(1, len(ts)) if ts[k - 1] <= c1 <= ts[k])
        g1, g2 = c1 - ts[i - 1], ts[i] - c1
    return max(g1, BIN_WIDTH), max(g2, BIN_WIDTH)
