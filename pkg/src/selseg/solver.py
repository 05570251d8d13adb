"""Relaxed two-phase solver: modified additive operator splitting.

The segmentation minimizes, over u in [0, 1],

    TV_g(u) + lambda * integral(F u) + alpha * integral(nu(u))

where F is the combined data term, g the edge-stopping weight and nu a
regularized exact penalty that pins u to [0, 1].  The gradient flow is
advanced by an additive operator splitting in which the penalty's stiff
linear part is treated semi-implicitly: with f0 = lambda*F + alpha*nu'(u)
and Bt = diag(tau*alpha*bt), where bt activates the penalty's Taylor
coefficient b near u = 0 and u = 1,

    ut      = u - tau*(I+Bt)^-1 f0
    u_next  = 1/2 * sum_axes (I - 2*tau*mu*(I+Bt)^-1 A_axis)^-1 ut

Each A_axis is the one-dimensional diffusion operator along grid lines
with diffusivity G = g(|grad z|)/|grad u|_eps1 averaged to half points,
zero-flux ends and zero row sums, so every solve is a batch of
diagonally dominant tridiagonal systems.  Negative F grows u: pixels
whose data term favors the object rise toward 1, others settle near 0,
and the converged u is thresholded at gamma.
"""

from dataclasses import dataclass

import numpy as np

from .fitting import ITERATIVE_MODELS, build_field, combine, fit_constants
from .geodesic import edge_speed, geodesic_distance, uniform_speed
from .gridops import central_gradient
from .image_io import BinaryMask
from .kernels import aos_update

DISTANCE_MODES = ("geodesic", "euclidean")


@dataclass
class SolverConfig:
    """Weights and numerical parameters of the relaxed solve.

    alpha defaults to max(lambda_tilde, lambda_tilde/2 + 0.1), the
    smallest safe penalty weight for a data term rescaled to [-1, 1].
    """

    lambda_tilde: float = 3.0
    theta: float = 3.0
    alpha: float | None = None
    tau: float = 1e-2
    eps1: float = 1e-4
    eps2: float = 1e-1
    tol: float = 1e-4
    gamma: float = 0.5
    zeta: float = 0.1
    max_iters: int = 2000
    edge_beta: float = 100.0
    mu: float = 1.0
    distance: str = "geodesic"

    def __post_init__(self):
        positive = {
            "lambda_tilde": self.lambda_tilde,
            "tau": self.tau,
            "eps1": self.eps1,
            "eps2": self.eps2,
            "tol": self.tol,
            "zeta": self.zeta,
            "edge_beta": self.edge_beta,
            "mu": self.mu,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
        if self.theta < 0:
            raise ValueError(f"theta must be non-negative, got {self.theta}")
        if self.alpha is not None and self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.distance not in DISTANCE_MODES:
            raise ValueError(
                f"distance must be one of {DISTANCE_MODES}, got {self.distance!r}"
            )

    @property
    def penalty_weight(self):
        if self.alpha is not None:
            return self.alpha
        return max(self.lambda_tilde, 0.5 * self.lambda_tilde + 0.1)


@dataclass
class SegmentationResult:
    """Converged relaxed solution, its thresholded mask and diagnostics."""

    u: np.ndarray
    mask: BinaryMask
    iterations: int
    converged: bool
    residual: float
    distance: object
    field: object
    constants: object

    def __post_init__(self):
        arr = np.ascontiguousarray(self.u, dtype=np.float64)
        arr.flags.writeable = False
        self.u = arr


def edge_weight(image, beta=100.0):
    """Edge-stopping weight g = 1/(1 + beta*|grad z|^2)."""
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    gx, gy = central_gradient(image.data)
    return 1.0 / (1.0 + beta * (gx * gx + gy * gy))


def _b_of(u, eps2):
    return np.sqrt((2.0 * u - 1.0) ** 2 + eps2) - 1.0


def _h_of(s, eps2):
    return 0.5 * (1.0 + (2.0 / np.pi) * np.arctan(s / eps2))


def penalty(u, eps2=0.1):
    """Regularized exact penalty nu(u); near zero inside [0, 1]."""
    u = np.asarray(u, dtype=np.float64)
    b = _b_of(u, eps2)
    return _h_of(b, eps2) * b


def penalty_prime(u, eps2=0.1):
    """Derivative nu'(u) by the chain rule."""
    u = np.asarray(u, dtype=np.float64)
    t = 2.0 * u - 1.0
    root = np.sqrt(t * t + eps2)
    b = root - 1.0
    bp = 2.0 * t / root
    h = _h_of(b, eps2)
    hp = eps2 / (np.pi * (eps2 * eps2 + b * b))
    return bp * (h + b * hp)


def penalty_second(u, eps2=0.1):
    """Second derivative nu''(u), the penalty's local stiffness."""
    u = np.asarray(u, dtype=np.float64)
    t = 2.0 * u - 1.0
    root = np.sqrt(t * t + eps2)
    b = root - 1.0
    bp = 2.0 * t / root
    bpp = 4.0 * eps2 / root**3
    h = _h_of(b, eps2)
    hp = eps2 / (np.pi * (eps2 * eps2 + b * b))
    hpp = -2.0 * eps2 * b / (np.pi * (eps2 * eps2 + b * b) ** 2)
    return bpp * (h + b * hp) + bp * bp * (2.0 * hp + b * hpp)


def taylor_coefficient(eps2=0.1, at=0.0):
    """Linear Taylor coefficient of nu' at a bound; equal at 0 and 1."""
    return float(penalty_second(np.float64(at), eps2))


def activation(u, zeta, eps2):
    """Banded stiffness bt: the Taylor coefficient near the bounds."""
    coeff = taylor_coefficient(eps2)
    band = ((u >= -zeta) & (u <= zeta)) | ((u >= 1.0 - zeta) & (u <= 1.0 + zeta))
    return np.where(band, coeff, 0.0)


def assemble_line_systems(G, axis):
    """Tridiagonal coefficients of the per-line diffusion operator.

    axis 0 differentiates along rows of G (vertical lines), axis 1
    along columns (horizontal lines); lines are returned as batch rows
    either way.  Half-point diffusivities are arithmetic means of the
    node values; ends are zero-flux, so every row sums to zero.
    """
    if axis == 0:
        G = G.T
    elif axis != 1:
        raise ValueError(f"axis must be 0 or 1, got {axis}")
    half = 0.5 * (G[:, 1:] + G[:, :-1])
    lower = np.zeros_like(G)
    upper = np.zeros_like(G)
    lower[:, 1:] = half
    upper[:, :-1] = half
    diag = -(lower + upper)
    return lower, diag, upper


def aos_step(u, F, g, cfg):
    """One modified additive-operator-splitting update of u."""
    return aos_update(
        u,
        F,
        g,
        cfg.lambda_tilde,
        cfg.penalty_weight,
        cfg.mu,
        cfg.tau,
        cfg.eps1,
        cfg.eps2,
        cfg.zeta,
        taylor_coefficient(cfg.eps2),
    )


def segment(image, marker_input, fitting_spec, cfg=None, distance=None):
    """Segment one object from markers; the full pipeline.

    Builds the marker distance field, fits the chosen model, then
    iterates aos_step from the marker polygon indicator until the
    relative update drops below cfg.tol or cfg.max_iters is reached.
    Models with region-dependent constants are refitted from the
    current thresholded u once per iteration.  A precomputed
    DistanceField for the same markers may be passed to skip the
    eikonal solve, e.g. across a parameter sweep.
    """
    cfg = cfg or SolverConfig()
    if marker_input.region.shape != image.shape:
        raise ValueError("marker input shape does not match image")
    z = image.data
    if distance is not None:
        if distance.values.shape != image.shape:
            raise ValueError("precomputed distance shape does not match image")
        dist = distance
    else:
        if cfg.distance == "geodesic":
            q = edge_speed(image)
        else:
            q = uniform_speed(image.shape)
        dist = geodesic_distance(q, marker_input)
    g = edge_weight(image, cfg.edge_beta)
    hb = marker_input.hard_background

    consts = fit_constants(z, fitting_spec, marker_input.region.data)
    field = combine(dist, build_field(z, fitting_spec, consts), cfg.theta, hb)

    u = marker_input.region.data.astype(np.float64)
    iterative = fitting_spec.model in ITERATIVE_MODELS
    converged = False
    residual = np.inf
    iterations = 0
    for k in range(cfg.max_iters):
        if iterative and k > 0:
            consts = fit_constants(z, fitting_spec, (u > cfg.gamma).astype(np.uint8))
            field = combine(dist, build_field(z, fitting_spec, consts), cfg.theta, hb)
        u_next = aos_step(u, field.values, g, cfg)
        denom = float(np.linalg.norm(u))
        residual = float(np.linalg.norm(u_next - u)) / denom if denom > 0 else np.inf
        u = u_next
        iterations = k + 1
        if residual < cfg.tol:
            converged = True
            break
    mask = BinaryMask((u > cfg.gamma).astype(np.uint8))
    return SegmentationResult(
        u=u,
        mask=mask,
        iterations=iterations,
        converged=converged,
        residual=residual,
        distance=dist,
        field=field,
        constants=consts,
    )
