"""Selective segmentation with geodesic marker distance and convex relaxation.

The package segments a single connected region of interest from a grayscale
image given a handful of interior marker points.  A geodesic distance field
ties the result to the marked region, an intensity fitting model supplies the
data force, and a convex penalty keeps the relaxed label function near {0, 1}.

Typical use:

    >>> from selseg import GrayImage, MarkerInput, FittingSpec, segment
    >>> image = load_image("cells.png")
    >>> marks = MarkerInput.from_points([(40, 60), (52, 58), (47, 71)],
    ...                                 image.height, image.width)
    >>> result = segment(image, marks, FittingSpec(model="pm"))
    >>> result.mask.pixels.sum()
"""

from .fitting import (
    FittingSpec,
    IntensityConstants,
    CombinedField,
    MODELS,
    build_field,
    combine,
    fit_constants,
    otsu_thresholds,
    select_gammas,
    tent,
)
from .geodesic import (
    DistanceField,
    MarkerInput,
    edge_speed,
    fill_polygon,
    geodesic_distance,
    uniform_speed,
)
from .harness import (
    Fixture,
    HeatmapReport,
    RobustnessReport,
    SweepGrid,
    default_grid,
    make_fixture,
    randomize_markers,
    robustness_study,
    sweep,
    write_heatmap_csv,
    write_heatmap_json,
    write_heatmap_png,
    write_robustness_csv,
    write_robustness_json,
)
from .image_io import (
    BinaryMask,
    GrayImage,
    load_image,
    load_mask,
    normalize,
    save_image,
    save_mask,
)
from .metrics import AccuracyScore, tanimoto, tc_color
from .solver import (
    SegmentationResult,
    SolverConfig,
    aos_step,
    edge_weight,
    penalty,
    penalty_prime,
    segment,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyScore",
    "BinaryMask",
    "CombinedField",
    "DistanceField",
    "FittingSpec",
    "Fixture",
    "GrayImage",
    "HeatmapReport",
    "IntensityConstants",
    "MODELS",
    "MarkerInput",
    "RobustnessReport",
    "SegmentationResult",
    "SolverConfig",
    "SweepGrid",
    "aos_step",
    "build_field",
    "combine",
    "default_grid",
    "edge_speed",
    "edge_weight",
    "fill_polygon",
    "fit_constants",
    "geodesic_distance",
    "load_image",
    "load_mask",
    "make_fixture",
    "normalize",
    "otsu_thresholds",
    "penalty",
    "penalty_prime",
    "randomize_markers",
    "robustness_study",
    "save_image",
    "save_mask",
    "segment",
    "select_gammas",
    "sweep",
    "tanimoto",
    "tc_color",
    "tent",
    "uniform_speed",
    "write_heatmap_csv",
    "write_heatmap_json",
    "write_heatmap_png",
    "write_robustness_csv",
    "write_robustness_json",
]
