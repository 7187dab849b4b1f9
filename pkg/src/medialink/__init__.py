"""Medial and skeletal linking structures for 2D multi-region scenes."""

from .geometry import (
    BoundaryCurve,
    BoundingRegion,
    Configuration,
    build_bounding,
    convex_hull,
    distance_sq,
    height_function,
    sample_boundary,
)
from .medial import (
    DoubledMedial,
    MedialGraph,
    MedialParams,
    build_double,
    check_skeletal_conditions,
    classify_strata,
    compute_medial_axis,
    radial_curvature,
)

__all__ = [
    "BoundaryCurve",
    "BoundingRegion",
    "Configuration",
    "DoubledMedial",
    "MedialGraph",
    "MedialParams",
    "build_bounding",
    "build_double",
    "check_skeletal_conditions",
    "classify_strata",
    "compute_medial_axis",
    "convex_hull",
    "distance_sq",
    "height_function",
    "radial_curvature",
    "sample_boundary",
]

__version__ = "0.1.0"
