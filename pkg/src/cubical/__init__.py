"""Dyadic cubical covers and multiscale representations of sets in R^n."""
from .dyadic import (
    DyadicCube,
    CubicalCover,
    CubicalBoundary,
    boundary_area,
    build_cover,
    concentric_3c,
    cover_boundary,
    cover_volume,
    cube_containing,
    tilings_3n,
)
from .errors import CubicalError, PreconditionError, ToleranceError, UnsupportedShapeError
from .shapes import (
    Ball,
    BallUnion,
    BoundaryOf,
    DenseUnitCube,
    Disk,
    Implicit,
    PointCloud,
    Polygon,
    Polyline,
    cube_intersects,
    distance_to,
    exact_measures,
    sample_boundary,
)

__version__ = "0.1.0"
