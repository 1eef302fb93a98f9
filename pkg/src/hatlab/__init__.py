"""Hat-based curvature bounds for convex bodies.

Convex bodies are represented through their support functions. On top of
that representation the package provides spherical hats and hat detection,
the curvature indicator, the maximal indicator and order of curvature, the
spike perturbation used to raise that order, and classical directional
curvature estimators.
"""

from .errors import (
    DegenerateSpikeError,
    HatlabError,
    InvalidInputError,
    NumericFailure,
    PreconditionError,
)
from .bodies import (
    Ball,
    ConvexBody,
    Ellipsoid,
    HullWithPoints,
    Polytope,
    Revolution,
    Rounded,
    body_from_spec,
)
from .geometry import (
    HausdorffResult,
    hausdorff_distance,
    hull_with_point,
    minkowski_ball,
    support,
    touching_point,
)
from .hat import CapFamily, CapSpec, HatVerdict, excess, find_hat, has_hat
from .indicator import IndicatorValue, curvature_indicator, indicator_sum
from .order import AngleSequence, IndexSet, OrderResult, maximal_indicator, order_of_curvature
from .spike import raise_order, spike
from .curvature import directional_curvature, osculating_radius, point_curvature

__version__ = "0.1.0"

__all__ = [
    "AngleSequence",
    "Ball",
    "CapFamily",
    "CapSpec",
    "ConvexBody",
    "DegenerateSpikeError",
    "Ellipsoid",
    "HatVerdict",
    "HatlabError",
    "HausdorffResult",
    "HullWithPoints",
    "IndexSet",
    "IndicatorValue",
    "InvalidInputError",
    "NumericFailure",
    "OrderResult",
    "Polytope",
    "PreconditionError",
    "Revolution",
    "Rounded",
    "body_from_spec",
    "curvature_indicator",
    "directional_curvature",
    "excess",
    "find_hat",
    "has_hat",
    "hausdorff_distance",
    "hull_with_point",
    "indicator_sum",
    "maximal_indicator",
    "minkowski_ball",
    "order_of_curvature",
    "osculating_radius",
    "point_curvature",
    "raise_order",
    "spike",
    "support",
    "touching_point",
]
