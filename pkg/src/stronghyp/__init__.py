"""Hyperbolicity constants, strong hyperbolicity and Green metrics on finite spaces, the hyperbolic plane and free groups."""

import warnings

# numba probes for TBB on import of parallel kernels; the fallback layer is fine
warnings.filterwarnings("ignore", message=".*TBB threading layer.*")

__version__ = "0.1.0"

from .constants import eb_constants_from_strong, eps_from_EB, strong_bolicity_R  # noqa: E402
from .errors import (ConvergenceError, InvariantViolation, MetricValidationError,  # noqa: E402
                     ParseError, ResourceCapError, UnsupportedModelError)
from .fourpoint import (DefectSample, HyperbolicityReport, analyze, check_EB,  # noqa: E402
                        defect_statistics, delta_four_point, delta_product, eps_star,
                        is_ptolemaic_visual, is_strongly_hyperbolic)
from .freegroup import FreeGroupWord, WalkMeasure, enumerate_ball, reduce, word_dist  # noqa: E402
from .spaces import (FiniteMetricSpace, RoughGeodesicPath, gromov_product, load_space,  # noqa: E402
                     verify_rough_geodesic)

__all__ = [
    "ConvergenceError", "DefectSample", "FiniteMetricSpace", "FreeGroupWord", "HyperbolicityReport",
    "InvariantViolation", "MetricValidationError", "ParseError", "ResourceCapError", "RoughGeodesicPath",
    "UnsupportedModelError", "WalkMeasure", "analyze", "check_EB", "defect_statistics", "delta_four_point",
    "delta_product", "eb_constants_from_strong", "enumerate_ball", "eps_from_EB", "eps_star", "gromov_product",
    "is_ptolemaic_visual", "is_strongly_hyperbolic", "load_space", "reduce", "strong_bolicity_R",
    "verify_rough_geodesic", "word_dist",
]
