"""Simulation laboratory for chordal and strip SLE(kappa;rho) processes."""

from .loewner import (
    Curve,
    DrivingPath,
    Geometry,
    Swallowed,
    TracePath,
    capacity,
    chordal_forward_map,
    chordal_inverse_map,
    chordal_trace,
    elementary_slit_map,
    strip_forward_map,
    strip_inverse_map,
    strip_trace,
)
from .sde import (
    ForceSpec,
    ForcePointTrajectory,
    SleConfig,
    SwallowReport,
    detect_swallowing,
    sample_chordal_driving,
    sample_strip_driving,
)
from .hulls import (
    HullExtent,
    box_counting_dimension,
    crosscut_endpoints,
    hull_boundary,
    hull_extent,
    left_right_boundaries,
    swallowing_time,
)
from .density import DensitySpec, theoretical_endpoint_density
from .stats import ExperimentReport, ks_statistic
from .experiments import (
    density_experiment,
    dimension_experiment,
    duality_boundary_experiment,
    limit_classification_experiment,
    mixture_experiment,
    scaling_invariance_test,
)

__version__ = "0.1.0"
