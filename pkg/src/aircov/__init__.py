"""Coverage planning for UAV aerial base stations."""

__version__ = "0.1.0"

from .antenna import AntennaPattern, boresight_gain, crossover_height, gain_3d, gain_circular
from .channel import (
    HIGHRISE_URBAN,
    SUBURBAN,
    Environment,
    ShadowingParams,
    elevation_angle,
    fspl,
    los_probability,
    shadowing_for_frequency,
    shadowing_stats,
)
from .coverage import (
    Deployment,
    GroundPoint,
    coverage_map,
    coverage_probability,
    coverage_probability_circular,
    mean_rss,
    q_function,
    solve_beamwidths_for_radius,
    solve_coverage_radius,
)
from .errors import AircovError, DomainError, SingularityError, UnboundedRadiusError, UnsupportedError
