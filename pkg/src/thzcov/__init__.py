"""Coverage analysis and simulation of indoor THz downlinks with blockage and FTR fading."""

from .analysis import (
    CoverageModel,
    CoverageResult,
    GainDistribution,
    ap_hit_prob,
    conditional_coverage,
    coverage_probability,
    gain_distribution,
    laplace_in_derivatives,
    nearest_los_cdf,
    nearest_los_pdf,
    ue_hit_prob,
    ue_horizontal_hit_prob,
    void_probability,
)
from .channel import AntennaParams, SystemParams, lobe_gains, los_probability, path_gain
from .config import DEFAULTS, PLACEMENTS, Scenario, default_scenario, resolve_params
from .geometry import RoomGeometry, arc_angle, intersection_counts, segment_angles
from .montecarlo import SimConfig, simulate_coverage, simulate_distance_pdf, simulate_hitting
from .specfun import FtrParams, SeriesControl, ftr_cdf, ftr_pdf, ftr_weights

__version__ = "0.1.0"
