"""Spreading speeds and stationary states for a road-field reaction-diffusion system.

A line (the road, density u) diffuses with coefficient D, is transported at
speed q and exchanges individuals with the half-plane above it (the field,
density v) through ``-d v_y = mu u - nu v``.
"""

from .dispersion import (BracketError, CriticalSpeed, LimitConstants, critical_speed, intersects,
                         limit_constants, limit_h, limit_k, threshold_margin, threshold_predicts_ck,
                         threshold_predicts_ck_mortality)
from .geometry import plot_geometry
from .model import (Diagnostics, FieldReaction, ModelParams, RoadReaction, kpp_speed,
                    validate_field_reaction, validate_road_reaction)
from .simulator import (FrontSeries, GridSpec, SimState, SimulationError, estimate_speed,
                        front_position, level_sensitivity, profile_error, run, step)
from .stationary import (StationaryError, StationaryProfile, check_bounds, find_Ustar, shoot,
                         stationary_mortality)

__version__ = "0.1.0"

__all__ = [
    "BracketError", "CriticalSpeed", "LimitConstants", "critical_speed", "intersects",
    "limit_constants", "limit_h", "limit_k", "threshold_margin", "threshold_predicts_ck",
    "threshold_predicts_ck_mortality", "plot_geometry", "Diagnostics", "FieldReaction",
    "ModelParams", "RoadReaction", "kpp_speed", "validate_field_reaction", "validate_road_reaction",
    "FrontSeries", "GridSpec", "SimState", "SimulationError", "estimate_speed", "front_position", "level_sensitivity",
    "profile_error", "run", "step", "StationaryError", "StationaryProfile", "check_bounds",
    "find_Ustar", "shoot", "stationary_mortality",
]
