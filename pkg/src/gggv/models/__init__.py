"""Built-in vehicle models: the force-constrained point mass with a
closed-form envelope and a self-contained planar double-track model."""

from .point_mass import PointMassConfig, PointMassModel
from .point_mass import recommended_harness as point_mass_harness
from .double_track import (
    AeroConfig,
    DoubleTrackConfig,
    DoubleTrackModel,
    LookupTable,
    TireParams,
    make_aero_variant,
    oversteer_preset,
    understeer_preset,
    variable_aero_tables,
)
from .double_track import recommended_harness as double_track_harness

__all__ = [
    "AeroConfig",
    "DoubleTrackConfig",
    "DoubleTrackModel",
    "LookupTable",
    "PointMassConfig",
    "PointMassModel",
    "TireParams",
    "double_track_harness",
    "make_aero_variant",
    "oversteer_preset",
    "point_mass_harness",
    "understeer_preset",
    "variable_aero_tables",
]
