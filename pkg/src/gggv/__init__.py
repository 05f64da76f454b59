"""gggv: quasi-steady-state black-box generation of g-g-g-v acceleration
envelopes for vehicle dynamics models."""

from .core import (
    G,
    ControlInput,
    GggvDiagram,
    GggvPoint,
    Observables,
    PointStatus,
    SweepGrid,
    grid_index,
    query,
)
from .errors import (
    ConfigError,
    GggvError,
    InvalidSpeedError,
    InvalidTableError,
    NoLimitFoundError,
    NonPositiveGainError,
    NotOnGridError,
    NumericalDivergenceError,
    OutOfBoundsError,
    ParseError,
    UnfeasibleError,
    UnfeasibleNeighborhoodError,
    ValidationError,
)
from .maneuver import (
    DetectedLimit,
    GainResult,
    HarnessConfig,
    HoldResult,
    LimitKind,
    RampTrace,
    detect_limit,
    external_forces,
    gain_test,
    hold_speed,
    run_point,
    run_point_with_history,
    run_ramp,
    sideslip_correct,
    steer_rate,
)
from .model import DrivenAxle, ModelDescriptor, VehicleModel, route_torque
from .models import (
    AeroConfig,
    DoubleTrackConfig,
    DoubleTrackModel,
    LookupTable,
    PointMassConfig,
    PointMassModel,
    TireParams,
    double_track_harness,
    make_aero_variant,
    oversteer_preset,
    point_mass_harness,
    understeer_preset,
    variable_aero_tables,
)
from .sweep import SweepReport, resolve_workers, run_sweep, slice_gg

__version__ = "0.1.0"

__all__ = [
    "G",
    "AeroConfig",
    "ConfigError",
    "ControlInput",
    "DetectedLimit",
    "DoubleTrackConfig",
    "DoubleTrackModel",
    "DrivenAxle",
    "GainResult",
    "GggvDiagram",
    "GggvError",
    "GggvPoint",
    "HarnessConfig",
    "HoldResult",
    "InvalidSpeedError",
    "InvalidTableError",
    "LimitKind",
    "LookupTable",
    "ModelDescriptor",
    "NoLimitFoundError",
    "NonPositiveGainError",
    "NotOnGridError",
    "NumericalDivergenceError",
    "Observables",
    "OutOfBoundsError",
    "ParseError",
    "PointMassConfig",
    "PointMassModel",
    "PointStatus",
    "RampTrace",
    "SweepGrid",
    "SweepReport",
    "TireParams",
    "UnfeasibleError",
    "UnfeasibleNeighborhoodError",
    "ValidationError",
    "VehicleModel",
    "detect_limit",
    "double_track_harness",
    "external_forces",
    "gain_test",
    "grid_index",
    "hold_speed",
    "make_aero_variant",
    "oversteer_preset",
    "point_mass_harness",
    "query",
    "resolve_workers",
    "route_torque",
    "run_point",
    "run_point_with_history",
    "run_ramp",
    "run_sweep",
    "sideslip_correct",
    "slice_gg",
    "steer_rate",
    "understeer_preset",
    "variable_aero_tables",
    "__version__",
]
