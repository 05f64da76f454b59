"""Run-configuration file: JSON schema, validation and defaults.

A run configuration selects a model (with optional parameter overrides on
top of the built-in presets), the sweep grid, harness settings and output
options.  Unknown keys are rejected; validation errors name the offending
key.  ``expanded_dict`` writes the fully-defaulted configuration back out,
and re-parsing that dictionary is idempotent.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, fields, replace
from functools import partial
from pathlib import Path
from typing import Any, Callable

from .core import SweepGrid
from .errors import ParseError, ValidationError
from .maneuver import HarnessConfig
from .model import DrivenAxle, VehicleModel
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

MODEL_TYPES = ("point_mass", "double_track", "double_track_variable_aero")
FORMATS = ("csv", "json")


@dataclass(frozen=True)
class RunConfig:
    model_type: str
    model_config: PointMassConfig | DoubleTrackConfig
    grid: SweepGrid
    harness: HarnessConfig
    out_dir: Path
    formats: tuple[str, ...]
    dump_traces: bool
    workers: int | str  # count or "auto"

    def model_factory(self) -> Callable[[], VehicleModel]:
        """Picklable zero-argument factory for sweep workers."""
        cls = PointMassModel if self.model_type == "point_mass" else DoubleTrackModel
        return partial(cls, self.model_config)

    def config_hash(self) -> str:
        canonical = json.dumps(expanded_dict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def metadata(self) -> dict:
        from . import __version__

        return {
            "model": self.model_config.name
            if isinstance(self.model_config, DoubleTrackConfig)
            else "point_mass",
            "model_type": self.model_type,
            "model_config": _model_dict(self.model_type, self.model_config),
            "config_hash": self.config_hash(),
            "tool_version": __version__,
        }


def _fail(key: str, message: str) -> "ValidationError":
    return ValidationError(f"{key}: {message}")


def _check_keys(obj: dict, where: str, allowed: set[str], required: set[str] = frozenset()) -> None:
    if not isinstance(obj, dict):
        raise _fail(where, "must be an object")
    unknown = set(obj) - allowed
    if unknown:
        raise _fail(f"{where}.{sorted(unknown)[0]}", "unknown key")
    missing = required - set(obj)
    if missing:
        raise _fail(f"{where}.{sorted(missing)[0]}", "required key missing")


def _number(obj: dict, key: str, where: str, default: Any = None) -> Any:
    if key not in obj:
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise _fail(f"{where}.{key}", "must be a finite number")
    return float(value)


def _number_list(obj: dict, key: str, where: str) -> tuple[float, ...]:
    value = obj.get(key)
    if not isinstance(value, list) or not value:
        raise _fail(f"{where}.{key}", "must be a non-empty array of numbers")
    out = []
    for i, x in enumerate(value):
        if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
            raise _fail(f"{where}.{key}[{i}]", "must be a finite number")
        out.append(float(x))
    return tuple(out)


def _lookup_or_number(obj: dict, key: str, where: str, default: Any) -> float | LookupTable:
    if key not in obj:
        return default
    value = obj[key]
    if isinstance(value, dict):
        _check_keys(value, f"{where}.{key}", {"x", "y"}, {"x", "y"})
        try:
            return LookupTable(
                _number_list(value, "x", f"{where}.{key}"),
                _number_list(value, "y", f"{where}.{key}"),
            )
        except Exception as exc:
            raise _fail(f"{where}.{key}", str(exc)) from exc
    return _number(obj, key, where)


def _tire(obj: dict, key: str, where: str, default: TireParams) -> TireParams:
    if key not in obj:
        return default
    block = obj[key]
    loc = f"{where}.{key}"
    _check_keys(block, loc, {"mu", "stiffness", "shape", "load_sensitivity", "nominal_load"})
    try:
        return replace(
            default,
            mu=_number(block, "mu", loc, default.mu),
            stiffness=_number(block, "stiffness", loc, default.stiffness),
            shape=_number(block, "shape", loc, default.shape),
            load_sensitivity=_number(block, "load_sensitivity", loc, default.load_sensitivity),
            nominal_load=_number(block, "nominal_load", loc, default.nominal_load),
        )
    except ValueError as exc:
        raise _fail(loc, str(exc)) from exc


_POINT_MASS_KEYS = {
    "mass": "mass",
    "wheelbase": "wheelbase",
    "wheel_radius": "wheel_radius",
    "force_limit": "force_limit",
    "drag_accel": "drag_accel",
    "max_steering": "max_steering",
    "brake_balance": "brake_balance",
    "dt": "dt",
}

_DOUBLE_TRACK_KEYS = {
    "mass": "mass",
    "yaw_inertia": "yaw_inertia",
    "wheelbase": "wheelbase",
    "front_axle_distance": "front_axle_distance",
    "track_width": "track_width",
    "cog_height": "cog_height",
    "roll_stiffness_front_fraction": "roll_stiffness_front_fraction",
    "pitch_stiffness": "pitch_stiffness",
    "rolling_resistance": "rolling_resistance",
    "wheel_radius": "wheel_radius",
    "max_steering": "max_steering",
    "steering_lag": "steering_lag",
    "brake_balance": "brake_balance",
    "dt": "dt",
}


def _parse_model(block: Any) -> tuple[str, PointMassConfig | DoubleTrackConfig]:
    where = "model"
    if not isinstance(block, dict):
        raise _fail(where, "must be an object")
    mtype = block.get("type")
    if mtype not in MODEL_TYPES:
        raise _fail(f"{where}.type", f"must be one of {list(MODEL_TYPES)}")

    if mtype == "point_mass":
        _check_keys(block, where, set(_POINT_MASS_KEYS) | {"type", "driven_axle"}, {"type"})
        base = PointMassConfig()
        kwargs = {
            field: _number(block, key, where, getattr(base, field))
            for key, field in _POINT_MASS_KEYS.items()
        }
        if "driven_axle" in block:
            kwargs["driven_axle"] = _driven_axle(block["driven_axle"], where)
        try:
            return mtype, PointMassConfig(**kwargs)
        except ValueError as exc:
            raise _fail(where, str(exc)) from exc

    allowed = set(_DOUBLE_TRACK_KEYS) | {"type", "preset", "driven_axle", "tire_front", "tire_rear", "aero"}
    _check_keys(block, where, allowed, {"type"})
    preset_name = block.get("preset", "understeer")
    if preset_name not in ("understeer", "oversteer"):
        raise _fail(f"{where}.preset", "must be 'understeer' or 'oversteer'")
    base = understeer_preset() if preset_name == "understeer" else oversteer_preset()

    kwargs: dict[str, Any] = {
        field: _number(block, key, where, getattr(base, field))
        for key, field in _DOUBLE_TRACK_KEYS.items()
    }
    if "driven_axle" in block:
        kwargs["driven_axle"] = _driven_axle(block["driven_axle"], where)
    kwargs["tire_front"] = _tire(block, "tire_front", where, base.tire_front)
    kwargs["tire_rear"] = _tire(block, "tire_rear", where, base.tire_rear)

    aero = base.aero
    if "aero" in block:
        loc = f"{where}.aero"
        _check_keys(
            block["aero"], loc,
            {"frontal_area", "air_density", "drag_coeff", "lift_coeff", "balance"},
        )
        aero = AeroConfig(
            frontal_area=_number(block["aero"], "frontal_area", loc, aero.frontal_area),
            air_density=_number(block["aero"], "air_density", loc, aero.air_density),
            drag_coeff=_number(block["aero"], "drag_coeff", loc, aero.drag_coeff),
            lift_coeff=_lookup_or_number(block["aero"], "lift_coeff", loc, aero.lift_coeff),
            balance=_lookup_or_number(block["aero"], "balance", loc, aero.balance),
        )
    kwargs["aero"] = aero

    try:
        config = replace(base, **kwargs)
    except ValueError as exc:
        raise _fail(where, str(exc)) from exc

    if mtype == "double_track_variable_aero":
        cl_default, balance_default = variable_aero_tables()
        cl = config.aero.lift_coeff if isinstance(config.aero.lift_coeff, LookupTable) else cl_default
        bal = config.aero.balance if isinstance(config.aero.balance, LookupTable) else balance_default
        config = make_aero_variant(config, cl, bal)
    return mtype, config


def _driven_axle(value: Any, where: str) -> DrivenAxle:
    names = {a.value: a for a in DrivenAxle}
    if value not in names:
        raise _fail(f"{where}.driven_axle", f"must be one of {sorted(names)}")
    return names[value]


def _parse_grid(block: Any) -> SweepGrid:
    where = "grid"
    _check_keys(
        block, where,
        {"speeds", "vertical_accels", "longitudinal_accels"},
        {"speeds", "vertical_accels", "longitudinal_accels"},
    )
    values = {key: _number_list(block, key, where) for key in
              ("speeds", "vertical_accels", "longitudinal_accels")}
    try:
        return SweepGrid(**values)
    except ValueError as exc:
        raise _fail(f"{where}.{str(exc).split()[0]}", str(exc)) from exc


_HARNESS_SCALARS = (
    "target_jerk", "gain_test_step", "oversteer_threshold", "speed_tolerance",
    "settle_window", "settle_timeout", "ramp_timeout", "peak_confirm_drop",
    "torque_clamp", "torque_settle_band", "lateral_settle_band",
    "pid_derivative_filter",
)


def _parse_harness(block: Any, mtype: str, model_config) -> HarnessConfig:
    where = "harness"
    if mtype == "point_mass":
        defaults = point_mass_harness(model_config)
    else:
        defaults = double_track_harness(model_config)
    if block is None:
        return defaults
    allowed = set(_HARNESS_SCALARS) | {"steer_rate_bounds", "pid_gains", "trace_decimation"}
    _check_keys(block, where, allowed)
    kwargs: dict[str, Any] = {}
    for key in _HARNESS_SCALARS:
        if key in block:
            if key == "torque_clamp" and block[key] is None:
                kwargs[key] = None  # null: derive the clamp from the model
            else:
                kwargs[key] = _number(block, key, where)
    if "steer_rate_bounds" in block:
        bounds = _number_list(block, "steer_rate_bounds", where)
        if len(bounds) != 2:
            raise _fail(f"{where}.steer_rate_bounds", "must have exactly 2 entries")
        kwargs["steer_rate_bounds"] = bounds
    if "pid_gains" in block:
        gains = _number_list(block, "pid_gains", where)
        if len(gains) != 3:
            raise _fail(f"{where}.pid_gains", "must have exactly 3 entries")
        kwargs["pid_gains"] = gains
    if "trace_decimation" in block:
        dec = block["trace_decimation"]
        if isinstance(dec, bool) or not isinstance(dec, int) or dec < 1:
            raise _fail(f"{where}.trace_decimation", "must be a positive integer")
        kwargs["trace_decimation"] = dec
    try:
        return replace(defaults, **kwargs)
    except ValueError as exc:
        raise _fail(where, str(exc)) from exc


def _parse_output(block: Any) -> tuple[Path, tuple[str, ...], bool]:
    out_dir = Path("out")
    formats: tuple[str, ...] = ("csv", "json")
    dump = False
    if block is None:
        return out_dir, formats, dump
    where = "output"
    _check_keys(block, where, {"out_dir", "formats", "dump_traces"})
    if "out_dir" in block:
        if not isinstance(block["out_dir"], str) or not block["out_dir"]:
            raise _fail(f"{where}.out_dir", "must be a non-empty string")
        out_dir = Path(block["out_dir"])
    if "formats" in block:
        value = block["formats"]
        if not isinstance(value, list) or not value or any(f not in FORMATS for f in value):
            raise _fail(f"{where}.formats", f"must be a non-empty array drawn from {list(FORMATS)}")
        formats = tuple(dict.fromkeys(value))
    if "dump_traces" in block:
        if not isinstance(block["dump_traces"], bool):
            raise _fail(f"{where}.dump_traces", "must be a boolean")
        dump = block["dump_traces"]
    return out_dir, formats, dump


def _parse_workers(value: Any) -> int | str:
    if value is None:
        return "auto"
    if value == "auto":
        return "auto"
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise _fail("workers", "must be a positive integer or 'auto'")
    return value


def parse_config_dict(doc: Any) -> RunConfig:
    if not isinstance(doc, dict):
        raise ValidationError("top level: must be an object")
    _check_keys(doc, "config", {"model", "grid", "harness", "output", "workers"}, {"model", "grid"})
    mtype, model_config = _parse_model(doc["model"])
    grid = _parse_grid(doc["grid"])
    harness = _parse_harness(doc.get("harness"), mtype, model_config)
    out_dir, formats, dump = _parse_output(doc.get("output"))
    workers = _parse_workers(doc.get("workers"))
    return RunConfig(
        model_type=mtype,
        model_config=model_config,
        grid=grid,
        harness=harness,
        out_dir=out_dir,
        formats=formats,
        dump_traces=dump,
        workers=workers,
    )


def parse_config(path: str | Path) -> RunConfig:
    """Parse and validate a JSON run configuration file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    return parse_config_dict(doc)


def _aero_value(value: float | LookupTable):
    if isinstance(value, LookupTable):
        return {"x": list(value.x), "y": list(value.y)}
    return value


def _model_dict(mtype: str, config) -> dict:
    if mtype == "point_mass":
        return {
            "type": mtype,
            "mass": config.mass,
            "wheelbase": config.wheelbase,
            "wheel_radius": config.wheel_radius,
            "force_limit": config.force_limit,
            "drag_accel": config.drag_accel,
            "max_steering": config.max_steering,
            "brake_balance": config.brake_balance,
            "driven_axle": config.driven_axle.value,
            "dt": config.dt,
        }
    out = {"type": mtype}
    for key, field in _DOUBLE_TRACK_KEYS.items():
        out[key] = getattr(config, field)
    out["driven_axle"] = config.driven_axle.value
    for side in ("tire_front", "tire_rear"):
        t: TireParams = getattr(config, side)
        out[side] = {
            "mu": t.mu,
            "stiffness": t.stiffness,
            "shape": t.shape,
            "load_sensitivity": t.load_sensitivity,
            "nominal_load": t.nominal_load,
        }
    aero = config.aero
    out["aero"] = {
        "frontal_area": aero.frontal_area,
        "air_density": aero.air_density,
        "drag_coeff": aero.drag_coeff,
        "lift_coeff": _aero_value(aero.lift_coeff),
        "balance": _aero_value(aero.balance),
    }
    return out


def expanded_dict(rc: RunConfig) -> dict:
    """The fully-defaulted configuration as a plain JSON-compatible dict.
    Re-parsing it reproduces the same RunConfig."""
    h = rc.harness
    return {
        "model": _model_dict(rc.model_type, rc.model_config),
        "grid": {
            "speeds": list(rc.grid.speeds),
            "vertical_accels": list(rc.grid.vertical_accels),
            "longitudinal_accels": list(rc.grid.longitudinal_accels),
        },
        "harness": {
            "target_jerk": h.target_jerk,
            "gain_test_step": h.gain_test_step,
            "oversteer_threshold": h.oversteer_threshold,
            "speed_tolerance": h.speed_tolerance,
            "settle_window": h.settle_window,
            "settle_timeout": h.settle_timeout,
            "ramp_timeout": h.ramp_timeout,
            "steer_rate_bounds": list(h.steer_rate_bounds),
            "pid_gains": list(h.pid_gains),
            "peak_confirm_drop": h.peak_confirm_drop,
            "torque_clamp": h.torque_clamp,
            "trace_decimation": h.trace_decimation,
            "torque_settle_band": h.torque_settle_band,
            "lateral_settle_band": h.lateral_settle_band,
            "pid_derivative_filter": h.pid_derivative_filter,
        },
        "output": {
            "out_dir": str(rc.out_dir),
            "formats": list(rc.formats),
            "dump_traces": rc.dump_traces,
        },
        "workers": rc.workers,
    }
