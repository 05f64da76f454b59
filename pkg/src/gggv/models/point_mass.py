"""Force-constrained point-mass model.

A point mass with a kinematic steering relation a_y = v^2 * delta / L and a
circular limit on the combined tire force: the demanded (longitudinal,
lateral) tire force vector is radially clipped to ``force_limit``.  Drag is
a constant-deceleration resistance applied outside the clipped vector, so
the achievable acceleration envelope is the circle

    a_y_max(a_x) = sqrt((F_max/m)^2 - (a_x + a_drag)^2)

which serves as the analytical oracle for the whole toolchain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from ..core import ControlInput, Observables, G
from ..errors import InvalidSpeedError, NumericalDivergenceError
from ..model import DrivenAxle, ModelDescriptor, VehicleModel


@dataclass(frozen=True)
class PointMassConfig:
    mass: float = 800.0          # [kg]
    wheelbase: float = 3.0       # [m]
    wheel_radius: float = 0.33   # [m]
    force_limit: float = 10000.0  # combined tire force envelope [N]
    drag_accel: float = 2.0      # constant-drag equivalent deceleration [m/s^2]
    max_steering: float = 0.5    # [rad]
    driven_axle: DrivenAxle = DrivenAxle.REAR
    brake_balance: float = 0.6
    # The model is algebraic and cheap to step; it declares a fine step so
    # the speed hold can run at high bandwidth, which keeps the lateral
    # acceleration glued to the force envelope while steering ramps.
    dt: float = 2.5e-4           # [s]
    speed_range: tuple[float, float] = (1.0, 150.0)

    def __post_init__(self) -> None:
        if self.mass <= 0.0 or self.wheelbase <= 0.0 or self.wheel_radius <= 0.0:
            raise ValueError("mass, wheelbase and wheel_radius must be > 0")
        if self.force_limit <= self.mass * self.drag_accel:
            raise ValueError("force_limit must exceed mass * drag_accel")

    def envelope_a_y(self, a_x: float) -> float:
        """Closed-form maximum lateral acceleration at emulated a_x [m/s^2]."""
        r = self.force_limit / self.mass
        s = a_x + self.drag_accel
        if abs(s) >= r:
            return 0.0
        return math.sqrt(r * r - s * s)


def recommended_harness(config: PointMassConfig | None = None, **overrides) -> "HarnessConfig":
    """Harness tuning matched to this model's declared step: stiff PI speed
    hold and the integrator clamp at the torque equivalent of twice the
    force envelope."""
    from ..maneuver import HarnessConfig

    c = config or PointMassConfig()
    settings: dict = {
        "pid_gains": (5.3e5, 2.6e8, 0.0),
        "torque_clamp": 2.0 * c.force_limit * c.wheel_radius,
    }
    settings.update(overrides)
    return HarnessConfig(**settings)


class _State(NamedTuple):
    v: float
    a_y: float
    a_x: float
    f_z_ext: float


class PointMassModel(VehicleModel):
    """See module docstring.  The state is (v, a_y, a_x, f_z_ext); lateral
    motion is algebraic, so a_y = v * psi_dot holds at every step by
    construction and the model can never oversteer."""

    def __init__(self, config: PointMassConfig | None = None) -> None:
        self.config = config or PointMassConfig()
        c = self.config
        self.dt_max = c.dt
        self.speed_range = c.speed_range
        self._descriptor = ModelDescriptor(
            name="point_mass",
            mass=c.mass,
            driven_axle=c.driven_axle,
            brake_balance=c.brake_balance,
            wheel_radius=c.wheel_radius,
            max_steering=c.max_steering,
        )

    @property
    def descriptor(self) -> ModelDescriptor:
        return self._descriptor

    def initialize(self, v: float) -> _State:
        lo, hi = self.speed_range
        if not (lo <= v <= hi):
            raise InvalidSpeedError(f"speed {v} outside validity range [{lo}, {hi}]")
        return _State(v, 0.0, 0.0, 0.0)

    def step(self, state: _State, control: ControlInput, dt: float) -> _State:
        if not 0.0 < dt <= self.dt_max:
            raise ValueError(f"dt must lie in (0, {self.dt_max}]")
        c = self.config
        t_sum = (
            control.wheel_torques[0]
            + control.wheel_torques[1]
            + control.wheel_torques[2]
            + control.wheel_torques[3]
        )
        if not (
            math.isfinite(t_sum)
            and math.isfinite(control.delta)
            and math.isfinite(control.f_x_ext)
            and math.isfinite(control.f_z_ext)
        ):
            raise ValueError("control input contains a non-finite value")

        v = state.v
        # Demanded tire forces; the external forces and drag are not tire
        # forces and stay outside the clip.
        f_x = t_sum / c.wheel_radius
        f_y = c.mass * v * v * control.delta / c.wheelbase
        norm = math.hypot(f_x, f_y)
        if norm > c.force_limit:
            scale = c.force_limit / norm
            f_x *= scale
            f_y *= scale
        drag = c.mass * c.drag_accel if v > 0.0 else 0.0
        a_x = (f_x - drag + control.f_x_ext) / c.mass
        v_new = v + a_x * dt
        if v_new < 0.0:
            v_new = 0.0
        if not math.isfinite(v_new):
            raise NumericalDivergenceError("speed is non-finite")
        return _State(v_new, f_y / c.mass, a_x, control.f_z_ext)

    def observe(self, state: _State) -> Observables:
        psi_dot = state.a_y / state.v if state.v > 1e-9 else 0.0
        load = 0.25 * (self.config.mass * G + state.f_z_ext)
        return Observables(
            v=state.v,
            a_x=state.a_x,
            a_y=state.a_y,
            psi_dot=psi_dot,
            beta=0.0,
            theta=0.0,
            wheel_loads=(load, load, load, load),
        )
