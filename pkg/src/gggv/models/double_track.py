"""Self-contained planar double-track model.

Four wheels with simplified magic-formula lateral tires and friction-ellipse
combined-slip scaling, quasi-static vertical load transfer (algebraic, no
suspension ODEs), aerodynamic drag/downforce with optional speed-dependent
lift and pitch-dependent balance, and a first-order steering actuator lag.

Longitudinal tire forces come from the demanded wheel torques (force at the
contact patch, saturated by the friction ellipse); there are no wheel-spin
ODEs, so an over-demanded torque simply saturates.

Sign conventions: x forward, y left, yaw positive counter-clockwise.
Pitch angle theta is nose-down positive, so braking gives theta > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

from ..core import ControlInput, Observables, G
from ..errors import InvalidSpeedError, InvalidTableError, NumericalDivergenceError
from ..model import DrivenAxle, ModelDescriptor, VehicleModel

# Fixed-point iterations of the load/tire-force solve per step.  Loads and
# forces are mutually coupled; the iteration is warm-started from the
# previous step, so three passes converge far below integrator resolution.
_LOAD_ITERATIONS = 3


@dataclass(frozen=True)
class LookupTable:
    """One-dimensional look-up: strictly increasing abscissa, >= 2 knots,
    linear interpolation, clamped extrapolation."""

    x: tuple[float, ...]
    y: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))
        if len(self.x) < 2 or len(self.x) != len(self.y):
            raise InvalidTableError("table needs >= 2 (x, y) knots of equal length")
        for a, b in zip(self.x, self.x[1:]):
            if not (math.isfinite(a) and math.isfinite(b)) or b <= a:
                raise InvalidTableError("table abscissa must be finite and strictly increasing")
        if not all(math.isfinite(v) for v in self.y):
            raise InvalidTableError("table values must be finite")

    def __call__(self, q: float) -> float:
        xs, ys = self.x, self.y
        if q <= xs[0]:
            return ys[0]
        if q >= xs[-1]:
            return ys[-1]
        for i in range(len(xs) - 1):
            if q <= xs[i + 1]:
                t = (q - xs[i]) / (xs[i + 1] - xs[i])
                return ys[i] + (ys[i + 1] - ys[i]) * t
        return ys[-1]


def _as_lookup(value: float | LookupTable) -> "LookupTable | None":
    return value if isinstance(value, LookupTable) else None


@dataclass(frozen=True)
class TireParams:
    """Per-axle pure-slip lateral tire curve F = mu_eff * F_z * sin(C * atan(B * alpha)).

    ``load_sensitivity`` scales the peak friction linearly with load:
    mu_eff = mu * (1 - load_sensitivity * (F_z - nominal_load) / nominal_load).
    Zero sensitivity makes lateral capability exactly proportional to load.
    """

    mu: float                 # peak friction coefficient at nominal load
    stiffness: float = 12.0   # B
    shape: float = 1.55       # C (> 1 gives a true force peak)
    load_sensitivity: float = 0.05
    nominal_load: float = 2200.0  # [N]

    def __post_init__(self) -> None:
        if self.mu <= 0.0 or self.stiffness <= 0.0 or self.shape <= 0.0:
            raise ValueError("mu, stiffness and shape must be > 0")
        if self.nominal_load <= 0.0:
            raise ValueError("nominal_load must be > 0")


@dataclass(frozen=True)
class AeroConfig:
    frontal_area: float = 1.2    # [m^2]
    air_density: float = 1.225   # [kg/m^3]
    drag_coeff: float = 0.9
    lift_coeff: float | LookupTable = 3.0      # downforce positive; constant or f(v)
    balance: float | LookupTable = 0.45        # front downforce fraction; constant or f(theta)


@dataclass(frozen=True)
class DoubleTrackConfig:
    name: str = "double_track"
    mass: float = 800.0               # [kg]
    yaw_inertia: float = 1000.0       # [kg m^2]
    wheelbase: float = 3.0            # [m]
    front_axle_distance: float = 1.6  # CoG to front axle [m]
    track_width: float = 1.6          # [m]
    cog_height: float = 0.32          # [m]
    roll_stiffness_front_fraction: float = 0.55
    pitch_stiffness: float = 1.2e5    # [N m / rad]
    tire_front: TireParams = TireParams(mu=1.55, nominal_load=2200.0)
    tire_rear: TireParams = TireParams(mu=1.70, nominal_load=2600.0)
    aero: AeroConfig = AeroConfig()
    rolling_resistance: float = 0.012
    wheel_radius: float = 0.33        # [m]
    max_steering: float = 0.45        # [rad]
    steering_lag: float = 0.02        # actuator time constant [s]
    driven_axle: DrivenAxle = DrivenAxle.REAR
    brake_balance: float = 0.58       # front fraction
    dt: float = 1e-3                  # [s]
    speed_range: tuple[float, float] = (1.0, 120.0)

    def __post_init__(self) -> None:
        if not 0.0 < self.front_axle_distance < self.wheelbase:
            raise ValueError("front_axle_distance must lie strictly inside the wheelbase")
        if self.mass <= 0.0 or self.yaw_inertia <= 0.0:
            raise ValueError("mass and yaw_inertia must be > 0")
        if self.track_width <= 0.0 or self.cog_height < 0.0:
            raise ValueError("track_width must be > 0 and cog_height >= 0")
        if not 0.0 <= self.roll_stiffness_front_fraction <= 1.0:
            raise ValueError("roll_stiffness_front_fraction must lie in [0, 1]")
        if self.pitch_stiffness <= 0.0:
            raise ValueError("pitch_stiffness must be > 0")
        if self.steering_lag < self.dt:
            raise ValueError("steering_lag must be >= dt")


def make_aero_variant(
    base: DoubleTrackConfig,
    c_l_table: LookupTable,
    balance_table: LookupTable,
) -> DoubleTrackConfig:
    """Return ``base`` with the constant aero coefficients replaced by a
    speed-dependent lift table and a pitch-dependent balance table."""
    if not isinstance(c_l_table, LookupTable) or not isinstance(balance_table, LookupTable):
        raise InvalidTableError("aero variant tables must be LookupTable instances")
    aero = replace(base.aero, lift_coeff=c_l_table, balance=balance_table)
    return replace(base, name=base.name + "_variable_aero", aero=aero)


def variable_aero_tables() -> tuple[LookupTable, LookupTable]:
    """Default variable-aero tables: lift grows with speed, balance moves
    forward as the car pitches forward (nose-down, theta > 0)."""
    c_l = LookupTable(x=(0.0, 20.0, 35.0, 50.0, 70.0), y=(2.4, 2.7, 3.0, 3.6, 4.3))
    balance = LookupTable(x=(-0.025, 0.0, 0.02, 0.05), y=(0.42, 0.45, 0.51, 0.54))
    return c_l, balance


def recommended_harness(config: DoubleTrackConfig | None = None, **overrides) -> "HarnessConfig":
    """Harness tuning for the double-track presets: PI speed hold sized for
    the 1 kHz step and the integrator clamp at twice the tire-limited
    driving torque (2 * mu * m * g * r_w)."""
    from ..maneuver import HarnessConfig

    c = config or understeer_preset()
    mu = max(c.tire_front.mu, c.tire_rear.mu)
    settings: dict = {
        "pid_gains": (1.0e5, 4.0e6, 0.0),
        "torque_clamp": 2.0 * mu * c.mass * G * c.wheel_radius,
    }
    settings.update(overrides)
    return HarnessConfig(**settings)


def understeer_preset() -> DoubleTrackConfig:
    """Baseline race-car setup whose front axle saturates first."""
    return DoubleTrackConfig()


def oversteer_preset() -> DoubleTrackConfig:
    """Same car with the grip balance flipped so the rear axle lets go first."""
    return DoubleTrackConfig(
        name="double_track_oversteer",
        tire_front=TireParams(mu=1.70, nominal_load=2200.0),
        tire_rear=TireParams(mu=1.45, nominal_load=2600.0),
    )


class _State(NamedTuple):
    vx: float
    vy: float
    yaw_rate: float
    delta_act: float
    a_x: float
    a_y: float
    theta: float
    loads: tuple[float, float, float, float]
    sum_fx: float  # body-frame tire force sums, warm start for the load solve
    sum_fy: float


class DoubleTrackModel(VehicleModel):
    def __init__(self, config: DoubleTrackConfig | None = None) -> None:
        self.config = config or understeer_preset()
        c = self.config
        self.dt_max = c.dt
        self.speed_range = c.speed_range
        self._descriptor = ModelDescriptor(
            name=c.name,
            mass=c.mass,
            driven_axle=c.driven_axle,
            brake_balance=c.brake_balance,
            wheel_radius=c.wheel_radius,
            max_steering=c.max_steering,
        )
        # Per-wheel constants in FL, FR, RL, RR order.
        half_w = 0.5 * c.track_width
        l_r = c.wheelbase - c.front_axle_distance
        self._wheel_x = (c.front_axle_distance, c.front_axle_distance, -l_r, -l_r)
        self._wheel_y = (half_w, -half_w, half_w, -half_w)
        self._front_static = l_r / c.wheelbase
        self._cl_table = _as_lookup(c.aero.lift_coeff)
        self._balance_table = _as_lookup(c.aero.balance)

    @property
    def descriptor(self) -> ModelDescriptor:
        return self._descriptor

    def initialize(self, v: float) -> _State:
        lo, hi = self.speed_range
        if not (lo <= v <= hi):
            raise InvalidSpeedError(f"speed {v} outside validity range [{lo}, {hi}]")
        loads = self._solve_loads(v, 0.0, 0.0, 0.0, 0.0)
        return _State(v, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, loads, 0.0, 0.0)

    def _downforce(self, v: float) -> float:
        c = self.config.aero
        cl = self._cl_table(v) if self._cl_table is not None else c.lift_coeff
        return 0.5 * c.air_density * c.frontal_area * cl * v * v

    def _balance(self, theta: float) -> float:
        if self._balance_table is not None:
            return self._balance_table(theta)
        return self.config.aero.balance  # type: ignore[return-value]

    def _solve_loads(
        self, v: float, sum_fx: float, sum_fy: float, f_z_ext: float, theta: float
    ) -> tuple[float, float, float, float]:
        """Quasi-static vertical loads for given body-frame tire force sums.

        Conserves sum(F_z) = m*g + downforce + f_z_ext exactly: the carried
        weight is split per axle, transfers only move load between axles
        and sides.
        """
        c = self.config
        weight = c.mass * G + f_z_ext
        down = self._downforce(v)
        ab = self._balance(theta)
        base_f = weight * self._front_static + ab * down
        base_r = weight * (1.0 - self._front_static) + (1.0 - ab) * down
        d_long = sum_fx * c.cog_height / c.wheelbase
        f_zf = base_f - d_long
        f_zr = base_r + d_long
        d_lat = sum_fy * c.cog_height / c.track_width
        rsf = c.roll_stiffness_front_fraction
        return (
            0.5 * f_zf - rsf * d_lat,
            0.5 * f_zf + rsf * d_lat,
            0.5 * f_zr - (1.0 - rsf) * d_lat,
            0.5 * f_zr + (1.0 - rsf) * d_lat,
        )

    def step(self, state: _State, control: ControlInput, dt: float) -> _State:
        if not 0.0 < dt <= self.dt_max:
            raise ValueError(f"dt must lie in (0, {self.dt_max}]")
        c = self.config
        torques = control.wheel_torques
        t_sum = torques[0] + torques[1] + torques[2] + torques[3]
        if not (
            math.isfinite(t_sum)
            and math.isfinite(control.delta)
            and math.isfinite(control.f_x_ext)
            and math.isfinite(control.f_z_ext)
        ):
            raise ValueError("control input contains a non-finite value")

        vx, vy, r = state.vx, state.vy, state.yaw_rate
        # First-order steering actuator.
        delta = state.delta_act + (control.delta - state.delta_act) * dt / c.steering_lag

        speed = math.hypot(vx, vy)
        wx, wy = self._wheel_x, self._wheel_y
        tf, tr = c.tire_front, c.tire_rear
        inv_rw = 1.0 / c.wheel_radius

        # Per-step tire quantities that do not depend on the vertical loads:
        # slip angles and the normalized pure-slip lateral factor.
        lat_factor = [0.0, 0.0, 0.0, 0.0]
        fx_demand = [0.0, 0.0, 0.0, 0.0]
        for i in range(4):
            tire = tf if i < 2 else tr
            steer = delta if i < 2 else 0.0
            alpha = steer - math.atan2(vy + wx[i] * r, vx - wy[i] * r)
            lat_factor[i] = math.sin(tire.shape * math.atan(tire.stiffness * alpha))
            fx_demand[i] = torques[i] * inv_rw

        # Loads and clipped tire forces are mutually coupled: iterate from
        # the previous step's force sums.
        sum_fx, sum_fy = state.sum_fx, state.sum_fy
        cos_d = math.cos(delta)
        sin_d = math.sin(delta)
        loads = state.loads
        m_z = 0.0
        theta = state.theta
        for _ in range(_LOAD_ITERATIONS):
            theta = -sum_fx * c.cog_height / c.pitch_stiffness
            loads = self._solve_loads(speed, sum_fx, sum_fy, control.f_z_ext, theta)
            sum_fx = 0.0
            sum_fy = 0.0
            m_z = 0.0
            for i in range(4):
                tire = tf if i < 2 else tr
                f_z = loads[i]
                if f_z <= 0.0:
                    continue  # lifted wheel carries no force
                mu_eff = tire.mu * (
                    1.0 - tire.load_sensitivity * (f_z - tire.nominal_load) / tire.nominal_load
                )
                if mu_eff <= 0.0:
                    continue
                cap = mu_eff * f_z
                f_x = fx_demand[i]
                if f_x > cap:
                    f_x = cap
                elif f_x < -cap:
                    f_x = -cap
                frac = f_x / cap
                f_y = cap * lat_factor[i] * math.sqrt(max(0.0, 1.0 - frac * frac))
                if i < 2:
                    fxb = f_x * cos_d - f_y * sin_d
                    fyb = f_x * sin_d + f_y * cos_d
                else:
                    fxb = f_x
                    fyb = f_y
                sum_fx += fxb
                sum_fy += fyb
                m_z += wx[i] * fyb - wy[i] * fxb

        # Aerodynamic drag plus rolling resistance oppose the velocity vector.
        aero = c.aero
        drag = 0.5 * aero.air_density * aero.frontal_area * aero.drag_coeff * speed * speed
        carried = loads[0] + loads[1] + loads[2] + loads[3]
        resist = drag + c.rolling_resistance * max(0.0, carried)
        if speed > 1e-9:
            res_x = resist * vx / speed
            res_y = resist * vy / speed
        else:
            res_x = res_y = 0.0

        a_x = (sum_fx - res_x + control.f_x_ext) / c.mass
        a_y = (sum_fy - res_y) / c.mass
        vx_new = vx + (a_x + r * vy) * dt
        vy_new = vy + (a_y - r * vx) * dt
        r_new = r + m_z / c.yaw_inertia * dt
        if not (math.isfinite(vx_new) and math.isfinite(vy_new) and math.isfinite(r_new)):
            raise NumericalDivergenceError("planar state is non-finite")
        return _State(vx_new, vy_new, r_new, delta, a_x, a_y, theta, loads, sum_fx, sum_fy)

    def observe(self, state: _State) -> Observables:
        return Observables(
            v=math.hypot(state.vx, state.vy),
            a_x=state.a_x,
            a_y=state.a_y,
            psi_dot=state.yaw_rate,
            beta=math.atan2(state.vy, state.vx),
            theta=state.theta,
            wheel_loads=state.loads,
        )
