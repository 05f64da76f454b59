"""Quasi-steady-state ramp-steer harness.

For one (v, a_z, a_x) operating point the harness

1. applies virtual external forces at the CoG that emulate the tire loads
   of the requested longitudinal and vertical accelerations while a PID
   wheel-torque controller holds the speed constant,
2. measures the lateral acceleration gain with a small steering step and
   scales the steering ramp rate so the lateral acceleration rises at a
   fixed, slow target rate,
3. ramps the steering open-loop until either the lateral acceleration
   peaks (front-axle saturation) or the yaw rate departs from the
   steady-state relation a_y = v * psi_dot (rear-axle saturation, open-loop
   instability), and
4. rotates the detected maximum into the velocity frame via the sideslip
   angle.

The harness sees the model only through initialize/step/observe.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple

from .core import G, ControlInput, GggvPoint, Observables, PointStatus
from .errors import NoLimitFoundError, NonPositiveGainError, UnfeasibleError
from .model import ModelDescriptor, VehicleModel, route_torque

# Cadence (in recorded samples) of the in-ramp peak checks; pure evaluation
# granularity, not a physical parameter.
_PEAK_CHECK_EVERY = 25


@dataclass(frozen=True)
class HarnessConfig:
    """Tuning of the QSS harness.  Defaults follow the built-in presets;
    all values are plain SI."""

    target_jerk: float = 1.0              # lateral acceleration ramp rate [m/s^3]
    gain_test_step: float = 0.005         # steering step for the gain test [rad]
    oversteer_threshold: float = 0.3      # trigger on |a_y - v*psi_dot| [m/s^2]
    speed_tolerance: float = 0.01         # [m/s]
    settle_window: float = 0.5            # [s]
    settle_timeout: float = 10.0          # [s]
    ramp_timeout: float = 60.0            # [s]
    steer_rate_bounds: tuple[float, float] = (1e-4, 0.5)  # [rad/s]
    pid_gains: tuple[float, float, float] = (8.0e4, 4.0e6, 4.0e3)  # N*m per (m/s, m, m/s^2)
    peak_confirm_drop: float = 0.002      # relative a_y drop confirming a peak
    torque_clamp: float | None = None     # integrator clamp [N*m]; None: 2*m*g*r_w
    trace_decimation: int = 10            # record every n-th step
    torque_settle_band: float = 2.0       # max torque spread over the window [N*m]
    lateral_settle_band: float = 0.02     # max a_y spread over the window [m/s^2]
    pid_derivative_filter: float = 0.008  # first-order filter on the D term [s]

    def __post_init__(self) -> None:
        if min(
            self.target_jerk,
            self.gain_test_step,
            self.oversteer_threshold,
            self.speed_tolerance,
            self.settle_window,
            self.settle_timeout,
            self.ramp_timeout,
            self.peak_confirm_drop,
            self.torque_settle_band,
            self.lateral_settle_band,
        ) <= 0.0:
            raise ValueError("harness parameters must be positive")
        lo, hi = self.steer_rate_bounds
        if not 0.0 < lo < hi:
            raise ValueError("steer_rate_bounds must satisfy 0 < min < max")
        if self.trace_decimation < 1:
            raise ValueError("trace_decimation must be >= 1")


class RampTrace:
    """Uniformly decimated recording of one steering maneuver."""

    __slots__ = ("t", "delta", "obs", "torque")

    def __init__(
        self,
        t: tuple[float, ...],
        delta: tuple[float, ...],
        obs: tuple[Observables, ...],
        torque: tuple[float, ...],
    ) -> None:
        if not len(t) == len(delta) == len(obs) == len(torque):
            raise ValueError("trace columns must have equal length")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError("trace times must be strictly increasing")
        self.t = t
        self.delta = delta
        self.obs = obs
        self.torque = torque

    def __len__(self) -> int:
        return len(self.t)

    @property
    def a_y(self) -> tuple[float, ...]:
        return tuple(o.a_y for o in self.obs)


class LimitKind(Enum):
    UNDERSTEER_PEAK = "understeer_peak"
    OVERSTEER_ONSET = "oversteer_onset"


class DetectedLimit(NamedTuple):
    a_y_max: float
    beta: float
    kind: LimitKind


class HoldResult(NamedTuple):
    state: object
    torque: float  # steady holding torque [N*m]


class GainResult(NamedTuple):
    kappa: float   # lateral acceleration gain [(m/s^2)/rad]
    state: object
    torque: float


def external_forces(mass: float, a_x: float, a_z: float) -> tuple[float, float]:
    """Virtual CoG forces emulating the load state of (a_x, a_z) at
    constant speed: F_x_ext = -m*a_x, F_z_ext = m*(a_z - g)."""
    if mass <= 0.0 or not (math.isfinite(a_x) and math.isfinite(a_z)):
        raise ValueError("mass must be > 0 and accelerations finite")
    return (-mass * a_x, mass * (a_z - G))


def steer_rate(kappa: float, cfg: HarnessConfig) -> float:
    """Steering rate that ramps lateral acceleration at the target jerk,
    clamped to the configured bounds."""
    if kappa <= 0.0:
        raise ValueError("kappa must be > 0")
    lo, hi = cfg.steer_rate_bounds
    return min(max(cfg.target_jerk / kappa, lo), hi)


def sideslip_correct(a_y_max: float, a_x: float, beta: float) -> float:
    """Rotate the vehicle-frame maximum into the velocity frame:
    a_y_corr = a_y_max*cos(beta) - a_x*sin(beta)."""
    if not (math.isfinite(a_y_max) and math.isfinite(a_x) and math.isfinite(beta)):
        raise ValueError("inputs must be finite")
    if abs(beta) >= 0.5 * math.pi:
        raise ValueError("|beta| must be < pi/2")
    return a_y_max * math.cos(beta) - a_x * math.sin(beta)


class _SpeedPid:
    """PID on the speed error producing a net wheel-torque demand.
    Anti-windup by clamping the integral term; the derivative acts on a
    first-order-filtered error rate to avoid step-to-step chatter."""

    __slots__ = ("kp", "ki", "kd", "d_filter", "clamp", "integral", "deriv", "prev_err")

    def __init__(
        self,
        gains: tuple[float, float, float],
        clamp: float,
        d_filter: float,
        seed: float = 0.0,
    ) -> None:
        self.kp, self.ki, self.kd = gains
        self.d_filter = d_filter
        self.clamp = clamp
        self.integral = min(max(seed, -clamp), clamp)
        self.deriv = 0.0
        self.prev_err: float | None = None

    def update(self, err: float, dt: float) -> float:
        i = self.integral + self.ki * err * dt
        if i > self.clamp:
            i = self.clamp
        elif i < -self.clamp:
            i = -self.clamp
        self.integral = i
        if self.prev_err is not None:
            raw = (err - self.prev_err) / dt
            alpha = dt / max(self.d_filter, dt)
            self.deriv += (raw - self.deriv) * alpha
        self.prev_err = err
        return self.kp * err + i + self.kd * self.deriv


class _Session:
    """One maneuver: a model instance, its applied external forces and a
    persistent speed controller shared across the hold, gain-test and ramp
    phases."""

    def __init__(
        self,
        model: VehicleModel,
        state: object,
        v_target: float,
        forces: tuple[float, float],
        cfg: HarnessConfig,
        hold_torque: float = 0.0,
        record_history: bool = False,
    ) -> None:
        self.model = model
        self.desc: ModelDescriptor = model.descriptor
        self.cfg = cfg
        self.dt = model.dt_max
        self.v_target = v_target
        self.f_x_ext, self.f_z_ext = forces
        clamp = cfg.torque_clamp
        if clamp is None:
            clamp = 2.0 * self.desc.mass * G * self.desc.wheel_radius
        self.pid = _SpeedPid(cfg.pid_gains, clamp, cfg.pid_derivative_filter, seed=hold_torque)
        self.state = state
        self.obs = model.observe(state)
        self.delta = 0.0
        self.torque = hold_torque
        self.steps = 0
        self.window_steps = max(2, round(cfg.settle_window / self.dt))
        self.settle_check_every = max(1, self.window_steps // 20)
        self.history: list[tuple[float, float, Observables, float]] | None = (
            [(0.0, 0.0, self.obs, hold_torque)] if record_history else None
        )

    def _step_once(self) -> None:
        dt = self.dt
        self.torque = self.pid.update(self.v_target - self.obs.v, dt)
        control = ControlInput(
            self.delta,
            route_torque(self.desc, self.torque),
            self.f_x_ext,
            self.f_z_ext,
        )
        self.state = self.model.step(self.state, control, dt)
        self.obs = self.model.observe(self.state)
        self.steps += 1
        if self.history is not None and self.steps % self.cfg.trace_decimation == 0:
            self.history.append((self.steps * dt, self.delta, self.obs, self.torque))

    def hold(self) -> None:
        """Run the speed controller until the speed stays within tolerance
        and the torque command is quiescent over a full settle window."""
        cfg = self.cfg
        tol = cfg.speed_tolerance
        vt = self.v_target
        window: deque[tuple[float, float]] = deque(maxlen=self.window_steps)
        max_steps = round(cfg.settle_timeout / self.dt)
        for k in range(max_steps):
            self._step_once()
            window.append((self.obs.v, self.torque))
            if len(window) == self.window_steps and (k + 1) % self.settle_check_every == 0:
                t_lo = t_hi = window[0][1]
                ok = True
                for v, tq in window:
                    if abs(v - vt) > tol:
                        ok = False
                        break
                    if tq < t_lo:
                        t_lo = tq
                    elif tq > t_hi:
                        t_hi = tq
                if ok and t_hi - t_lo <= cfg.torque_settle_band:
                    return
        raise UnfeasibleError(
            f"speed not settled at {vt} m/s within {cfg.settle_timeout} s "
            f"(a_x emulation {-self.f_x_ext / self.desc.mass:+.3f} m/s^2)"
        )

    def settle_lateral(self, what: str) -> None:
        """Wait until a_y is quiescent over a settle window while the speed
        stays within tolerance."""
        cfg = self.cfg
        tol = cfg.speed_tolerance
        vt = self.v_target
        window: deque[tuple[float, float]] = deque(maxlen=self.window_steps)
        max_steps = round(cfg.settle_timeout / self.dt)
        for k in range(max_steps):
            self._step_once()
            window.append((self.obs.v, self.obs.a_y))
            if len(window) == self.window_steps and (k + 1) % self.settle_check_every == 0:
                a_lo = a_hi = window[0][1]
                ok = True
                for v, ay in window:
                    if abs(v - vt) > tol:
                        ok = False
                        break
                    if ay < a_lo:
                        a_lo = ay
                    elif ay > a_hi:
                        a_hi = ay
                if ok and a_hi - a_lo <= cfg.lateral_settle_band:
                    return
        raise UnfeasibleError(f"lateral response not settled during {what}")

    def _require_quasi_steady(self, what: str) -> None:
        """A settled state must satisfy the steady-state relation
        a_y = v*psi_dot; a settled violation means the car converged to a
        non-steady attractor (e.g. a drift equilibrium) and the operating
        point cannot be probed quasi-statically."""
        gap = abs(self.obs.a_y - self.v_target * self.obs.psi_dot)
        if gap > self.cfg.oversteer_threshold:
            raise UnfeasibleError(
                f"settled state after {what} is not quasi-steady "
                f"(|a_y - v*psi_dot| = {gap:.3f} m/s^2)"
            )

    def gain_test(self) -> float:
        """Steering step, settle, measure kappa, step back, settle."""
        cfg = self.cfg
        a_y0 = self.obs.a_y
        self.delta = cfg.gain_test_step
        self.settle_lateral("gain test step")
        self._require_quasi_steady("gain test step")
        d_ay = self.obs.a_y - a_y0
        if d_ay <= 0.0:
            raise NonPositiveGainError(
                f"steering step {cfg.gain_test_step} rad produced d_a_y = {d_ay:.3e} m/s^2"
            )
        kappa = d_ay / cfg.gain_test_step
        self.delta = 0.0
        self.settle_lateral("gain test return")
        self._require_quasi_steady("gain test return")
        return kappa

    def ramp(self, delta_dot: float) -> RampTrace:
        """Open-loop steering ramp at delta_dot with the speed hold active.

        Terminates on a confirmed lateral-acceleration peak, on the
        oversteer trigger, at the steering limit, at the ramp timeout, or
        when the speed hold degrades beyond 5x the speed tolerance (the
        samples past that point would not be quasi-steady).
        """
        cfg = self.cfg
        dt = self.dt
        dec = cfg.trace_decimation
        vt = self.v_target
        delta_max = self.desc.max_steering
        speed_break = 5.0 * cfg.speed_tolerance
        max_steps = round(cfg.ramp_timeout / dt)

        ts = [0.0]
        deltas = [self.delta]
        obs_list = [self.obs]
        torques = [self.torque]
        ays = [self.obs.a_y]

        step = 0
        while step < max_steps:
            step += 1
            t = step * dt
            self.delta = min(delta_dot * t, delta_max)
            self._step_once()
            if step % dec:
                continue
            ob = self.obs
            ts.append(t)
            deltas.append(self.delta)
            obs_list.append(ob)
            torques.append(self.torque)
            ays.append(ob.a_y)
            if abs(ob.a_y - vt * ob.psi_dot) > cfg.oversteer_threshold:
                break
            if abs(ob.v - vt) > speed_break:
                break
            if self.delta >= delta_max:
                break
            if len(ts) % _PEAK_CHECK_EVERY == 0:
                j, confirmed = _understeer_peak(ts, ays, cfg)
                if confirmed:
                    break
        return RampTrace(tuple(ts), tuple(deltas), tuple(obs_list), tuple(torques))


# Plateau confirmation internals: the stagnant tail must span this many
# settle windows, with an a_y spread below this fraction of the drop band.
_PLATEAU_WINDOWS = 4.0
_PLATEAU_SPREAD = 0.2


def _understeer_peak(ts: list, ays: list, cfg: HarnessConfig) -> tuple[int, bool]:
    """Locate the global a_y maximum and decide whether it is a confirmed
    understeer peak.

    Primary confirmation is a subsequent relative drop of at least
    ``peak_confirm_drop`` below the maximum (a genuine force peak).  A
    hard-saturated envelope never drops, so a strict plateau also counts:
    the trace tail stagnates (spread a small fraction of the drop band)
    over several settle windows while staying within the drop band of the
    maximum.  A trace still rising at its end confirms nothing: while the
    ramp makes headway, its rise over the plateau window dwarfs the
    allowed spread.
    """
    n = len(ays)
    a_max = ays[0]
    j = 0
    for i in range(1, n):
        if ays[i] > a_max:
            a_max = ays[i]
            j = i
    if a_max <= 0.0:
        return j, False
    band = a_max * (1.0 - cfg.peak_confirm_drop)
    for k in range(j + 1, n):
        if ays[k] <= band:
            return j, True
    window = _PLATEAU_WINDOWS * cfg.settle_window
    if ts[-1] - ts[0] >= window:
        i0 = n - 1
        while i0 > 0 and ts[-1] - ts[i0 - 1] <= window:
            i0 -= 1
        lo = hi = ays[i0]
        for k in range(i0 + 1, n):
            a = ays[k]
            if a < lo:
                lo = a
            elif a > hi:
                hi = a
        if hi - lo <= _PLATEAU_SPREAD * cfg.peak_confirm_drop * a_max and lo >= band:
            return j, True
    return j, False


def detect_limit(trace: RampTrace, v: float, cfg: HarnessConfig) -> DetectedLimit:
    """Classify a ramp trace.

    Oversteer onset: the first sample with |a_y - v*psi_dot| above the
    threshold; the last stable sample's a_y and beta are reported.
    Otherwise a confirmed understeer peak (see _understeer_peak).  Raises
    NoLimitFoundError if the trace ends without either.
    """
    if len(trace) == 0:
        raise ValueError("empty trace")
    obs = trace.obs
    for i, ob in enumerate(obs):
        if abs(ob.a_y - v * ob.psi_dot) > cfg.oversteer_threshold:
            last = obs[max(i - 1, 0)]
            return DetectedLimit(last.a_y, last.beta, LimitKind.OVERSTEER_ONSET)
    ays = [ob.a_y for ob in obs]
    j, confirmed = _understeer_peak(list(trace.t), ays, cfg)
    if not confirmed:
        raise NoLimitFoundError(
            "ramp ended without a confirmed peak or an instability trigger"
        )
    return DetectedLimit(obs[j].a_y, obs[j].beta, LimitKind.UNDERSTEER_PEAK)


def hold_speed(
    model: VehicleModel,
    state: object,
    v_target: float,
    forces: tuple[float, float],
    cfg: HarnessConfig,
) -> HoldResult:
    """Settle the model at v_target under the given external forces.
    Raises UnfeasibleError if no steady hold is reached within the timeout."""
    session = _Session(model, state, v_target, forces, cfg)
    session.hold()
    return HoldResult(session.state, session.torque)


def gain_test(
    model: VehicleModel,
    state: object,
    v_target: float,
    forces: tuple[float, float],
    cfg: HarnessConfig,
    hold_torque: float = 0.0,
) -> GainResult:
    """Measure the steady-state lateral acceleration gain from a settled
    straight-running state; steering is returned to the ramp start point."""
    session = _Session(model, state, v_target, forces, cfg, hold_torque=hold_torque)
    kappa = session.gain_test()
    return GainResult(kappa, session.state, session.torque)


def run_ramp(
    model: VehicleModel,
    state: object,
    delta_dot: float,
    v_target: float,
    forces: tuple[float, float],
    cfg: HarnessConfig,
    hold_torque: float = 0.0,
) -> RampTrace:
    """Execute the open-loop steering ramp from a settled state."""
    session = _Session(model, state, v_target, forces, cfg, hold_torque=hold_torque)
    return session.ramp(delta_dot)


ModelFactory = Callable[[], VehicleModel]


def run_point(
    model_factory: ModelFactory,
    v: float,
    a_z: float,
    a_x: float,
    cfg: HarnessConfig,
) -> GggvPoint:
    """Full pipeline for one grid cell; infeasibility maps to the
    ``Unfeasible`` status, numerical faults propagate to the caller."""
    point, _ = _run_point_impl(model_factory, v, a_z, a_x, cfg, record_history=False)
    return point


def run_point_with_history(
    model_factory: ModelFactory,
    v: float,
    a_z: float,
    a_x: float,
    cfg: HarnessConfig,
) -> tuple[GggvPoint, RampTrace]:
    """run_point plus a decimated recording of the whole maneuver
    (hold, gain test and ramp) for trace dumps and plots."""
    point, history = _run_point_impl(model_factory, v, a_z, a_x, cfg, record_history=True)
    assert history is not None
    return point, history


def _run_point_impl(
    model_factory: ModelFactory,
    v: float,
    a_z: float,
    a_x: float,
    cfg: HarnessConfig,
    record_history: bool,
) -> tuple[GggvPoint, RampTrace | None]:
    model = model_factory()
    forces = external_forces(model.descriptor.mass, a_x, a_z)
    kappa: float | None = None

    def history_of(session: _Session) -> RampTrace | None:
        if session.history is None:
            return None
        h = session.history
        return RampTrace(
            tuple(s[0] for s in h),
            tuple(s[1] for s in h),
            tuple(s[2] for s in h),
            tuple(s[3] for s in h),
        )

    state = model.initialize(v)
    session = _Session(model, state, v, forces, cfg, record_history=record_history)
    try:
        session.hold()
        kappa = session.gain_test()
        trace = session.ramp(steer_rate(kappa, cfg))
        detected = detect_limit(trace, v, cfg)
    except (UnfeasibleError, NoLimitFoundError):
        point = GggvPoint(v=v, a_z=a_z, a_x=a_x, status=PointStatus.UNFEASIBLE, kappa=kappa)
        return point, history_of(session)

    a_y_corr = sideslip_correct(detected.a_y_max, a_x, detected.beta)
    status = (
        PointStatus.UNDERSTEER_LIMIT
        if detected.kind is LimitKind.UNDERSTEER_PEAK
        else PointStatus.OVERSTEER_LIMIT
    )
    point = GggvPoint(
        v=v,
        a_z=a_z,
        a_x=a_x,
        status=status,
        a_y_corr=max(a_y_corr, 0.0),
        kappa=kappa,
        beta_at_limit=detected.beta,
    )
    return point, history_of(session)
