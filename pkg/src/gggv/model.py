"""The black-box vehicle model contract.

A model exposes exactly three operations: initialize, step, observe.
Integration is purely forward; the maneuver harness never touches model
internals, so any implementation honoring this interface (including
proprietary or high-fidelity ones) can be swept.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Any

from .core import ControlInput, Observables


class DrivenAxle(Enum):
    FRONT = "front"
    REAR = "rear"
    ALL = "all"


@dataclass(frozen=True)
class ModelDescriptor:
    """Public facts about a model that the harness is allowed to know:
    enough to route torque demands and scale controller clamps, nothing
    about the model's interior."""

    name: str
    mass: float            # [kg]
    driven_axle: DrivenAxle
    brake_balance: float   # front fraction of braking torque, [0, 1]
    wheel_radius: float    # rolling radius [m]
    max_steering: float    # road-wheel angle limit [rad]

    def __post_init__(self) -> None:
        if self.mass <= 0.0:
            raise ValueError("mass must be > 0")
        if self.wheel_radius <= 0.0:
            raise ValueError("wheel_radius must be > 0")
        if not 0.0 <= self.brake_balance <= 1.0:
            raise ValueError("brake_balance must lie in [0, 1]")
        if self.max_steering <= 0.0:
            raise ValueError("max_steering must be > 0")


class VehicleModel(ABC):
    """Forward-only vehicle model.

    Stepping must be deterministic: identical (state, input, dt) sequences
    yield identical observables.  States are opaque to callers; only
    ``observe`` gives access to the mandated outputs.

    ``dt_max`` is the declared integration step [s]; the harness runs the
    model at exactly this step.  ``speed_range`` bounds the speeds the
    model accepts at initialization.
    """

    dt_max: float = 1e-3
    speed_range: tuple[float, float] = (0.5, 150.0)

    @property
    @abstractmethod
    def descriptor(self) -> ModelDescriptor: ...

    @abstractmethod
    def initialize(self, v: float) -> Any:
        """Straight-running state at speed v: zero steering, zero lateral
        states.  Raises InvalidSpeedError outside ``speed_range``."""

    @abstractmethod
    def step(self, state: Any, control: ControlInput, dt: float) -> Any:
        """Advance the state by dt under the given controls and CoG
        external forces.  Raises NumericalDivergenceError if any state
        becomes non-finite."""

    @abstractmethod
    def observe(self, state: Any) -> Observables:
        """Pure read of the mandated observables; never mutates state."""


def route_torque(desc: ModelDescriptor, total: float) -> tuple[float, float, float, float]:
    """Split a net torque demand onto the four wheels (FL, FR, RL, RR).

    Positive demand drives the driven axle, split 50/50 left/right.
    Negative demand brakes all four wheels according to the brake balance,
    split 50/50 within each axle.
    """
    if total >= 0.0:
        if desc.driven_axle is DrivenAxle.FRONT:
            half = 0.5 * total
            return (half, half, 0.0, 0.0)
        if desc.driven_axle is DrivenAxle.REAR:
            half = 0.5 * total
            return (0.0, 0.0, half, half)
        quarter = 0.25 * total
        return (quarter, quarter, quarter, quarter)
    front = 0.5 * total * desc.brake_balance
    rear = 0.5 * total * (1.0 - desc.brake_balance)
    return (front, front, rear, rear)
