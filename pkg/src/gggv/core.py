"""Shared domain types: observables, control inputs, the sweep grid and the
g-g-g-v result containers.

Units are SI throughout (m/s, m/s^2, rad, N, N*m).  Wheel-indexed
quantities are ordered FL, FR, RL, RR.  Everything here is an immutable
value type and safe to share across worker processes.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, NamedTuple

from .errors import NotOnGridError, OutOfBoundsError, UnfeasibleNeighborhoodError

# Gravitational acceleration [m/s^2].  The vertical-force emulation is zero
# exactly at a_z equal to this value.
G = 9.81

# Relative tolerance for matching a value against a grid node.
_GRID_MATCH_RTOL = 1e-12


class Observables(NamedTuple):
    """Mandated observable outputs of a vehicle model state.

    ``a_x`` and ``a_y`` are vehicle-frame accelerations; ``wheel_loads``
    holds the vertical tire loads (FL, FR, RL, RR).  A negative entry means
    the quasi-static load solve predicts wheel lift.
    """

    v: float              # speed [m/s]
    a_x: float            # longitudinal acceleration, vehicle frame [m/s^2]
    a_y: float            # lateral acceleration, vehicle frame [m/s^2]
    psi_dot: float        # yaw rate [rad/s]
    beta: float           # sideslip angle [rad]
    theta: float          # pitch angle, nose-down positive [rad]
    wheel_loads: tuple[float, float, float, float]  # [N]

    @property
    def wheel_lift(self) -> bool:
        return min(self.wheel_loads) < 0.0


class ControlInput(NamedTuple):
    """Per-step control vector: road-wheel steering angle, four wheel
    torques and the virtual external forces applied at the CoG (fixed in
    the vehicle's longitudinal/vertical axes)."""

    delta: float                                      # [rad]
    wheel_torques: tuple[float, float, float, float]  # FL, FR, RL, RR [N*m]
    f_x_ext: float                                    # [N]
    f_z_ext: float                                    # [N]


def _check_axis(name: str, values: tuple[float, ...], positive: bool = False) -> None:
    if not values:
        raise ValueError(f"{name} must not be empty")
    prev = None
    for x in values:
        if not math.isfinite(x):
            raise ValueError(f"{name} contains a non-finite value")
        if positive and x <= 0.0:
            raise ValueError(f"{name} entries must be > 0")
        if prev is not None and x <= prev:
            raise ValueError(f"{name} must be strictly increasing")
        prev = x


@dataclass(frozen=True)
class SweepGrid:
    """The (v, a_z, a_x) grid a sweep is evaluated on.

    ``longitudinal_accels`` is the pool of emulated longitudinal
    accelerations tested at each (speed, vertical acceleration) pair.
    """

    speeds: tuple[float, ...]
    vertical_accels: tuple[float, ...]
    longitudinal_accels: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "speeds", tuple(float(x) for x in self.speeds))
        object.__setattr__(self, "vertical_accels", tuple(float(x) for x in self.vertical_accels))
        object.__setattr__(self, "longitudinal_accels", tuple(float(x) for x in self.longitudinal_accels))
        _check_axis("speeds", self.speeds, positive=True)
        _check_axis("vertical_accels", self.vertical_accels)
        _check_axis("longitudinal_accels", self.longitudinal_accels)

    @property
    def shape(self) -> tuple[int, int, int]:
        return (len(self.speeds), len(self.vertical_accels), len(self.longitudinal_accels))

    @property
    def size(self) -> int:
        nv, na, nx = self.shape
        return nv * na * nx

    def cells(self) -> Iterator[tuple[tuple[int, int, int], tuple[float, float, float]]]:
        """Yield ((i, j, k), (v, a_z, a_x)) in grid-index order."""
        for i, v in enumerate(self.speeds):
            for j, a_z in enumerate(self.vertical_accels):
                for k, a_x in enumerate(self.longitudinal_accels):
                    yield (i, j, k), (v, a_z, a_x)


def _axis_index(axis: tuple[float, ...], value: float, name: str) -> int:
    for i, node in enumerate(axis):
        if abs(value - node) <= _GRID_MATCH_RTOL * max(1.0, abs(node)):
            return i
    raise NotOnGridError(f"{value!r} is not a node of the {name} axis")


def grid_index(grid: SweepGrid, v: float, a_z: float, a_x: float) -> tuple[int, int, int]:
    """Map exact grid values to their (i, j, k) indices.

    Raises NotOnGridError if any value is absent (match tolerance 1e-12
    relative).
    """
    return (
        _axis_index(grid.speeds, v, "speeds"),
        _axis_index(grid.vertical_accels, a_z, "vertical_accels"),
        _axis_index(grid.longitudinal_accels, a_x, "longitudinal_accels"),
    )


class PointStatus(Enum):
    """Outcome of one grid-cell run.  The enum value doubles as the
    serialization label."""

    UNDERSTEER_LIMIT = "understeer_limit"
    OVERSTEER_LIMIT = "oversteer_limit"
    UNFEASIBLE = "unfeasible"


@dataclass(frozen=True)
class GggvPoint:
    """One (v, a_z, a_x) result: the corrected maximum lateral acceleration
    plus how the limit was reached.

    ``a_y_corr`` is stored for the positive-steer half only; consumers
    mirror across a_y = 0.  ``fault`` marks cells that failed with a
    numerical fault rather than an ordinary infeasibility.
    """

    v: float
    a_z: float
    a_x: float
    status: PointStatus
    a_y_corr: float | None = None
    kappa: float | None = None          # lateral acceleration gain [(m/s^2)/rad]
    beta_at_limit: float | None = None  # [rad]
    fault: bool = False

    def __post_init__(self) -> None:
        if self.status is PointStatus.UNFEASIBLE:
            if self.a_y_corr is not None:
                raise ValueError("unfeasible point must not carry a_y_corr")
        else:
            if self.a_y_corr is None:
                raise ValueError("feasible point must carry a_y_corr")
            if self.a_y_corr < 0.0:
                raise ValueError("a_y_corr must be >= 0 (one-sided storage)")

    @property
    def feasible(self) -> bool:
        return self.status is not PointStatus.UNFEASIBLE


@dataclass(frozen=True)
class GggvDiagram:
    """Dense result container over a SweepGrid.

    ``points[i][j][k]`` is the GggvPoint for
    (speeds[i], vertical_accels[j], longitudinal_accels[k]).
    """

    grid: SweepGrid
    points: tuple[tuple[tuple[GggvPoint, ...], ...], ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        nv, na, nx = self.grid.shape
        if len(self.points) != nv or any(
            len(plane) != na or any(len(row) != nx for row in plane) for plane in self.points
        ):
            raise ValueError("points dimensions do not match grid dimensions")

    def point_at(self, v: float, a_z: float, a_x: float) -> GggvPoint:
        i, j, k = grid_index(self.grid, v, a_z, a_x)
        return self.points[i][j][k]

    def __iter__(self) -> Iterator[GggvPoint]:
        for plane in self.points:
            for row in plane:
                yield from row


def _bracket(axis: tuple[float, ...], value: float, name: str) -> tuple[int, int, float]:
    """Locate ``value`` on ``axis``: (lower index, upper index, fraction)."""
    lo, hi = axis[0], axis[-1]
    eps = _GRID_MATCH_RTOL * max(1.0, abs(lo), abs(hi))
    if value < lo - eps or value > hi + eps:
        raise OutOfBoundsError(f"{value!r} outside the {name} axis range [{lo}, {hi}]")
    if len(axis) == 1:
        return 0, 0, 0.0
    i = bisect_right(axis, value) - 1
    i = min(max(i, 0), len(axis) - 2)
    span = axis[i + 1] - axis[i]
    frac = (value - axis[i]) / span
    frac = min(max(frac, 0.0), 1.0)
    return i, i + 1, frac


def query(diagram: GggvDiagram, v: float, a_z: float, a_x: float) -> float:
    """Trilinear interpolation of a_y_corr over the enclosing grid cell.

    Raises OutOfBoundsError outside the grid's bounding box and
    UnfeasibleNeighborhoodError if any involved corner cell is unfeasible.
    """
    grid = diagram.grid
    i0, i1, fv = _bracket(grid.speeds, v, "speeds")
    j0, j1, fa = _bracket(grid.vertical_accels, a_z, "vertical_accels")
    k0, k1, fx = _bracket(grid.longitudinal_accels, a_x, "longitudinal_accels")

    def corner(i: int, j: int, k: int) -> float:
        p = diagram.points[i][j][k]
        if not p.feasible:
            raise UnfeasibleNeighborhoodError(
                f"cell (v={grid.speeds[i]}, a_z={grid.vertical_accels[j]}, "
                f"a_x={grid.longitudinal_accels[k]}) is unfeasible"
            )
        return p.a_y_corr  # type: ignore[return-value]

    def lerp(a: float, b: float, t: float) -> float:
        return a + (b - a) * t

    c000 = corner(i0, j0, k0)
    c001 = corner(i0, j0, k1)
    c010 = corner(i0, j1, k0)
    c011 = corner(i0, j1, k1)
    c100 = corner(i1, j0, k0)
    c101 = corner(i1, j0, k1)
    c110 = corner(i1, j1, k0)
    c111 = corner(i1, j1, k1)
    c00 = lerp(c000, c001, fx)
    c01 = lerp(c010, c011, fx)
    c10 = lerp(c100, c101, fx)
    c11 = lerp(c110, c111, fx)
    c0 = lerp(c00, c01, fa)
    c1 = lerp(c10, c11, fa)
    return lerp(c0, c1, fv)
