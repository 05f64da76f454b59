"""Parallel execution of run_point over the whole sweep grid.

Each grid cell is one independent simulation run; results go into a
preallocated dense array keyed by grid index, so the assembled diagram is
identical for any worker count and any scheduling order.  Faulted cells
(numerical divergence) are recorded as unfeasible with a fault flag
instead of aborting the sweep.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .core import GggvDiagram, GggvPoint, PointStatus, SweepGrid, grid_index
from .errors import NumericalDivergenceError
from .maneuver import HarnessConfig, ModelFactory, run_point


@dataclass(frozen=True)
class SweepReport:
    diagram: GggvDiagram
    cell_seconds: tuple[float, ...]   # per-point wall time, grid-index order
    status_counts: dict[str, int]
    fault_count: int
    total_seconds: float
    workers: int

    def __post_init__(self) -> None:
        if sum(self.status_counts.values()) != self.diagram.grid.size:
            raise ValueError("status counts must sum to the grid cardinality")


def _run_cell(
    args: tuple[ModelFactory, float, float, float, HarnessConfig],
) -> tuple[GggvPoint, float]:
    factory, v, a_z, a_x, cfg = args
    started = time.perf_counter()
    try:
        point = run_point(factory, v, a_z, a_x, cfg)
    except NumericalDivergenceError:
        point = GggvPoint(v=v, a_z=a_z, a_x=a_x, status=PointStatus.UNFEASIBLE, fault=True)
    return point, time.perf_counter() - started


def run_sweep(
    model_factory: ModelFactory,
    grid: SweepGrid,
    cfg: HarnessConfig,
    workers: int = 1,
    metadata: dict | None = None,
) -> SweepReport:
    """Evaluate every grid cell and assemble the g-g-g-v diagram.

    ``model_factory`` must be picklable (a module-level callable or a
    partial of one) when workers > 1; each worker constructs its own model
    instance per cell.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    started = time.perf_counter()
    cells = list(grid.cells())
    jobs = [(model_factory, v, a_z, a_x, cfg) for _, (v, a_z, a_x) in cells]

    if workers == 1:
        outcomes = [_run_cell(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_cell, jobs, chunksize=1))

    nv, na, nx = grid.shape
    table: list[list[list[GggvPoint | None]]] = [
        [[None] * nx for _ in range(na)] for _ in range(nv)
    ]
    seconds = []
    counts = {status.value: 0 for status in PointStatus}
    faults = 0
    for ((i, j, k), _), (point, dur) in zip(cells, outcomes):
        table[i][j][k] = point
        seconds.append(dur)
        counts[point.status.value] += 1
        faults += point.fault
    points = tuple(tuple(tuple(row) for row in plane) for plane in table)  # type: ignore[arg-type]

    meta = dict(metadata) if metadata else {}
    meta.setdefault("harness", _harness_dict(cfg))
    diagram = GggvDiagram(grid=grid, points=points, metadata=meta)
    return SweepReport(
        diagram=diagram,
        cell_seconds=tuple(seconds),
        status_counts=counts,
        fault_count=faults,
        total_seconds=time.perf_counter() - started,
        workers=workers,
    )


def _harness_dict(cfg: HarnessConfig) -> dict:
    return {
        "target_jerk": cfg.target_jerk,
        "gain_test_step": cfg.gain_test_step,
        "oversteer_threshold": cfg.oversteer_threshold,
        "speed_tolerance": cfg.speed_tolerance,
        "settle_window": cfg.settle_window,
        "settle_timeout": cfg.settle_timeout,
        "ramp_timeout": cfg.ramp_timeout,
        "steer_rate_bounds": list(cfg.steer_rate_bounds),
        "pid_gains": list(cfg.pid_gains),
        "peak_confirm_drop": cfg.peak_confirm_drop,
        "torque_clamp": cfg.torque_clamp,
        "trace_decimation": cfg.trace_decimation,
        "torque_settle_band": cfg.torque_settle_band,
        "lateral_settle_band": cfg.lateral_settle_band,
    }


def resolve_workers(requested: int | str | None) -> int:
    """Map a worker request ('auto', an int, or None) to a count, falling
    back to the GGGV_WORKERS environment variable and then to 'auto'."""
    if requested is None:
        env = os.environ.get("GGGV_WORKERS")
        requested = env if env else "auto"
    if isinstance(requested, str):
        if requested == "auto":
            return os.cpu_count() or 1
        try:
            requested = int(requested)
        except ValueError as exc:
            raise ValueError(f"invalid worker count {requested!r}") from exc
    if requested < 1:
        raise ValueError("workers must be >= 1")
    return requested


def slice_gg(
    diagram: GggvDiagram, v: float, a_z: float
) -> list[tuple[float, float]]:
    """Ordered boundary polyline of the g-g cross-section at (v, a_z).

    Feasible cells produce (a_x, +a_y_corr) in ascending a_x followed by
    the mirrored (a_x, -a_y_corr) in descending a_x; unfeasible cells are
    omitted.  Raises NotOnGridError if (v, a_z) is not a grid node.
    """
    grid = diagram.grid
    i, j, _ = grid_index(grid, v, a_z, grid.longitudinal_accels[0])
    row = diagram.points[i][j]
    feasible = [(p.a_x, p.a_y_corr) for p in row if p.feasible]
    if not feasible:
        return []
    upper = [(a_x, a_y) for a_x, a_y in feasible]
    lower = [(a_x, -a_y) for a_x, a_y in reversed(feasible)]
    return upper + lower
