"""Command-line front end.

Verbs:
  sweep     run the full grid sweep from a config file and export the diagram
  slice     render an SVG g-g cross-section from an exported JSON diagram
  validate  run the point-mass oracle suite and print the error statistic
  trace     run a single grid point and dump the maneuver time series

Exit codes: 0 success, 1 validation/parse error, 2 sweep completed with
faulted cells, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
import time
from functools import partial
from pathlib import Path

from . import __version__
from .config import RunConfig, parse_config
from .core import G, SweepGrid
from .errors import ConfigError, GggvError, NotOnGridError, OutOfBoundsError
from .export import export_csv, export_json, export_trace_csv, load_diagram, render_gg_svg
from .maneuver import run_point_with_history
from .models import PointMassConfig, PointMassModel, point_mass_harness
from .sweep import resolve_workers, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_FAULTED = 2
EXIT_IO = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gggv",
        description="Quasi-steady-state generation of g-g-g-v acceleration envelopes.",
    )
    parser.add_argument("--version", action="version", version=f"gggv {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)

    sweep = sub.add_parser("sweep", help="run a full grid sweep from a config file")
    sweep.add_argument("--config", required=True, help="JSON run configuration")
    sweep.add_argument("--out-dir", default=None, help="override the output directory")
    sweep.add_argument("--workers", default=None, help="worker count or 'auto'")
    sweep.add_argument("--format", choices=("csv", "json", "both"), default=None)
    sweep.add_argument(
        "--debug-trace",
        action="store_true",
        help="dump a per-cell maneuver trace CSV (forces serial execution)",
    )

    sl = sub.add_parser("slice", help="render a g-g cross-section as SVG")
    sl.add_argument("--diagram", required=True, help="JSON diagram export")
    sl.add_argument("--v", type=float, required=True, help="grid speed [m/s]")
    sl.add_argument("--az", type=float, required=True, help="grid vertical acceleration [m/s^2]")
    sl.add_argument("--out", default=None, help="output SVG path")
    sl.add_argument(
        "--overlay",
        action="store_true",
        help="draw the analytic envelope (point-mass diagrams only)",
    )

    val = sub.add_parser("validate", help="point-mass oracle suite")
    val.add_argument("--workers", default=None, help="worker count or 'auto'")
    val.add_argument("--target-jerk", type=float, default=1.0)
    val.add_argument("--cells", type=int, default=80, help="size of the a_x pool")

    tr = sub.add_parser("trace", help="run one grid point and dump its trace")
    tr.add_argument("--config", required=True, help="JSON run configuration")
    tr.add_argument("--v", type=float, required=True)
    tr.add_argument("--az", type=float, required=True)
    tr.add_argument("--ax", type=float, required=True)
    tr.add_argument("--out", default=None, help="output CSV path")
    return parser


def _cmd_sweep(args: argparse.Namespace) -> int:
    rc = parse_config(args.config)
    out_dir = Path(args.out_dir) if args.out_dir else rc.out_dir
    formats = rc.formats
    if args.format:
        formats = ("csv", "json") if args.format == "both" else (args.format,)
    workers = resolve_workers(args.workers if args.workers is not None else rc.workers)
    dump_traces = args.debug_trace or rc.dump_traces

    out_dir.mkdir(parents=True, exist_ok=True)
    metadata = rc.metadata()
    started = time.perf_counter()
    if dump_traces:
        report = _traced_sweep(rc, out_dir, metadata)
    else:
        report = run_sweep(rc.model_factory(), rc.grid, rc.harness, workers=workers, metadata=metadata)
    if "csv" in formats:
        export_csv(report.diagram, out_dir / "diagram.csv")
    if "json" in formats:
        export_json(report.diagram, out_dir / "diagram.json")

    counts = ", ".join(f"{k}: {n}" for k, n in sorted(report.status_counts.items()))
    print(f"sweep of {rc.grid.size} cells in {time.perf_counter() - started:.1f} s "
          f"({report.workers} worker(s)); {counts}")
    print(f"outputs in {out_dir}")
    if report.fault_count:
        print(f"warning: {report.fault_count} cell(s) faulted", file=sys.stderr)
        return EXIT_FAULTED
    return EXIT_OK


def _traced_sweep(rc: RunConfig, out_dir: Path, metadata: dict):
    """Serial sweep that records and dumps every cell's maneuver trace."""
    from .core import GggvDiagram, GggvPoint, PointStatus
    from .errors import NumericalDivergenceError
    from .sweep import SweepReport

    trace_dir = out_dir / "traces"
    trace_dir.mkdir(parents=True, exist_ok=True)
    factory = rc.model_factory()
    nv, na, nx = rc.grid.shape
    table = [[[None] * nx for _ in range(na)] for _ in range(nv)]
    seconds = []
    counts = {s.value: 0 for s in PointStatus}
    faults = 0
    started = time.perf_counter()
    for (i, j, k), (v, a_z, a_x) in rc.grid.cells():
        t0 = time.perf_counter()
        try:
            point, history = run_point_with_history(factory, v, a_z, a_x, rc.harness)
            export_trace_csv(history, trace_dir / f"trace_v{v:g}_az{a_z:g}_ax{a_x:g}.csv")
        except NumericalDivergenceError:
            point = GggvPoint(v=v, a_z=a_z, a_x=a_x, status=PointStatus.UNFEASIBLE, fault=True)
        seconds.append(time.perf_counter() - t0)
        table[i][j][k] = point
        counts[point.status.value] += 1
        faults += point.fault
    points = tuple(tuple(tuple(row) for row in plane) for plane in table)
    diagram = GggvDiagram(grid=rc.grid, points=points, metadata=metadata)
    return SweepReport(
        diagram=diagram,
        cell_seconds=tuple(seconds),
        status_counts=counts,
        fault_count=faults,
        total_seconds=time.perf_counter() - started,
        workers=1,
    )


def _cmd_slice(args: argparse.Namespace) -> int:
    diagram = load_diagram(args.diagram)
    overlay = None
    if args.overlay:
        model = diagram.metadata.get("model_config", {})
        if model.get("type") != "point_mass":
            print("--overlay requires a point-mass diagram", file=sys.stderr)
            return EXIT_CONFIG
        overlay = (model["force_limit"] / model["mass"], model["drag_accel"])
    out = Path(args.out) if args.out else Path(f"gg_v{args.v:g}_az{args.az:g}.svg")
    render_gg_svg(diagram, args.v, args.az, out, overlay=overlay)
    print(f"wrote {out}")
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    if args.cells < 2:
        print("--cells must be >= 2", file=sys.stderr)
        return EXIT_CONFIG
    pm = PointMassConfig()
    cfg = point_mass_harness(
        pm,
        target_jerk=args.target_jerk,
        ramp_timeout=max(60.0, 40.0 / args.target_jerk),
    )
    grid = SweepGrid(
        speeds=(30.0,),
        vertical_accels=(G,),
        longitudinal_accels=tuple(-30.0 + 50.0 * k / (args.cells - 1) for k in range(args.cells)),
    )
    workers = resolve_workers(args.workers)
    report = run_sweep(partial(PointMassModel, pm), grid, cfg, workers=workers)
    errors = []
    for p in report.diagram:
        if p.feasible:
            errors.append(abs(p.a_y_corr - pm.envelope_a_y(p.a_x)))
    if not errors:
        print("no feasible cells; validation failed", file=sys.stderr)
        return EXIT_CONFIG
    mean = sum(errors) / len(errors)
    worst = max(errors)
    print(f"point-mass oracle: {len(errors)} feasible cells of {grid.size}")
    print(f"mean |a_y_corr - analytic| = {mean:.3e} m/s^2")
    print(f"max  |a_y_corr - analytic| = {worst:.3e} m/s^2")
    print(f"runtime {report.total_seconds:.1f} s with {report.workers} worker(s)")
    ok = mean < 1e-3 and worst < 5e-3
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_CONFIG


def _cmd_trace(args: argparse.Namespace) -> int:
    rc = parse_config(args.config)
    point, history = run_point_with_history(rc.model_factory(), args.v, args.az, args.ax, rc.harness)
    out = Path(args.out) if args.out else Path(f"trace_v{args.v:g}_az{args.az:g}_ax{args.ax:g}.csv")
    export_trace_csv(history, out)
    ay = "-" if point.a_y_corr is None else f"{point.a_y_corr:.6f}"
    print(f"status={point.status.value} a_y_corr={ay} kappa={point.kappa} -> {out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "sweep": _cmd_sweep,
        "slice": _cmd_slice,
        "validate": _cmd_validate,
        "trace": _cmd_trace,
    }
    try:
        return handlers[args.verb](args)
    except (ConfigError, NotOnGridError, OutOfBoundsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except GggvError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
