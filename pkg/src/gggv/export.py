"""Diagram exports: CSV, JSON (with round-trip import) and SVG g-g slices.

All exports are deterministic functions of the diagram: repeated calls
produce byte-identical files.  Numbers in the CSV carry 9 significant
digits; the JSON keeps full float round-trip precision.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .core import GggvDiagram, GggvPoint, PointStatus, SweepGrid, grid_index
from .maneuver import RampTrace
from .sweep import slice_gg

_CSV_HEADER = "v,a_z,a_x,a_y_corr,status,kappa,beta_at_limit"


def _num(x: float) -> str:
    return f"{x:.9g}"


def _opt(x: float | None) -> str:
    return "" if x is None else _num(x)


def export_csv(diagram: GggvDiagram, path: str | Path) -> None:
    """One row per grid cell in grid-index order; absent values are empty
    fields; LF line endings, UTF-8."""
    lines = [_CSV_HEADER]
    for p in diagram:
        lines.append(
            f"{_num(p.v)},{_num(p.a_z)},{_num(p.a_x)},{_opt(p.a_y_corr)},"
            f"{p.status.value},{_opt(p.kappa)},{_opt(p.beta_at_limit)}"
        )
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def export_json(diagram: GggvDiagram, path: str | Path) -> None:
    """Single document with the grid axes, the dense point array indexed
    [i_v][i_az][i_ax] and the sweep metadata; key order is fixed."""
    Path(path).write_bytes(diagram_json(diagram).encode("utf-8"))


def diagram_json(diagram: GggvDiagram) -> str:
    doc = {
        "format": "gggv-diagram",
        "version": 1,
        "grid": {
            "speeds": list(diagram.grid.speeds),
            "vertical_accels": list(diagram.grid.vertical_accels),
            "longitudinal_accels": list(diagram.grid.longitudinal_accels),
        },
        "metadata": diagram.metadata,
        "points": [
            [
                [
                    {
                        "status": p.status.value,
                        "a_y_corr": p.a_y_corr,
                        "kappa": p.kappa,
                        "beta_at_limit": p.beta_at_limit,
                        "fault": p.fault,
                    }
                    for p in row
                ]
                for row in plane
            ]
            for plane in diagram.points
        ],
    }
    return json.dumps(doc, indent=1) + "\n"


def load_diagram(path: str | Path) -> GggvDiagram:
    """Inverse of export_json."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format") != "gggv-diagram":
        raise ValueError(f"{path} is not a gggv diagram export")
    grid = SweepGrid(
        speeds=tuple(doc["grid"]["speeds"]),
        vertical_accels=tuple(doc["grid"]["vertical_accels"]),
        longitudinal_accels=tuple(doc["grid"]["longitudinal_accels"]),
    )
    statuses = {s.value: s for s in PointStatus}
    points = tuple(
        tuple(
            tuple(
                GggvPoint(
                    v=v,
                    a_z=a_z,
                    a_x=a_x,
                    status=statuses[cell["status"]],
                    a_y_corr=cell["a_y_corr"],
                    kappa=cell["kappa"],
                    beta_at_limit=cell["beta_at_limit"],
                    fault=cell.get("fault", False),
                )
                for a_x, cell in zip(grid.longitudinal_accels, row)
            )
            for a_z, row in zip(grid.vertical_accels, plane)
        )
        for v, plane in zip(grid.speeds, doc["points"])
    )
    return GggvDiagram(grid=grid, points=points, metadata=doc.get("metadata", {}))


def export_trace_csv(trace: RampTrace, path: str | Path) -> None:
    """Debug dump of a maneuver recording: t, delta, v, a_y, psi_dot, beta,
    T_total."""
    lines = ["t,delta,v,a_y,psi_dot,beta,T_total"]
    for t, delta, obs, torque in zip(trace.t, trace.delta, trace.obs, trace.torque):
        lines.append(
            f"{_num(t)},{_num(delta)},{_num(obs.v)},{_num(obs.a_y)},"
            f"{_num(obs.psi_dot)},{_num(obs.beta)},{_num(torque)}"
        )
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


# --- SVG rendering ---------------------------------------------------------

_W = 640
_H = 640
_MARGIN = 70.0


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def render_gg_svg(
    diagram: GggvDiagram,
    v: float,
    a_z: float,
    path: str | Path | None = None,
    overlay: tuple[float, float] | None = None,
) -> str:
    """Render the g-g cross-section at (v, a_z): a_y on the horizontal
    axis, a_x on the vertical, feasible boundary points as cross markers
    mirrored across a_y = 0.

    ``overlay`` draws the analytic envelope circle (radius, center shift):
    a_y^2 + (a_x + shift)^2 = radius^2, as produced by the force-limited
    point-mass model.  Returns the SVG text; writes it to ``path`` if given.
    """
    grid_index(diagram.grid, v, a_z, diagram.grid.longitudinal_accels[0])
    boundary = slice_gg(diagram, v, a_z)

    ys = [ay for _, ay in boundary]
    xs = [ax for ax, _ in boundary]
    if overlay is not None:
        radius, shift = overlay
        ys += [radius, -radius]
        xs += [radius - shift, -radius - shift]
    ay_span = max([abs(y) for y in ys] + [1.0]) * 1.1
    ax_lo = min(xs + [0.0]) - 1.0
    ax_hi = max(xs + [0.0]) + 1.0

    def sx(ay: float) -> float:
        return _MARGIN + (ay + ay_span) / (2.0 * ay_span) * (_W - 2.0 * _MARGIN)

    def sy(ax: float) -> float:
        return _H - _MARGIN - (ax - ax_lo) / (ax_hi - ax_lo) * (_H - 2.0 * _MARGIN)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="24" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14">g-g slice at v = {_fmt(v)} m/s, a_z = {_fmt(a_z)} m/s^2</text>',
    ]
    # axes through the origin plus the frame
    parts.append(
        f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{_W - 2 * _MARGIN}" '
        f'height="{_H - 2 * _MARGIN}" fill="none" stroke="black"/>'
    )
    parts.append(
        f'<line x1="{_fmt(sx(0.0))}" y1="{_MARGIN}" x2="{_fmt(sx(0.0))}" '
        f'y2="{_H - _MARGIN}" stroke="lightgray"/>'
    )
    if ax_lo < 0.0 < ax_hi:
        parts.append(
            f'<line x1="{_MARGIN}" y1="{_fmt(sy(0.0))}" x2="{_W - _MARGIN}" '
            f'y2="{_fmt(sy(0.0))}" stroke="lightgray"/>'
        )
    parts.append(
        f'<text x="{_W / 2}" y="{_H - 20}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12">a_y [m/s^2]</text>'
    )
    parts.append(
        f'<text x="20" y="{_H / 2}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="12" transform="rotate(-90 20 {_H / 2})">a_x [m/s^2]</text>'
    )
    for label, xpix in ((-ay_span, _MARGIN), (ay_span, _W - _MARGIN)):
        parts.append(
            f'<text x="{_fmt(xpix)}" y="{_H - _MARGIN + 16}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="10">{_fmt(label)}</text>'
        )
    for label, ypix in ((ax_lo, _H - _MARGIN), (ax_hi, _MARGIN)):
        parts.append(
            f'<text x="{_MARGIN - 8}" y="{_fmt(ypix + 4)}" text-anchor="end" '
            f'font-family="sans-serif" font-size="10">{_fmt(label)}</text>'
        )

    if overlay is not None:
        radius, shift = overlay
        steps = 256
        pts = []
        for i in range(steps + 1):
            phi = 2.0 * math.pi * i / steps
            ay = radius * math.sin(phi)
            ax = radius * math.cos(phi) - shift
            pts.append(f"{_fmt(sx(ay))},{_fmt(sy(ax))}")
        parts.append(
            f'<polyline points="{" ".join(pts)}" fill="none" stroke="steelblue" '
            f'stroke-width="1.5" class="analytic-overlay"/>'
        )

    for ax, ay in boundary:
        x, y = sx(ay), sy(ax)
        parts.append(
            f'<path d="M {_fmt(x - 3)} {_fmt(y - 3)} L {_fmt(x + 3)} {_fmt(y + 3)} '
            f'M {_fmt(x - 3)} {_fmt(y + 3)} L {_fmt(x + 3)} {_fmt(y - 3)}" '
            f'stroke="crimson" stroke-width="1.2" class="boundary-marker"/>'
        )
    parts.append("</svg>")
    text = "\n".join(parts) + "\n"
    if path is not None:
        Path(path).write_bytes(text.encode("utf-8"))
    return text
