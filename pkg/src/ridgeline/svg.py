"""Self-contained SVG rendering of roofline curves and the bottleneck-region plane.

No plotting library: geometry is computed here so that identical inputs
produce byte-identical documents. Both axes are logarithmic. A data value
``v`` on an axis with range ``(lo, hi)`` maps to pixels as

    t    = (log10(v) - log10(lo)) / (log10(hi) - log10(lo))
    x_px = margin + t * (width - 2 * margin)
    y_px = (height - margin) - t * (height - 2 * margin)

and pixel coordinates are written with ``format(value, ".3f")``. Data
values in annotations use ``format(value, ".6g")``.

Color roles and their defaults live in :data:`DEFAULT_COLORS`; override any
subset through :class:`PlotStyle`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

from .model import Curve, CurveKind, Region, RidgelineGeometry, SurfaceGrid

DEFAULT_COLORS: dict[str, str] = {
    "background": "#ffffff",
    "frame": "#333333",
    "grid": "#e0e0e0",
    "text": "#222222",
    "curve": "#1f4e8c",
    "knee": "#888888",
    "boundary": "#555555",
    "center": "#000000",
    "marker": "#c0392b",
    "marker_outline": "#3a3a3a",
    "co_limited_outline": "#000000",
    "region_compute": "#dce9f7",
    "region_memory": "#fcead2",
    "region_network": "#def0de",
    "point_compute": "#2e6fb0",
    "point_memory": "#d98032",
    "point_network": "#3d9c50",
}

_AXIS_TITLES = {
    CurveKind.COMPUTE_MEMORY: ("arithmetic intensity (FLOP/memory byte)", "attainable FLOP/s"),
    CurveKind.MEMORY_NETWORK: (
        "memory intensity (memory byte/network byte)",
        "attainable memory bytes/s",
    ),
    CurveKind.COMPUTE_NETWORK: ("network intensity (FLOP/network byte)", "attainable FLOP/s"),
}


def _fmt_px(value: float) -> str:
    return format(value, ".3f")


def _fmt_num(value: float) -> str:
    return format(value, ".6g")


@dataclass(frozen=True)
class PlotStyle:
    """Canvas size, margins, axis ranges (data units) and color overrides.

    ``x_range``/``y_range`` of ``None`` pick defaults two decades on each
    side of the plot's center point (the curve knee, or the region plot's
    central point).
    """

    width: float = 720.0
    height: float = 540.0
    margin: float = 72.0
    x_range: tuple[float, float] | None = None
    y_range: tuple[float, float] | None = None
    colors: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError(f"plot size must be positive, got {self.width}x{self.height}")
        if self.margin < 0:
            raise ValueError(f"margin must be >= 0, got {self.margin}")
        if self.width <= 2 * self.margin or self.height <= 2 * self.margin:
            raise ValueError("margins leave no drawable area")
        for name, rng in (("x_range", self.x_range), ("y_range", self.y_range)):
            if rng is not None:
                lo, hi = rng
                if not (0 < lo < hi) or not math.isfinite(hi):
                    raise ValueError(f"{name} must satisfy 0 < min < max, got {rng!r}")
        unknown = set(self.colors) - set(DEFAULT_COLORS)
        if unknown:
            raise ValueError(f"unknown color role(s): {sorted(unknown)}")

    def color(self, role: str) -> str:
        return self.colors.get(role, DEFAULT_COLORS[role])


@dataclass(frozen=True)
class RooflinePoint:
    intensity: float
    throughput: float
    label: str = ""


@dataclass(frozen=True)
class RidgelinePoint:
    mem_intensity: float
    arith_intensity: float
    label: str = ""
    region: Region | None = None
    co_limited: bool = False


class _Axes:
    """Log-log data-to-pixel transform over the style's drawable area."""

    def __init__(self, style: PlotStyle, x_range: tuple[float, float], y_range: tuple[float, float]):
        self.style = style
        self.x_lo, self.x_hi = x_range
        self.y_lo, self.y_hi = y_range
        self.left = style.margin
        self.right = style.width - style.margin
        self.top = style.margin
        self.bottom = style.height - style.margin

    def x_px(self, v: float) -> float:
        t = (math.log10(v) - math.log10(self.x_lo)) / (
            math.log10(self.x_hi) - math.log10(self.x_lo)
        )
        return self.style.margin + t * (self.style.width - 2 * self.style.margin)

    def y_px(self, v: float) -> float:
        t = (math.log10(v) - math.log10(self.y_lo)) / (
            math.log10(self.y_hi) - math.log10(self.y_lo)
        )
        return (self.style.height - self.style.margin) - t * (
            self.style.height - 2 * self.style.margin
        )

    def clamp_x(self, v: float) -> float:
        return min(max(v, self.x_lo), self.x_hi)

    def clamp_y(self, v: float) -> float:
        return min(max(v, self.y_lo), self.y_hi)


def _decades(lo: float, hi: float) -> list[int]:
    return list(range(math.ceil(math.log10(lo) - 1e-9), math.floor(math.log10(hi) + 1e-9) + 1))


def _line(x1, y1, x2, y2, cls, color, width="1", dash=None) -> str:
    dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
    return (
        f'<line class="{cls}" x1="{_fmt_px(x1)}" y1="{_fmt_px(y1)}" '
        f'x2="{_fmt_px(x2)}" y2="{_fmt_px(y2)}" stroke="{color}" '
        f'stroke-width="{width}"{dash_attr}/>'
    )


def _text(x, y, content, cls, color, anchor="start", size="12", transform=None) -> str:
    transform_attr = f' transform="{transform}"' if transform else ""
    return (
        f'<text class="{cls}" x="{_fmt_px(x)}" y="{_fmt_px(y)}" fill="{color}" '
        f'font-family="monospace" font-size="{size}" '
        f'text-anchor="{anchor}"{transform_attr}>{escape(content)}</text>'
    )


def _circle(x, y, r, cls, fill, stroke, stroke_width="1") -> str:
    return (
        f'<circle class="{cls}" cx="{_fmt_px(x)}" cy="{_fmt_px(y)}" r="{r}" '
        f'fill="{fill}" stroke="{stroke}" stroke-width="{stroke_width}"/>'
    )


def _document(style: PlotStyle, body: list[str]) -> str:
    w, h = _fmt_px(style.width), _fmt_px(style.height)
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect class="background" x="0" y="0" width="{w}" height="{h}" '
        f'fill="{style.color("background")}"/>',
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"


def _frame_and_ticks(axes: _Axes, x_title: str, y_title: str) -> list[str]:
    style = axes.style
    out = []
    for exponent in _decades(axes.x_lo, axes.x_hi):
        px = axes.x_px(10.0**exponent)
        out.append(_line(px, axes.top, px, axes.bottom, "grid", style.color("grid")))
        out.append(
            _text(px, axes.bottom + 16, f"1e{exponent}", "tick-label", style.color("text"),
                  anchor="middle", size="11")
        )
    for exponent in _decades(axes.y_lo, axes.y_hi):
        py = axes.y_px(10.0**exponent)
        out.append(_line(axes.left, py, axes.right, py, "grid", style.color("grid")))
        out.append(
            _text(axes.left - 6, py + 4, f"1e{exponent}", "tick-label", style.color("text"),
                  anchor="end", size="11")
        )
    out.append(
        f'<rect class="frame" x="{_fmt_px(axes.left)}" y="{_fmt_px(axes.top)}" '
        f'width="{_fmt_px(axes.right - axes.left)}" height="{_fmt_px(axes.bottom - axes.top)}" '
        f'fill="none" stroke="{style.color("frame")}" stroke-width="1"/>'
    )
    out.append(
        _text((axes.left + axes.right) / 2, axes.bottom + 38, x_title, "axis-title",
              style.color("text"), anchor="middle")
    )
    y_mid = (axes.top + axes.bottom) / 2
    out.append(
        _text(18, y_mid, y_title, "axis-title", style.color("text"), anchor="middle",
              transform=f"rotate(-90 {_fmt_px(18)} {_fmt_px(y_mid)})")
    )
    return out


def _marker_with_label(axes: _Axes, x, y, label, cls, fill, stroke, stroke_width) -> list[str]:
    px = axes.x_px(axes.clamp_x(x))
    py = axes.y_px(axes.clamp_y(y))
    out = [_circle(px, py, 4, cls, fill, stroke, stroke_width)]
    if label:
        out.append(
            _text(px + 7, py - 7, label, "kernel-label", axes.style.color("text"), size="11")
        )
    return out


def render_roofline(
    curve: Curve,
    points: Sequence[RooflinePoint] = (),
    style: PlotStyle = PlotStyle(),
) -> str:
    """Log-log roofline: the sampled ceiling, its knee, and labeled kernel markers."""
    if curve.intensities.size == 0:
        raise ValueError("cannot render an empty curve")
    ceiling = float(curve.throughput.max())
    x_range = style.x_range or (curve.knee / 100.0, curve.knee * 100.0)
    y_range = style.y_range or (ceiling / 100.0, ceiling * 100.0)
    axes = _Axes(style, x_range, y_range)

    body = [
        "<defs>",
        f'<clipPath id="plot-area"><rect x="{_fmt_px(axes.left)}" y="{_fmt_px(axes.top)}" '
        f'width="{_fmt_px(axes.right - axes.left)}" '
        f'height="{_fmt_px(axes.bottom - axes.top)}"/></clipPath>',
        "</defs>",
    ]
    x_title, y_title = _AXIS_TITLES[curve.kind]
    body.extend(_frame_and_ticks(axes, x_title, y_title))

    pairs = " ".join(
        f"{_fmt_px(axes.x_px(x))},{_fmt_px(axes.y_px(y))}"
        for x, y in zip(curve.intensities.tolist(), curve.throughput.tolist())
    )
    body.append(
        f'<g clip-path="url(#plot-area)">'
        f'<polyline class="curve" points="{pairs}" fill="none" '
        f'stroke="{style.color("curve")}" stroke-width="2"/></g>'
    )

    knee_px = axes.x_px(axes.clamp_x(curve.knee))
    body.append(
        _line(knee_px, axes.top, knee_px, axes.bottom, "knee-line", style.color("knee"),
              dash="5 4")
    )
    body.append(
        _text(knee_px + 5, axes.top + 14, f"knee={_fmt_num(curve.knee)}", "knee-label",
              style.color("text"), size="11")
    )

    for point in points:
        body.extend(
            _marker_with_label(
                axes, point.intensity, point.throughput, point.label, "kernel-point",
                style.color("marker"), style.color("marker_outline"), "1",
            )
        )
    return _document(style, body)


def _clip_halfplane(poly, a, b, c):
    """Keep the part of a polygon where a*u + b*v <= c (Sutherland-Hodgman)."""
    out = []
    for i in range(len(poly)):
        p, q = poly[i], poly[(i + 1) % len(poly)]
        p_in = a * p[0] + b * p[1] <= c
        q_in = a * q[0] + b * q[1] <= c
        if p_in:
            out.append(p)
        if p_in != q_in:
            t = (c - a * p[0] - b * p[1]) / (a * (q[0] - p[0]) + b * (q[1] - p[1]))
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def _region_polygons(geometry: RidgelineGeometry, axes: _Axes):
    """Region polygons in log10 coordinates, clipped to the axis window.

    With u = log10(i_m), v = log10(i_a): memory is u >= u*, v <= v*;
    compute is v >= v*, u + v >= u* + v*; network is the rest.
    """
    u_star, v_star = math.log10(geometry.x_star), math.log10(geometry.y_star)
    u_k = math.log10(geometry.k)
    u0, u1 = math.log10(axes.x_lo), math.log10(axes.x_hi)
    v0, v1 = math.log10(axes.y_lo), math.log10(axes.y_hi)
    window = [(u0, v0), (u1, v0), (u1, v1), (u0, v1)]

    def clipped(halfplanes):
        poly = window
        for a, b, c in halfplanes:
            poly = _clip_halfplane(poly, a, b, c)
            if len(poly) < 3:
                return []
        return poly

    return {
        Region.COMPUTE: clipped([(0, -1, -v_star), (-1, -1, -u_k)]),
        Region.MEMORY: clipped([(-1, 0, -u_star), (0, 1, v_star)]),
        Region.NETWORK: clipped([(1, 1, u_k), (1, 0, u_star)]),
    }


def render_ridgeline(
    geometry: RidgelineGeometry,
    points: Sequence[RidgelinePoint] = (),
    style: PlotStyle = PlotStyle(),
) -> str:
    """Region plot over (memory intensity, arithmetic intensity), log-log.

    Shades the compute/memory/network regions, draws the two balance lines
    and the diagonal separating network from compute in the upper-left
    quadrant, marks the central point, and overlays kernel points colored
    by their region (co-limited points get a heavier outline). Points must
    have finite coordinates; kernels without network traffic have no place
    on this plane.
    """
    for point in points:
        if not (math.isfinite(point.mem_intensity) and math.isfinite(point.arith_intensity)):
            raise ValueError(
                f"point {point.label!r} has non-finite coordinates; "
                "plot only finite-network kernels (net_bytes > 0)"
            )
        if point.mem_intensity <= 0 or point.arith_intensity <= 0:
            raise ValueError(f"point {point.label!r} needs positive coordinates")

    x_range = style.x_range or (geometry.x_star / 100.0, geometry.x_star * 100.0)
    y_range = style.y_range or (geometry.y_star / 100.0, geometry.y_star * 100.0)
    axes = _Axes(style, x_range, y_range)

    body: list[str] = []
    polygons = _region_polygons(geometry, axes)
    label_anchors = {}
    for region in (Region.NETWORK, Region.MEMORY, Region.COMPUTE):
        poly = polygons[region]
        if not poly:
            continue
        pix = [(axes.x_px(10.0**u), axes.y_px(10.0**v)) for u, v in poly]
        formatted = [f"{_fmt_px(x)} {_fmt_px(y)}" for x, y in pix]
        deduped = [p for i, p in enumerate(formatted) if p != formatted[i - 1]]
        if len(deduped) < 3:
            continue
        d = "M " + " L ".join(deduped) + " Z"
        body.append(
            f'<path class="region region-{region.value}" d="{d}" '
            f'fill="{style.color("region_" + region.value)}" stroke="none"/>'
        )
        label_anchors[region] = (
            sum(x for x, _ in pix) / len(pix),
            sum(y for _, y in pix) / len(pix),
        )

    body.extend(
        _frame_and_ticks(
            axes,
            "memory intensity (memory byte/network byte)",
            "arithmetic intensity (FLOP/memory byte)",
        )
    )

    boundary = style.color("boundary")
    x_star_px = axes.x_px(axes.clamp_x(geometry.x_star))
    y_star_px = axes.y_px(axes.clamp_y(geometry.y_star))
    body.append(
        _line(x_star_px, axes.top, x_star_px, axes.bottom,
              "boundary boundary-memory-network", boundary, dash="5 4")
    )
    body.append(
        _line(axes.left, y_star_px, axes.right, y_star_px,
              "boundary boundary-compute-memory", boundary, dash="5 4")
    )

    # Diagonal u + v = log10(k) restricted to u <= u* and the axis window.
    u_star, v_star = math.log10(geometry.x_star), math.log10(geometry.y_star)
    u_k = u_star + v_star
    u0, u1 = math.log10(axes.x_lo), math.log10(axes.x_hi)
    v0, v1 = math.log10(axes.y_lo), math.log10(axes.y_hi)
    u_lo = max(u0, u_k - v1)
    u_hi = min(u_star, u1, u_k - v0)
    if u_lo < u_hi:
        body.append(
            _line(
                axes.x_px(10.0**u_lo), axes.y_px(10.0 ** (u_k - u_lo)),
                axes.x_px(10.0**u_hi), axes.y_px(10.0 ** (u_k - u_hi)),
                "boundary boundary-compute-network", boundary, dash="5 4",
            )
        )

    for region, (lx, ly) in sorted(label_anchors.items(), key=lambda kv: kv[0].value):
        body.append(
            _text(lx, ly, region.value, "region-label", style.color("text"),
                  anchor="middle", size="13")
        )

    body.append(
        _circle(x_star_px, y_star_px, 3.5, "center-point", style.color("center"),
                style.color("center"))
    )
    body.append(
        _text(x_star_px + 6, y_star_px + 14,
              f"({_fmt_num(geometry.x_star)}, {_fmt_num(geometry.y_star)})",
              "center-label", style.color("text"), size="11")
    )

    for point in points:
        role = "marker" if point.region is None else f"point_{point.region.value}"
        stroke = style.color("co_limited_outline" if point.co_limited else "marker_outline")
        stroke_width = "2.5" if point.co_limited else "1"
        cls = "kernel-point" if point.region is None else f"kernel-point kernel-point-{point.region.value}"
        body.extend(
            _marker_with_label(
                axes, point.mem_intensity, point.arith_intensity, point.label, cls,
                style.color(role), stroke, stroke_width,
            )
        )
    return _document(style, body)


def export_surface(surface: SurfaceGrid, fmt: str) -> str:
    """Serialize a surface grid as ``csv`` rows or a ``grid-text`` matrix block.

    csv: header ``i_a,i_n,flops``, one row per cell, i_n-major ascending
    then i_a ascending, ``.`` decimal separator and LF line endings.
    grid-text: ``i_a:`` and ``i_n:`` axis header lines followed by a
    ``flops:`` matrix, one whitespace-separated row per i_n value.
    """
    i_a = surface.i_a_values.tolist()
    i_n = surface.i_n_values.tolist()
    if fmt == "csv":
        lines = ["i_a,i_n,flops"]
        for i, b in enumerate(i_n):
            row = surface.flops[i].tolist()
            for a, value in zip(i_a, row):
                lines.append(f"{a!r},{b!r},{value!r}")
        return "\n".join(lines) + "\n"
    if fmt == "grid-text":
        lines = [
            "i_a: " + " ".join(repr(a) for a in i_a),
            "i_n: " + " ".join(repr(b) for b in i_n),
            "flops:",
        ]
        for i in range(len(i_n)):
            lines.append(" ".join(repr(v) for v in surface.flops[i].tolist()))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown surface format {fmt!r}; expected 'csv' or 'grid-text'")
