"""Deterministic SVG rendering of run artifacts, one layer per figure."""

from __future__ import annotations

import math

import numpy as np

from .errors import MissingLayer
from .pipeline import RunArtifacts

LAYERS = ("segmentation", "boundaries", "graph", "route", "path")

PALETTE = [
    "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4",
    "#46f0f0", "#f032e6", "#bcf60c", "#008080", "#9a6324",
]

WIDTH = 800


def _fmt(v: float) -> str:
    return f"{v:.4f}"


class _Canvas:
    """Collects SVG elements in a world-coordinate frame (y up)."""

    def __init__(self, points: np.ndarray, pad_frac: float = 0.06):
        lo = points.min(axis=0)
        hi = points.max(axis=0)
        span = np.maximum(hi - lo, 1e-6)
        pad = float(span.max()) * pad_frac
        self.x0, self.y0 = lo - pad
        self.x1, self.y1 = hi + pad
        self.scale = WIDTH / (self.x1 - self.x0)
        self.height = (self.y1 - self.y0) * self.scale
        self.elements: list[str] = []

    def tx(self, x: float) -> float:
        return (x - self.x0) * self.scale

    def ty(self, y: float) -> float:
        return (self.y1 - y) * self.scale

    def circle(self, x, y, r, fill, cls=""):
        attrs = f' class="{cls}"' if cls else ""
        self.elements.append(
            f'<circle{attrs} cx="{_fmt(self.tx(x))}" cy="{_fmt(self.ty(y))}" '
            f'r="{_fmt(r * self.scale)}" fill="{fill}"/>'
        )

    def line(self, x1, y1, x2, y2, stroke, width, cls=""):
        attrs = f' class="{cls}"' if cls else ""
        self.elements.append(
            f'<line{attrs} x1="{_fmt(self.tx(x1))}" y1="{_fmt(self.ty(y1))}" '
            f'x2="{_fmt(self.tx(x2))}" y2="{_fmt(self.ty(y2))}" '
            f'stroke="{stroke}" stroke-width="{_fmt(width)}"/>'
        )

    def polyline(self, pts, stroke, width, cls="", closed=False, fill="none"):
        tag = "polygon" if closed else "polyline"
        attrs = f' class="{cls}"' if cls else ""
        coords = " ".join(f"{_fmt(self.tx(x))},{_fmt(self.ty(y))}" for x, y in pts)
        self.elements.append(
            f'<{tag}{attrs} points="{coords}" fill="{fill}" '
            f'stroke="{stroke}" stroke-width="{_fmt(width)}"/>'
        )

    def polygon_filled(self, pts, fill, cls=""):
        attrs = f' class="{cls}"' if cls else ""
        coords = " ".join(f"{_fmt(self.tx(x))},{_fmt(self.ty(y))}" for x, y in pts)
        self.elements.append(f'<polygon{attrs} points="{coords}" fill="{fill}"/>')

    def text(self, x, y, content, size=12, fill="#222222"):
        self.elements.append(
            f'<text x="{_fmt(self.tx(x))}" y="{_fmt(self.ty(y))}" '
            f'font-size="{size}" fill="{fill}" font-family="monospace">{content}</text>'
        )

    def document(self) -> str:
        body = "\n".join(self.elements)
        return (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{WIDTH}" height="{_fmt(self.height)}" '
            f'viewBox="0 0 {WIDTH} {_fmt(self.height)}">\n'
            f'<rect width="100%" height="100%" fill="#ffffff"/>\n'
            f"{body}\n</svg>\n"
        )


def render_svg(artifacts: RunArtifacts, layer: str) -> str:
    """SVG document for one layer of the run; raises MissingLayer if absent."""
    if layer not in LAYERS:
        raise MissingLayer(f"unknown layer {layer!r}, expected one of {LAYERS}")
    if len(artifacts.cloud) == 0:
        raise MissingLayer("artifacts carry no cloud to set the viewport")
    canvas = _Canvas(artifacts.cloud.points)

    if layer == "segmentation":
        _draw_points(canvas, artifacts, colored=True)
    elif layer == "boundaries":
        _draw_points(canvas, artifacts, colored=True, faint=True)
        _draw_boundaries(canvas, artifacts)
    elif layer == "graph":
        _require_graph(artifacts)
        _draw_points(canvas, artifacts, colored=False, faint=True)
        _draw_boundaries(canvas, artifacts, faint=True)
        _draw_graph(canvas, artifacts)
    elif layer == "route":
        if artifacts.route is None:
            raise MissingLayer("run produced no route")
        _draw_points(canvas, artifacts, colored=False, faint=True)
        _draw_graph(canvas, artifacts, faint=True)
        _draw_route(canvas, artifacts)
    elif layer == "path":
        if not artifacts.paths:
            raise MissingLayer("run produced no footprint paths")
        _draw_points(canvas, artifacts, colored=False, faint=True)
        _draw_boundaries(canvas, artifacts, faint=True)
        _draw_paths(canvas, artifacts)
    return canvas.document()


def _require_graph(artifacts: RunArtifacts):
    if not artifacts.graph.vertices:
        raise MissingLayer("run produced no graph")


def _point_radius(artifacts: RunArtifacts) -> float:
    pts = artifacts.cloud.points
    span = float(np.max(pts.max(axis=0) - pts.min(axis=0)))
    return 0.0022 * span


def _draw_points(canvas, artifacts, colored: bool, faint: bool = False):
    r = _point_radius(artifacts)
    for (x, y), label in zip(artifacts.cloud.points, artifacts.labels):
        if colored:
            color = PALETTE[int(label) % len(PALETTE)]
            fill = color if not faint else color + "55"
        else:
            fill = "#cccccc" if faint else "#555555"
        canvas.circle(x, y, r, fill)


def _draw_boundaries(canvas, artifacts, faint: bool = False):
    for b in artifacts.boundaries:
        color = PALETTE[b.cluster_id % len(PALETTE)]
        width = 1.0 if faint else 2.0
        canvas.polyline(b.polygon.vertices, color, width, cls="boundary", closed=True)
        if not faint:
            canvas.circle(b.center.x, b.center.y, _point_radius(artifacts) * 3, color)


def _draw_graph(canvas, artifacts, faint: bool = False):
    g = artifacts.graph
    stroke = "#99999988" if faint else "#333333"
    for e in g.edges.values():
        pu = g.vertices[e.u].position
        pv = g.vertices[e.v].position
        canvas.line(pu.x, pu.y, pv.x, pv.y, stroke, 1.5 if faint else 2.5, cls="graph-edge")
    role_fill = {"center": "#d62728", "border_mid": "#1f77b4", "endpoint": "#2ca02c"}
    for v in g.vertices.values():
        fill = role_fill[v.role.value] if not faint else "#aaaaaa"
        canvas.circle(v.position.x, v.position.y, _point_radius(artifacts) * 4, fill, cls="vertex")
        if not faint:
            canvas.text(v.position.x, v.position.y, str(v.id), size=13)


def _draw_route(canvas, artifacts):
    g = artifacts.graph
    route = artifacts.route
    span = float(
        np.max(artifacts.cloud.points.max(axis=0) - artifacts.cloud.points.min(axis=0))
    )
    offset_step = 0.012 * span
    seen: dict[int, int] = {}
    for i, eid in enumerate(route.traversed_edges):
        u, v = route.walk[i], route.walk[i + 1]
        pu = g.vertices[u].position
        pv = g.vertices[v].position
        # repeated traversals of the same edge get a growing sideways offset
        k = seen.get(eid, 0)
        seen[eid] = k + 1
        dx, dy = pv.x - pu.x, pv.y - pu.y
        length = math.hypot(dx, dy) or 1.0
        nx, ny = -dy / length, dx / length
        off = offset_step * ((k + 1) // 2) * (1 if k % 2 else -1) if k else 0.0
        ax, ay = pu.x + nx * off, pu.y + ny * off
        bx, by = pv.x + nx * off, pv.y + ny * off
        color = PALETTE[i % len(PALETTE)]
        canvas.line(ax, ay, bx, by, color, 2.5, cls="route-edge")
        _arrow_head(canvas, ax, ay, bx, by, color, span)
        canvas.text((ax + bx) / 2 + nx * off, (ay + by) / 2 + ny * off, str(i), size=11)


def _arrow_head(canvas, ax, ay, bx, by, color, span):
    size = 0.018 * span
    ang = math.atan2(by - ay, bx - ax)
    tip = (bx, by)
    left = (bx - size * math.cos(ang - 0.45), by - size * math.sin(ang - 0.45))
    right = (bx - size * math.cos(ang + 0.45), by - size * math.sin(ang + 0.45))
    canvas.polygon_filled([tip, left, right], color, cls="arrow")


def _draw_paths(canvas, artifacts):
    from .planner import footprint_samples, RobotParams

    robot = RobotParams(
        artifacts.config.robot.half_length,
        artifacts.config.robot.half_width,
        artifacts.config.robot.sample_points,
    )
    for idx, path in enumerate(artifacts.paths):
        color = PALETTE[idx % len(PALETTE)]
        pts = [(c.x, c.y) for c in path.configs]
        if len(pts) >= 2:
            canvas.polyline(pts, color, 2.0, cls="path")
        stride = max(1, len(path.configs) // 6)
        for c in path.configs[::stride]:
            hl, hw = robot.half_length, robot.half_width
            cos_t, sin_t = math.cos(c.theta), math.sin(c.theta)
            corners = [
                (c.x + cos_t * sx - sin_t * sy, c.y + sin_t * sx + cos_t * sy)
                for sx, sy in ((-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw))
            ]
            canvas.polyline(corners, color, 1.0, cls="footprint", closed=True)
