"""Ground-truth-labeled synthetic point clouds of the five joint shapes.

Each fixture is a set of disjoint regions: one w x w junction square per
joint ("cross" role) plus rectangular bars ("bar" role) attached to it,
where w is the bar width. Bars whose axis is not aligned with the junction
square penetrate it slightly and get the overlap clipped away, so regions
tile the shape and share borders of usable length.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import shapely.geometry as shp

from .cloud import PointCloud, write_csv
from .errors import InvalidSpec
from .geometry import Polygon2, signed_area

DROPOUT_CAP = 0.9


class Shape(enum.Enum):
    CROSS = "cross"
    T = "t"
    K = "k"
    L = "l"
    I = "i"


@dataclass
class StructureSpec:
    shape: Shape = Shape.CROSS
    bar_width: float = 0.3
    bar_lengths: list[float] = field(default_factory=lambda: [0.5])
    density: float = 4000.0
    noise_sigma: float = 0.005
    dropout_slope: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.shape, str):
            self.shape = Shape(self.shape.lower())
        if self.bar_width <= 0:
            raise InvalidSpec("bar_width must be positive")
        if not self.bar_lengths or any(l <= 0 for l in self.bar_lengths):
            raise InvalidSpec("bar_lengths must be positive")
        if self.density <= 0:
            raise InvalidSpec("density must be positive")
        if self.noise_sigma < 0:
            raise InvalidSpec("noise_sigma must be non-negative")
        if self.dropout_slope < 0:
            raise InvalidSpec("dropout_slope must be non-negative")

    def length_for(self, bar_index: int) -> float:
        return self.bar_lengths[bar_index % len(self.bar_lengths)]


@dataclass
class Region:
    region_id: int
    role: str  # "bar" or "cross"
    polygon: Polygon2


@dataclass
class LabeledCloud:
    cloud: PointCloud
    true_label: np.ndarray
    true_regions: list[Region]
    origins: np.ndarray  # noiseless positions, index-aligned with the cloud

    def __len__(self) -> int:
        return len(self.cloud)


# ---------------------------------------------------------------------------
# region construction
# ---------------------------------------------------------------------------

def _square(cx: float, cy: float, w: float) -> shp.Polygon:
    h = w / 2.0
    return shp.box(cx - h, cy - h, cx + h, cy + h)


def _strip(angle: float, r_in: float, length: float, width: float) -> shp.Polygon:
    """Rectangle of the given width along the ray at ``angle`` from the origin."""
    u = np.array([math.cos(angle), math.sin(angle)])
    n = np.array([-u[1], u[0]])
    h = width / 2.0
    corners = [
        r_in * u - h * n,
        (r_in + length) * u - h * n,
        (r_in + length) * u + h * n,
        r_in * u + h * n,
    ]
    return shp.Polygon([tuple(c) for c in corners])


def _axis_flush(w: float) -> float:
    return w / 2.0


def _to_polygon2(poly: shp.Polygon) -> Polygon2:
    coords = np.asarray(poly.exterior.coords[:-1], dtype=float)
    if signed_area(coords) < 0:
        coords = coords[::-1]
    return Polygon2(coords)


def _build_regions(spec: StructureSpec) -> list[Region]:
    w = spec.bar_width
    regions: list[Region] = []

    def add(role: str, poly: shp.Polygon):
        regions.append(Region(len(regions), role, _to_polygon2(poly)))

    if spec.shape in (Shape.CROSS, Shape.T, Shape.L):
        angles = {
            Shape.CROSS: [0.0, math.pi / 2, math.pi, 3 * math.pi / 2],
            Shape.T: [0.0, math.pi, 3 * math.pi / 2],
            Shape.L: [0.0, math.pi / 2],
        }[spec.shape]
        add("cross", _square(0, 0, w))
        for i, ang in enumerate(angles):
            add("bar", _strip(ang, _axis_flush(w), spec.length_for(i), w))
    elif spec.shape == Shape.K:
        # three bars meeting at one junction, 120 degrees apart; the slanted
        # bars penetrate the junction square and the overlap is clipped so
        # each pair shares a real border instead of a corner touch
        square = _square(0, 0, w)
        add("cross", square)
        for i, ang in enumerate([0.0, 2 * math.pi / 3, 4 * math.pi / 3]):
            r_in = _axis_flush(w) if i == 0 else 0.4 * w
            bar = _strip(ang, r_in, spec.length_for(i), w).difference(square)
            if bar.geom_type != "Polygon" or bar.is_empty:
                raise InvalidSpec("K-shape bar clipping produced a degenerate region")
            add("bar", bar)
    elif spec.shape == Shape.I:
        # bottom flange, junction, web, junction, top flange stacked on y
        lf = spec.length_for(0)
        lw = spec.length_for(1)
        half_w = lw / 2.0
        add("bar", shp.box(-lf / 2, -half_w - 2 * w, lf / 2, -half_w - w))
        add("cross", shp.box(-w / 2, -half_w - w, w / 2, -half_w))
        add("bar", shp.box(-w / 2, -half_w, w / 2, half_w))
        add("cross", shp.box(-w / 2, half_w, w / 2, half_w + w))
        add("bar", shp.box(-lf / 2, half_w + w, lf / 2, half_w + 2 * w))
    else:  # pragma: no cover
        raise InvalidSpec(f"unsupported shape {spec.shape}")
    return regions


def _sample_region(poly: Polygon2, density: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform points inside the polygon by rejection sampling in its bbox."""
    from .geometry import points_in_polygon

    target = max(1, round(density * poly.area))
    lo = poly.vertices.min(axis=0)
    hi = poly.vertices.max(axis=0)
    out: list[np.ndarray] = []
    got = 0
    while got < target:
        batch = rng.uniform(lo, hi, size=(max(64, 2 * (target - got)), 2))
        accepted = batch[points_in_polygon(batch, poly)][: target - got]
        out.append(accepted)
        got += len(accepted)
    return np.vstack(out)


def generate(spec: StructureSpec) -> LabeledCloud:
    """Deterministically sample a labeled cloud for the given structure."""
    rng = np.random.default_rng(spec.seed)
    regions = _build_regions(spec)
    origins_parts = []
    labels_parts = []
    for region in regions:
        pts = _sample_region(region.polygon, spec.density, rng)
        origins_parts.append(pts)
        labels_parts.append(np.full(len(pts), region.region_id, dtype=int))
    origins = np.vstack(origins_parts)
    labels = np.concatenate(labels_parts)
    noisy = origins + rng.normal(0.0, spec.noise_sigma, size=origins.shape)
    labeled = LabeledCloud(PointCloud(noisy), labels, regions, origins)
    if spec.dropout_slope > 0:
        labeled = degrade(labeled, (1.0, 0.0), spec.dropout_slope, spec.seed + 1)
    return labeled


def degrade(
    labeled: LabeledCloud,
    axis: tuple[float, float],
    slope: float,
    seed: int,
) -> LabeledCloud:
    """Drop points with probability growing linearly along ``axis``.

    The drop probability is slope * (projection - min projection), capped at
    DROPOUT_CAP. Labels and noiseless origins of surviving points are kept.
    """
    if slope < 0:
        raise InvalidSpec("dropout slope must be non-negative")
    if slope == 0 or len(labeled) == 0:
        return labeled
    u = np.asarray(axis, dtype=float)
    u = u / np.linalg.norm(u)
    t = labeled.cloud.points @ u
    p_drop = np.clip(slope * (t - t.min()), 0.0, DROPOUT_CAP)
    rng = np.random.default_rng(seed)
    keep = rng.uniform(size=len(t)) >= p_drop
    intensity = None
    if labeled.cloud.intensity is not None:
        intensity = labeled.cloud.intensity[keep]
    return LabeledCloud(
        PointCloud(labeled.cloud.points[keep], intensity),
        labeled.true_label[keep],
        labeled.true_regions,
        labeled.origins[keep],
    )


# ---------------------------------------------------------------------------
# fixture export
# ---------------------------------------------------------------------------

def export_fixture(labeled: LabeledCloud, out_dir: str | Path, name: str = "cloud") -> tuple[Path, Path]:
    """Write the cloud CSV plus a JSON ground-truth sidecar; returns both paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{name}.csv"
    truth_path = out / f"{name}.truth.json"
    write_csv(labeled.cloud, csv_path)
    truth = {
        "labels": [int(l) for l in labeled.true_label],
        "regions": [
            {
                "id": r.region_id,
                "role": r.role,
                "polygon": [[float(x), float(y)] for x, y in r.polygon.vertices],
            }
            for r in labeled.true_regions
        ],
    }
    truth_path.write_text(json.dumps(truth, sort_keys=True))
    return csv_path, truth_path
