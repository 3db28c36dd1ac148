"""Planar geometric primitives and numerically careful low-level operations.

All coordinates are meters. Point collections are handled as float64 numpy
arrays of shape (n, 2); single points cross module boundaries as Point2.
Everything here is pure and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput

# Coincidence tolerance for point dedup; millimeter sensor noise dwarfs it.
EPS_LEN = 1e-6

# Relative eigenvalue gap below which a 2x2 covariance counts as isotropic.
PCA_TIE_RTOL = 1e-9


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DegenerateInput(f"non-finite point ({self.x}, {self.y})")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    def distance_to(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Segment2:
    a: Point2
    b: Point2

    def __post_init__(self):
        if self.a.distance_to(self.b) < EPS_LEN:
            raise DegenerateInput("segment endpoints coincide")

    @property
    def length(self) -> float:
        return self.a.distance_to(self.b)


@dataclass(frozen=True)
class Line2:
    """Infinite line through ``origin`` with a unit ``direction``."""

    origin: Point2
    direction: tuple[float, float]

    def __post_init__(self):
        norm = math.hypot(*self.direction)
        if abs(norm - 1.0) > 1e-9:
            if norm < EPS_LEN:
                raise DegenerateInput("line direction has zero length")
            object.__setattr__(
                self, "direction", (self.direction[0] / norm, self.direction[1] / norm)
            )

    def point_at(self, t: float) -> Point2:
        return Point2(
            self.origin.x + t * self.direction[0],
            self.origin.y + t * self.direction[1],
        )


class Polygon2:
    """Simple polygon with counter-clockwise vertex order.

    Vertices are stored as an (n, 2) float array. Clockwise input is
    reversed on construction; degenerate or self-intersecting input raises.
    """

    __slots__ = ("vertices",)

    def __init__(self, vertices, validate: bool = True):
        arr = np.asarray(vertices, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 3:
            raise DegenerateInput("polygon needs at least 3 planar vertices")
        if not np.all(np.isfinite(arr)):
            raise DegenerateInput("polygon has non-finite vertices")
        area = signed_area(arr)
        if abs(area) < EPS_LEN * EPS_LEN:
            raise DegenerateInput("polygon area is numerically zero")
        if area < 0.0:
            arr = arr[::-1].copy()
        self.vertices = arr
        if validate and _has_self_intersection(arr):
            raise DegenerateInput("polygon is self-intersecting")

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def area(self) -> float:
        return signed_area(self.vertices)

    @property
    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge start and end arrays, both shaped (n, 2)."""
        return self.vertices, np.roll(self.vertices, -1, axis=0)

    def centroid(self) -> Point2:
        c = self.vertices.mean(axis=0)
        return Point2(float(c[0]), float(c[1]))

    def __eq__(self, other) -> bool:
        return isinstance(other, Polygon2) and np.array_equal(
            self.vertices, other.vertices
        )


def signed_area(vertices: np.ndarray) -> float:
    x = vertices[:, 0]
    y = vertices[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _has_self_intersection(vertices: np.ndarray) -> bool:
    """Check all non-adjacent edge pairs for a proper crossing."""
    n = len(vertices)
    a0 = vertices
    a1 = np.roll(vertices, -1, axis=0)
    i_idx, j_idx = np.triu_indices(n, k=2)
    # edges (0, n-1) are adjacent around the wrap
    keep = ~((i_idx == 0) & (j_idx == n - 1))
    i_idx, j_idx = i_idx[keep], j_idx[keep]
    if len(i_idx) == 0:
        return False
    p, p2 = a0[i_idx], a1[i_idx]
    q, q2 = a0[j_idx], a1[j_idx]
    d1 = _cross(p2 - p, q - p)
    d2 = _cross(p2 - p, q2 - p)
    d3 = _cross(q2 - q, p - q)
    d4 = _cross(q2 - q, p2 - q)
    proper = (d1 * d2 < 0) & (d3 * d4 < 0)
    return bool(np.any(proper))


def _cross(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def polyline_length(points) -> float:
    """Sum of consecutive Euclidean distances; 0 for a single point."""
    arr = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(arr) < 1:
        raise DegenerateInput("polyline needs at least one point")
    if len(arr) == 1:
        return 0.0
    return float(np.sum(np.linalg.norm(np.diff(arr, axis=0), axis=1)))


def pca_axes(points) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of the 2x2 point covariance.

    Returns (eigenvalues, eigenvectors) sorted by descending eigenvalue,
    eigenvectors as columns.
    """
    arr = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(arr) < 2:
        raise DegenerateInput("need at least 2 points for a principal axis")
    centered = arr - arr.mean(axis=0)
    cov = centered.T @ centered / len(arr)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1]
    return vals[order], vecs[:, order]


def pca_principal_line(points) -> Line2:
    """Line through the centroid along the dominant covariance eigenvector.

    Isotropic covariance (equal eigenvalues within PCA_TIE_RTOL) falls back
    to direction (1, 0) so the output stays deterministic. The direction sign
    is canonicalized to dx > 0, or dy > 0 when dx == 0.
    """
    arr = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(arr) < 2:
        raise DegenerateInput("need at least 2 points for a principal line")
    centroid = arr.mean(axis=0)
    if np.max(np.linalg.norm(arr - centroid, axis=1)) < EPS_LEN:
        raise DegenerateInput("all points coincide")
    vals, vecs = pca_axes(arr)
    if vals[0] - vals[1] <= PCA_TIE_RTOL * max(vals[0], EPS_LEN**2):
        direction = (1.0, 0.0)
    else:
        d = vecs[:, 0]
        if d[0] < 0 or (d[0] == 0 and d[1] < 0):
            d = -d
        direction = (float(d[0]), float(d[1]))
    return Line2(Point2(float(centroid[0]), float(centroid[1])), direction)


def pca_axis_ratio(points) -> float:
    """Ratio of the larger to the smaller covariance eigenvalue (>= 1)."""
    vals, _ = pca_axes(points)
    lo = max(float(vals[1]), EPS_LEN**2)
    return float(vals[0]) / lo


def line_polygon_intersections(line: Line2, poly: Polygon2) -> list[Point2]:
    """All crossings of the infinite line with the polygon edges.

    Deduplicated within EPS_LEN and sorted by parameter along the line.
    Edges collinear with the line contribute both endpoints.
    """
    o = np.array([line.origin.x, line.origin.y])
    d = np.array(line.direction)
    normal = np.array([-d[1], d[0]])
    a, b = poly.edges
    sa = (a - o) @ normal
    sb = (b - o) @ normal
    hits: list[tuple[float, np.ndarray]] = []
    for i in range(len(a)):
        if abs(sa[i]) < EPS_LEN and abs(sb[i]) < EPS_LEN:
            # edge lies along the line
            hits.append((float((a[i] - o) @ d), a[i]))
            hits.append((float((b[i] - o) @ d), b[i]))
        elif (sa[i] > 0) != (sb[i] > 0) or abs(sa[i]) < EPS_LEN or abs(sb[i]) < EPS_LEN:
            denom = sa[i] - sb[i]
            if abs(denom) < 1e-15:
                continue
            u = sa[i] / denom
            if -EPS_LEN <= u <= 1 + EPS_LEN:
                p = a[i] + np.clip(u, 0.0, 1.0) * (b[i] - a[i])
                hits.append((float((p - o) @ d), p))
    hits.sort(key=lambda h: h[0])
    out: list[Point2] = []
    last: np.ndarray | None = None
    for _, p in hits:
        if last is None or np.linalg.norm(p - last) >= EPS_LEN:
            out.append(Point2(float(p[0]), float(p[1])))
            last = p
    return out


def points_in_polygon(points, poly: Polygon2) -> np.ndarray:
    """Vectorized ray-cast containment test for an array of points.

    Points within EPS_LEN of an edge count as inside, matching the scalar
    operation below.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    a, b = poly.edges
    x, y = pts[:, 0:1], pts[:, 1:2]
    ax, ay = a[:, 0][None, :], a[:, 1][None, :]
    bx, by = b[:, 0][None, :], b[:, 1][None, :]
    straddles = (ay > y) != (by > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = ax + (y - ay) * (bx - ax) / (by - ay)
    crossings = straddles & (x < x_cross)
    inside = np.sum(crossings, axis=1) % 2 == 1
    on_edge = points_polygon_distance(pts, poly) <= EPS_LEN
    return inside | on_edge


def point_in_polygon_raycast(p: Point2, poly: Polygon2) -> bool:
    """True iff p is strictly inside; boundary points count as inside."""
    return bool(points_in_polygon(p.as_array()[None, :], poly)[0])


def points_segments_distance(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from each point to the nearest of the segments (a[k], b[k])."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    ab = b - a
    ab_len2 = np.sum(ab * ab, axis=1)
    ab_len2 = np.where(ab_len2 < 1e-300, 1.0, ab_len2)
    ap = pts[:, None, :] - a[None, :, :]
    t = np.clip(np.sum(ap * ab[None, :, :], axis=2) / ab_len2[None, :], 0.0, 1.0)
    proj = a[None, :, :] + t[:, :, None] * ab[None, :, :]
    d = np.linalg.norm(pts[:, None, :] - proj, axis=2)
    return d.min(axis=1)


def points_polygon_distance(points, poly: Polygon2) -> np.ndarray:
    """Distance from each point to the polygon outline."""
    a, b = poly.edges
    return points_segments_distance(np.asarray(points, dtype=float), a, b)


def segments_properly_intersect(p1, p2, q1, q2) -> bool:
    """True iff open segments (p1, p2) and (q1, q2) cross at a single interior point."""
    p1, p2, q1, q2 = (np.asarray(v, dtype=float) for v in (p1, p2, q1, q2))
    d1 = _cross(p2 - p1, q1 - p1)
    d2 = _cross(p2 - p1, q2 - p1)
    d3 = _cross(q2 - q1, p1 - q1)
    d4 = _cross(q2 - q1, p2 - q1)
    return bool((d1 * d2 < 0) and (d3 * d4 < 0))
