"""Non-convex boundary estimation for point clusters.

The boundary of a cluster is traced by k-nearest-neighbor gift wrapping:
walk the outline clockwise, at each step picking among the k nearest unused
points the one reached by the smallest clockwise rotation from the direction
back to the previous vertex, rejecting candidates whose edge would cross the
partial hull. Failure (dead end, self-intersection, poor containment)
escalates k; the last resort is the convex hull.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

from .errors import DegenerateInput, TooFewPoints
from .geometry import (
    EPS_LEN,
    Point2,
    Polygon2,
    points_in_polygon,
    polyline_length,
)

CONTAINMENT_MIN = 0.95
DEFAULT_SLIDING_FACTOR = 12


@dataclass
class Boundary:
    cluster_id: int
    polygon: Polygon2
    center: Point2
    sliding_factor: int


def cluster_center(cluster) -> Point2:
    """Arithmetic centroid of the cluster points."""
    arr = np.asarray(cluster, dtype=float).reshape(-1, 2)
    if len(arr) == 0:
        raise TooFewPoints("cannot take the center of an empty cluster")
    c = arr.mean(axis=0)
    return Point2(float(c[0]), float(c[1]))


def border_midpoint(border) -> Point2:
    """Point at half the arc length along the border polyline."""
    arr = np.asarray(border, dtype=float).reshape(-1, 2)
    if len(arr) == 0:
        raise TooFewPoints("border polyline is empty")
    if len(arr) == 1:
        return Point2(float(arr[0, 0]), float(arr[0, 1]))
    seg = np.linalg.norm(np.diff(arr, axis=0), axis=1)
    half = 0.5 * float(seg.sum())
    acc = 0.0
    for i, s in enumerate(seg):
        if acc + s >= half:
            t = 0.0 if s == 0 else (half - acc) / s
            p = arr[i] + t * (arr[i + 1] - arr[i])
            return Point2(float(p[0]), float(p[1]))
        acc += s
    p = arr[-1]
    return Point2(float(p[0]), float(p[1]))


def estimate_boundary(cluster, sliding_factor: int = DEFAULT_SLIDING_FACTOR, cluster_id: int = -1) -> Boundary:
    """Estimate a simple CCW boundary polygon around the cluster points.

    Raises TooFewPoints below 3 distinct points and DegenerateInput for
    collinear input. The returned sliding_factor is the neighborhood size
    that actually produced the polygon.
    """
    arr = np.asarray(cluster, dtype=float).reshape(-1, 2)
    pts = np.unique(arr, axis=0)
    if len(pts) < 3:
        raise TooFewPoints(f"boundary needs >= 3 distinct points, got {len(pts)}")
    if _collinear(pts):
        raise DegenerateInput("cluster points are collinear")
    center = cluster_center(arr)

    k0 = max(3, int(sliding_factor))
    tree = cKDTree(pts)
    for k in range(min(k0, len(pts) - 1), len(pts)):
        verts = _knn_hull(pts, tree, k)
        if verts is None:
            continue
        try:
            polygon = Polygon2(verts)
        except DegenerateInput:
            continue
        if _containment(arr, polygon) >= CONTAINMENT_MIN:
            return Boundary(cluster_id, polygon, center, k)

    hull = ConvexHull(pts)
    polygon = Polygon2(pts[hull.vertices])
    return Boundary(cluster_id, polygon, center, len(pts))


def _collinear(pts: np.ndarray) -> bool:
    d = pts - pts[0]
    cross = np.abs(d[:, 0, None] * d[None, :, 1] - d[:, 1, None] * d[None, :, 0])
    return bool(np.max(cross) < EPS_LEN * EPS_LEN)


def _containment(pts: np.ndarray, polygon: Polygon2) -> float:
    return float(np.mean(points_in_polygon(pts, polygon)))


def _knn_hull(pts: np.ndarray, tree: cKDTree, k: int) -> np.ndarray | None:
    """One clockwise gift-wrapping pass; None when the walk dead-ends."""
    n = len(pts)
    start = int(np.lexsort((pts[:, 0], pts[:, 1]))[0])  # min y, then min x
    alive = np.ones(n, dtype=bool)
    alive[start] = False
    hull_idx = [start]
    current = start
    back_angle = 0.0  # pretend we arrived moving in -x, previous point toward +x

    while True:
        allow_close = len(hull_idx) >= 4
        cand = _nearest_alive(pts, tree, alive, current, k, start if allow_close else None)
        if len(cand) == 0:
            return None
        chosen = -1
        cur = pts[current]
        angles = np.arctan2(pts[cand, 1] - cur[1], pts[cand, 0] - cur[0])
        rot = np.mod(back_angle - angles, 2 * math.pi)
        rot[rot < 1e-12] = 2 * math.pi  # straight back is the last resort
        dists = np.linalg.norm(pts[cand] - cur, axis=1)
        for idx in np.lexsort((dists, rot)):
            c = cand[idx]
            if not _edge_crosses_hull(pts, hull_idx, cur, pts[c]):
                chosen = c
                break
        if chosen < 0:
            return None
        if chosen == start:
            return pts[hull_idx]
        hull_idx.append(chosen)
        alive[chosen] = False
        prev = cur
        current = chosen
        back_angle = math.atan2(prev[1] - pts[current][1], prev[0] - pts[current][0])
        if len(hull_idx) > n:  # pragma: no cover - walk consumes points, cannot loop
            return None


def _nearest_alive(
    pts: np.ndarray,
    tree: cKDTree,
    alive: np.ndarray,
    current: int,
    k: int,
    extra: int | None,
) -> np.ndarray:
    """Indices of the k nearest alive points to pts[current] (plus the start point)."""
    n = len(pts)
    want = k
    query = min(n, 2 * k + 8)
    while True:
        _, idx = tree.query(pts[current], k=query)
        idx = np.atleast_1d(idx)
        good = [i for i in idx if alive[i] or (extra is not None and i == extra)]
        if len(good) >= min(want, int(alive.sum()) + (1 if extra is not None else 0)):
            return np.array(good[:want], dtype=int)
        if query >= n:
            return np.array(good[:want], dtype=int)
        query = min(n, query * 2)


def _edge_crosses_hull(pts: np.ndarray, hull_idx: list[int], a: np.ndarray, b: np.ndarray) -> bool:
    """Proper-crossing test of segment (a, b) against all hull edges so far."""
    if len(hull_idx) < 3:
        return False
    h = pts[np.asarray(hull_idx[:-1])]
    h2 = pts[np.asarray(hull_idx[1:])]
    d1 = _cross2(b - a, h - a)
    d2 = _cross2(b - a, h2 - a)
    d3 = _cross2(h2 - h, a - h)
    d4 = _cross2(h2 - h, b - h)
    return bool(np.any((d1 * d2 < 0) & (d3 * d4 < 0)))


def _cross2(u, v) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
