"""EM-GMM clustering plus neighbor-ratio cluster-count selection.

The cluster count is chosen by sweeping a candidate range, estimating a
boundary per cluster, counting neighbor relations (clusters sharing a border
polyline of length >= l_b) and scoring each candidate count with

    r = n_m / (n_m + n_s) + n_m / n_c

where n_m and n_s are the largest and second largest per-cluster neighbor
counts. The candidate with the highest r wins; ties go to the smaller count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import Boundary, estimate_boundary
from .cloud import PointCloud, mean_nn_spacing
from .errors import (
    BridgenavError,
    SingularCovariance,
    TooFewPoints,
    UndefinedRatio,
)
from .geometry import pca_axis_ratio, points_segments_distance, polyline_length

TOL_LL = 1e-6  # relative log-likelihood improvement for convergence
MAX_ITER = 200
REG_FLOOR = 1e-8  # m^2, covariance eigenvalue floor
N_INIT = 4  # independent seeded restarts, best final log-likelihood wins
MAX_RESEEDS = 5

LOG_2PI = math.log(2.0 * math.pi)


@dataclass
class GmmModel:
    k: int
    weights: np.ndarray  # (k,)
    means: np.ndarray  # (k, 2)
    covariances: np.ndarray  # (k, 2, 2)


@dataclass
class ClusterSet:
    labels: np.ndarray  # (n,) cluster id per point
    clusters: list[np.ndarray]  # per-id point arrays
    model: GmmModel
    responsibilities: np.ndarray  # (n, k)
    ll_trace: list[float]  # log-likelihood after each E step
    reseeds: list[int]  # trace indices where an empty cluster was re-seeded


@dataclass
class NeighborStats:
    n_c: int
    n_m: int
    n_s: int
    r: float


@dataclass
class SegmentationResult:
    cluster_set: ClusterSet
    n_o: int
    stats: list[NeighborStats]
    boundaries: list[Boundary]
    neighbor_matrix: np.ndarray
    borders: dict[tuple[int, int], np.ndarray]
    eps_border: float
    hub_cluster: int = -1  # cluster id with the most neighbors (cross-area pick)
    skipped: list[tuple[int, str]] = field(default_factory=list)


def _points_of(cloud) -> np.ndarray:
    if isinstance(cloud, PointCloud):
        return cloud.points
    return np.asarray(cloud, dtype=float).reshape(-1, 2)


# ---------------------------------------------------------------------------
# EM-GMM
# ---------------------------------------------------------------------------

def selection_ratio(n_m: int, n_s: int, n_c: int) -> float:
    """Cluster-count score n_m/(n_m+n_s) + n_m/n_c, evaluated exactly."""
    if n_c < 1:
        raise UndefinedRatio("candidate count must be >= 1")
    if n_m < n_s or n_s < 0:
        raise UndefinedRatio("expected n_m >= n_s >= 0")
    if n_m + n_s == 0:
        raise UndefinedRatio("no neighbor relations at all")
    return n_m / (n_m + n_s) + n_m / n_c


def em_gmm_fit(
    cloud,
    k: int,
    seed: int,
    tol: float = TOL_LL,
    max_iter: int = MAX_ITER,
    reg_floor: float = REG_FLOOR,
    n_init: int = N_INIT,
) -> ClusterSet:
    """Fit a k-component Gaussian mixture and hard-label the points.

    Deterministic for a fixed seed and invariant to the point order: points
    are canonically pre-sorted before seeding and all reductions run in that
    order. The best of n_init k-means++-seeded runs (by final log-likelihood)
    is returned.
    """
    pts = _points_of(cloud)
    n = len(pts)
    if k < 1:
        raise TooFewPoints("k must be >= 1")
    if n < k:
        raise TooFewPoints(f"{n} points cannot support {k} clusters")

    order = np.lexsort((pts[:, 1], pts[:, 0]))
    sorted_pts = pts[order]

    best = None
    for child_seed in np.random.SeedSequence(seed).spawn(max(1, n_init)):
        rng = np.random.default_rng(child_seed)
        result = _em_single(sorted_pts, k, rng, tol, max_iter, reg_floor)
        if best is None or result[-1] > best[-1]:
            best = result
    labels_sorted, resp_sorted, model, ll_trace, reseeds, _ = best

    labels = np.empty(n, dtype=int)
    labels[order] = labels_sorted
    resp = np.empty_like(resp_sorted)
    resp[order] = resp_sorted
    clusters = [pts[labels == j] for j in range(k)]
    return ClusterSet(labels, clusters, model, resp, ll_trace, reseeds)


def _em_single(pts, k, rng, tol, max_iter, reg_floor):
    n = len(pts)
    means = _kmeans_init(pts, k, rng)
    labels = _nearest_center_labels(pts, means)
    weights = np.full(k, 1.0 / k)
    covs = np.empty((k, 2, 2))
    global_cov = np.cov(pts.T) + reg_floor * np.eye(2)
    for j in range(k):
        sel = pts[labels == j]
        if len(sel) < 3:
            covs[j] = global_cov
        else:
            covs[j] = np.cov(sel.T) + reg_floor * np.eye(2)
        weights[j] = max(1, (labels == j).sum()) / n
    weights /= weights.sum()

    ll_trace: list[float] = []
    reseeds: list[int] = []
    prev_ll = -np.inf
    reseed_budget = MAX_RESEEDS
    it = 0
    while it < max_iter:
        it += 1
        log_resp, ll = _e_step(pts, weights, means, covs)
        ll_trace.append(ll)
        resp = np.exp(log_resp)
        converged = np.isfinite(prev_ll) and abs(ll - prev_ll) <= tol * abs(prev_ll)
        prev_ll = ll
        weights, means, covs = _m_step(pts, resp, reg_floor)
        if converged:
            hard = np.argmax(resp, axis=1)
            empty = [j for j in range(len(weights)) if not np.any(hard == j)]
            if empty and reseed_budget > 0:
                reseed_budget -= 1
                reseeds.append(len(ll_trace) - 1)
                worst = np.argsort(np.max(resp, axis=1))
                for slot, j in enumerate(empty):
                    p = pts[worst[slot % n]]
                    means[j] = p
                    covs[j] = np.cov(pts.T) * 0.05 + reg_floor * np.eye(2)
                    weights[j] = 1.0 / n
                weights /= weights.sum()
                prev_ll = -np.inf
                continue
            break

    log_resp, ll = _e_step(pts, weights, means, covs)
    resp = np.exp(log_resp)
    labels = np.argmax(resp, axis=1)
    model = GmmModel(k, weights.copy(), means.copy(), covs.copy())
    return labels, resp, model, ll_trace, reseeds, ll


def _kmeans_init(pts, k, rng, lloyd_iters: int = 25):
    """k-means++ seeding followed by a few Lloyd refinement sweeps."""
    n = len(pts)
    centers = np.empty((k, 2))
    centers[0] = pts[rng.integers(n)]
    d2 = np.sum((pts - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[j] = pts[rng.integers(n)]
        else:
            centers[j] = pts[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((pts - centers[j]) ** 2, axis=1))
    for _ in range(lloyd_iters):
        labels = _nearest_center_labels(pts, centers)
        moved = 0.0
        for j in range(k):
            sel = pts[labels == j]
            if len(sel) == 0:
                continue
            new = sel.mean(axis=0)
            moved = max(moved, float(np.linalg.norm(new - centers[j])))
            centers[j] = new
        if moved < 1e-12:
            break
    return centers


def _nearest_center_labels(pts, centers):
    d2 = np.sum((pts[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    return np.argmin(d2, axis=1)


def _e_step(pts, weights, means, covs):
    n, k = len(pts), len(weights)
    log_prob = np.empty((n, k))
    for j in range(k):
        a, b = covs[j, 0, 0], covs[j, 0, 1]
        c = covs[j, 1, 1]
        det = a * c - b * b
        if not np.isfinite(det) or det <= 0:
            raise SingularCovariance(f"component {j} covariance is singular")
        dx = pts[:, 0] - means[j, 0]
        dy = pts[:, 1] - means[j, 1]
        quad = (c * dx * dx - 2.0 * b * dx * dy + a * dy * dy) / det
        log_prob[:, j] = math.log(weights[j]) - LOG_2PI - 0.5 * math.log(det) - 0.5 * quad
    m = log_prob.max(axis=1, keepdims=True)
    lse = m[:, 0] + np.log(np.sum(np.exp(log_prob - m), axis=1))
    ll = float(np.sum(lse))
    return log_prob - lse[:, None], ll


def _m_step(pts, resp, reg_floor):
    n, k = resp.shape
    nk = resp.sum(axis=0)
    nk = np.maximum(nk, 1e-12)
    weights = nk / n
    means = (resp.T @ pts) / nk[:, None]
    covs = np.empty((k, 2, 2))
    for j in range(k):
        d = pts - means[j]
        covs[j] = (resp[:, j, None] * d).T @ d / nk[j]
        covs[j] += reg_floor * np.eye(2)
    return weights, means, covs


# ---------------------------------------------------------------------------
# neighbor relations
# ---------------------------------------------------------------------------

def neighbor_matrix(
    boundaries: list[Boundary],
    l_b: float,
    eps_border: float,
) -> tuple[np.ndarray, dict[tuple[int, int], np.ndarray]]:
    """Symmetric neighbor matrix plus the border polyline per neighbor pair.

    The border seen from cluster i is the polyline through the vertices of
    boundary i lying within eps_border of boundary j, kept in outline order
    (rotated so the sequence does not straddle the largest cyclic gap).
    Two clusters are neighbors when either directional border reaches l_b.
    """
    m = len(boundaries)
    matrix = np.zeros((m, m), dtype=bool)
    borders: dict[tuple[int, int], np.ndarray] = {}
    outlines = [b.polygon.vertices for b in boundaries]
    edge_arrays = [b.polygon.edges for b in boundaries]
    for i in range(m):
        for j in range(i + 1, m):
            border_ij = _directional_border(outlines[i], edge_arrays[j], eps_border)
            border_ji = _directional_border(outlines[j], edge_arrays[i], eps_border)
            len_ij = polyline_length(border_ij) if len(border_ij) else 0.0
            len_ji = polyline_length(border_ji) if len(border_ji) else 0.0
            if max(len_ij, len_ji) >= l_b:
                matrix[i, j] = matrix[j, i] = True
                borders[(i, j)] = border_ij if len_ij >= len_ji else border_ji
    return matrix, borders


def _directional_border(outline: np.ndarray, other_edges, eps_border: float) -> np.ndarray:
    a, b = other_edges
    d = points_segments_distance(outline, a, b)
    idx = np.nonzero(d <= eps_border)[0]
    if len(idx) == 0:
        return np.empty((0, 2))
    if len(idx) == 1:
        return outline[idx]
    m = len(outline)
    gaps = np.diff(np.r_[idx, idx[0] + m])
    start = (np.argmax(gaps) + 1) % len(idx)
    ordered = np.r_[idx[start:], idx[:start]]
    return outline[ordered]


# ---------------------------------------------------------------------------
# cluster-count selection
# ---------------------------------------------------------------------------

def _evaluate_fit(cs: ClusterSet, sliding_factor: int, l_b: float, eps_border: float):
    """Boundaries, neighbor matrix and the restart score for one EM fit.

    The score prefers a high ratio r, then a unique most-neighbored cluster,
    then a compact (low axis ratio) hub. Cross areas are the compact regions
    of the structure, so among equally-scored segmentations the one whose hub
    looks like a cross area wins.
    """
    k = cs.model.k
    bounds = [
        estimate_boundary(cs.clusters[j], sliding_factor, cluster_id=j)
        for j in range(k)
    ]
    matrix, borders = neighbor_matrix(bounds, l_b, eps_border)
    counts = matrix.sum(axis=1)
    n_m = int(counts.max())
    n_s = int(np.sort(counts)[-2]) if k >= 2 else 0
    r = selection_ratio(n_m, n_s, k)
    top = np.nonzero(counts == n_m)[0]
    hub = int(min(top, key=lambda j: pca_axis_ratio(cs.clusters[j])))
    unique = len(top) == 1
    score = (r, unique, -pca_axis_ratio(cs.clusters[hub]), cs.ll_trace[-1])
    return score, NeighborStats(k, n_m, n_s, r), bounds, matrix, borders, hub


def segment_structure(
    cloud,
    n_min: int,
    n_max: int,
    l_b: float,
    sliding_factor: int,
    seed: int,
    eps_border: float | None = None,
    n_restarts: int = 4,
    **em_kwargs,
) -> SegmentationResult:
    """Sweep candidate cluster counts and keep the one with the highest ratio.

    Per candidate count, n_restarts independently seeded EM fits are scored
    (see _evaluate_fit) and the best one represents that count; the count with
    the highest r wins, ties going to the smaller count.
    """
    pts = _points_of(cloud)
    if n_min < 2 or n_max < n_min:
        raise TooFewPoints("need n_max >= n_min >= 2")
    if len(pts) < n_max:
        raise TooFewPoints(f"{len(pts)} points cannot support {n_max} clusters")
    if eps_border is None:
        eps_border = 2.0 * mean_nn_spacing(pts)

    stats: list[NeighborStats] = []
    skipped: list[tuple[int, str]] = []
    candidates: dict[int, tuple] = {}
    best_k = None
    best_r = -np.inf
    for k in range(n_min, n_max + 1):
        restart_seeds = np.random.SeedSequence([seed, k]).generate_state(max(1, n_restarts))
        best_fit = None
        reasons = []
        for rs in restart_seeds:
            cs = em_gmm_fit(pts, k, int(rs), n_init=1, **em_kwargs)
            try:
                evaluated = _evaluate_fit(cs, sliding_factor, l_b, eps_border)
            except BridgenavError as exc:
                reasons.append(str(exc))
                continue
            if best_fit is None or evaluated[0] > best_fit[1][0]:
                best_fit = (cs, evaluated)
        if best_fit is None:
            skipped.append((k, "; ".join(sorted(set(reasons))) or "no usable fit"))
            continue
        cs, (score, stat, bounds, matrix, borders, hub) = best_fit
        stats.append(stat)
        candidates[k] = (cs, bounds, matrix, borders, hub)
        if stat.r > best_r:
            best_r = stat.r
            best_k = k
    if best_k is None:
        raise UndefinedRatio(
            "no candidate cluster count produced any neighbor relation; "
            "check l_b and eps_border against the cloud scale"
        )
    cs, bounds, matrix, borders, hub = candidates[best_k]
    return SegmentationResult(
        cluster_set=cs,
        n_o=best_k,
        stats=stats,
        boundaries=bounds,
        neighbor_matrix=matrix,
        borders=borders,
        eps_border=eps_border,
        hub_cluster=hub,
        skipped=skipped,
    )
