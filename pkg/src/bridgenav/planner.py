"""Footprint collision checking against cluster boundaries plus RRT tracking
of route edges.

A robot configuration is free when every sampled footprint point lies inside
at least one cluster boundary by the center-closest-points test: a point is
inside a boundary when it sits closer to the cluster center than the nearest
boundary vertices around it do. The test is conservative by design; a pose
rejected here may still be inside the exact polygon, never the reverse for
points well clear of the outline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boundary import Boundary
from .errors import BudgetExhausted, DegenerateInput, InvalidEndpoint
from .graph import StructureGraph
from .vocpp import InspectionRoute

DEFAULT_N_CLOSEST = 3
DEFAULT_M_P = 5
DEFAULT_SAMPLE_POINTS = 5
DEFAULT_BUDGET = 5000
DEFAULT_GOAL_BIAS = 0.1
SUBSTEP_DIVISOR = 4
THETA_WEIGHT = 0.3  # meters of cost per radian in the RRT metric
GOAL_ANGLE_TOL = 0.6


def _wrap_angle(theta: float) -> float:
    wrapped = math.fmod(theta + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


@dataclass(frozen=True)
class RobotConfig:
    x: float
    y: float
    theta: float

    def __post_init__(self):
        if not all(map(math.isfinite, (self.x, self.y, self.theta))):
            raise DegenerateInput("robot configuration must be finite")
        object.__setattr__(self, "theta", _wrap_angle(self.theta))


@dataclass(frozen=True)
class RobotParams:
    half_length: float
    half_width: float
    sample_points: int = DEFAULT_SAMPLE_POINTS

    def __post_init__(self):
        if self.half_length <= 0 or self.half_width <= 0:
            raise DegenerateInput("robot dimensions must be positive")
        if self.sample_points < 2:
            raise DegenerateInput("need at least 2 samples per footprint side")


@dataclass
class FootprintSamples:
    points: np.ndarray  # (4 * sample_points + 1, 2)


@dataclass
class PlannedPath:
    configs: list[RobotConfig]
    edge_id: int


def footprint_samples(c: RobotConfig, params: RobotParams) -> FootprintSamples:
    """Perimeter samples of the robot rectangle plus its center.

    Each side contributes sample_points points starting at a corner, so all
    four corners are included exactly once.
    """
    sp = params.sample_points
    hl, hw = params.half_length, params.half_width
    t = np.linspace(0.0, 1.0, sp, endpoint=False)
    sides = [
        np.c_[-hl + 2 * hl * t, np.full(sp, -hw)],
        np.c_[np.full(sp, hl), -hw + 2 * hw * t],
        np.c_[hl - 2 * hl * t, np.full(sp, hw)],
        np.c_[np.full(sp, -hl), hw - 2 * hw * t],
    ]
    local = np.vstack(sides + [np.zeros((1, 2))])
    cos_t, sin_t = math.cos(c.theta), math.sin(c.theta)
    rot = np.array([[cos_t, -sin_t], [sin_t, cos_t]])
    return FootprintSamples(local @ rot.T + [c.x, c.y])


def pibc_point(p, boundary: Boundary, m_p: int = DEFAULT_M_P) -> bool:
    """Center-closest-points inclusion test for a single point.

    Inside iff the distance to the cluster center is smaller than the
    center distance of every one of the m_p boundary vertices nearest to p.
    """
    pt = np.asarray([p.x, p.y] if hasattr(p, "x") else p, dtype=float)
    verts = boundary.polygon.vertices
    center = boundary.center.as_array()
    d_s = float(np.linalg.norm(pt - center))
    m = min(int(m_p), len(verts))
    if m < 1:
        raise DegenerateInput("m_p must be >= 1")
    nearest = np.argpartition(np.linalg.norm(verts - pt, axis=1), m - 1)[:m]
    ring = np.linalg.norm(verts[nearest] - center, axis=1)
    return d_s < float(ring.min())


def _samples_free(
    pts: np.ndarray,
    boundaries: list[Boundary],
    n: int,
    m_p: int,
) -> np.ndarray:
    """Per-sample PIBC result against the n closest-by-center boundaries."""
    centers = np.array([[b.center.x, b.center.y] for b in boundaries])
    d_centers = np.linalg.norm(pts[:, None, :] - centers[None, :, :], axis=2)
    n_eff = min(max(1, n), len(boundaries))
    nearest = np.argpartition(d_centers, n_eff - 1, axis=1)[:, :n_eff]
    ok = np.zeros(len(pts), dtype=bool)
    for b_idx in np.unique(nearest):
        todo = np.nonzero(~ok & np.any(nearest == b_idx, axis=1))[0]
        if len(todo) == 0:
            continue
        b = boundaries[b_idx]
        verts = b.polygon.vertices
        center = b.center.as_array()
        m = min(int(m_p), len(verts))
        sub = pts[todo]
        d = np.linalg.norm(sub[:, None, :] - verts[None, :, :], axis=2)
        idx = np.argpartition(d, m - 1, axis=1)[:, :m]
        ring = np.linalg.norm(verts - center, axis=1)[idx].min(axis=1)
        d_s = np.linalg.norm(sub - center, axis=1)
        ok[todo] |= d_s < ring
    return ok


def pibc_config_free(
    c: RobotConfig,
    params: RobotParams,
    boundaries: list[Boundary],
    n: int = DEFAULT_N_CLOSEST,
    m_p: int = DEFAULT_M_P,
) -> bool:
    """True iff every footprint sample passes PIBC on some nearby boundary."""
    if not boundaries:
        return False
    pts = footprint_samples(c, params).points
    return bool(np.all(_samples_free(pts, boundaries, n, m_p)))


# ---------------------------------------------------------------------------
# RRT
# ---------------------------------------------------------------------------

def _angle_diff(a: float, b: float) -> float:
    return _wrap_angle(a - b)


def _interpolate(a: RobotConfig, b: RobotConfig, step: float):
    """Configs strictly between a and b at roughly ``step`` spacing."""
    dist = math.hypot(b.x - a.x, b.y - a.y)
    dtheta = _angle_diff(b.theta, a.theta)
    n = max(int(math.ceil(max(dist, abs(dtheta) * THETA_WEIGHT) / step)), 1)
    return [
        RobotConfig(
            a.x + (b.x - a.x) * f,
            a.y + (b.y - a.y) * f,
            a.theta + dtheta * f,
        )
        for f in ((i + 1) / n for i in range(n - 1))
    ]


def _motion_free(a, b, substep, params, boundaries, n, m_p) -> bool:
    for c in _interpolate(a, b, substep) + [b]:
        if not pibc_config_free(c, params, boundaries, n, m_p):
            return False
    return True


def rrt_plan(
    start: RobotConfig,
    goal: RobotConfig,
    boundaries: list[Boundary],
    params: RobotParams,
    seed: int,
    budget: int = DEFAULT_BUDGET,
    step_max: float = 0.15,
    goal_bias: float = DEFAULT_GOAL_BIAS,
    n_closest: int = DEFAULT_N_CLOSEST,
    m_p: int = DEFAULT_M_P,
) -> PlannedPath:
    """Grow a tree from start until the goal pose is connected.

    Samples positions uniformly over the boundaries' bounding box (heading
    uniform over the circle) with goal biasing; every extension is collision
    checked at step_max / 4 resolution. Deterministic for a fixed seed.
    """
    if not pibc_config_free(start, params, boundaries, n_closest, m_p):
        raise InvalidEndpoint("start configuration is not free")
    if not pibc_config_free(goal, params, boundaries, n_closest, m_p):
        raise InvalidEndpoint("goal configuration is not free")
    if start == goal:
        return PlannedPath([start], edge_id=-1)

    substep = step_max / SUBSTEP_DIVISOR
    if _motion_free(start, goal, substep, params, boundaries, n_closest, m_p):
        configs = [start] + _interpolate(start, goal, substep) + [goal]
        return PlannedPath(configs, edge_id=-1)

    rng = np.random.default_rng(seed)
    all_verts = np.vstack([b.polygon.vertices for b in boundaries])
    lo = all_verts.min(axis=0)
    hi = all_verts.max(axis=0)

    nodes = [start]
    parents = [-1]
    xy = np.array([[start.x, start.y]])
    thetas = np.array([start.theta])

    def nearest_index(target: RobotConfig) -> int:
        d = np.linalg.norm(xy - [target.x, target.y], axis=1)
        ang = np.abs((thetas - target.theta + math.pi) % (2 * math.pi) - math.pi)
        return int(np.argmin(d + THETA_WEIGHT * ang))

    def steer(from_cfg: RobotConfig, to_cfg: RobotConfig) -> RobotConfig:
        dist = math.hypot(to_cfg.x - from_cfg.x, to_cfg.y - from_cfg.y)
        if dist <= step_max:
            return to_cfg
        f = step_max / dist
        return RobotConfig(
            from_cfg.x + (to_cfg.x - from_cfg.x) * f,
            from_cfg.y + (to_cfg.y - from_cfg.y) * f,
            from_cfg.theta + _angle_diff(to_cfg.theta, from_cfg.theta) * f,
        )

    for _ in range(budget):
        if rng.random() < goal_bias:
            target = goal
        else:
            pos = rng.uniform(lo, hi)
            target = RobotConfig(pos[0], pos[1], rng.uniform(-math.pi, math.pi))
        near_i = nearest_index(target)
        new_cfg = steer(nodes[near_i], target)
        if not _motion_free(nodes[near_i], new_cfg, substep, params, boundaries, n_closest, m_p):
            continue
        nodes.append(new_cfg)
        parents.append(near_i)
        xy = np.vstack([xy, [new_cfg.x, new_cfg.y]])
        thetas = np.append(thetas, new_cfg.theta)

        close_enough = (
            math.hypot(goal.x - new_cfg.x, goal.y - new_cfg.y) <= step_max
            and abs(_angle_diff(goal.theta, new_cfg.theta)) <= GOAL_ANGLE_TOL
        )
        if close_enough and _motion_free(new_cfg, goal, substep, params, boundaries, n_closest, m_p):
            path = [goal]
            i = len(nodes) - 1
            while i >= 0:
                path.append(nodes[i])
                i = parents[i]
            path.reverse()
            return PlannedPath(path, edge_id=-1)
    raise BudgetExhausted(f"no path found within {budget} iterations")


def plan_along_route(
    route: InspectionRoute,
    g: StructureGraph,
    boundaries: list[Boundary],
    params: RobotParams,
    seed: int,
    budget: int = DEFAULT_BUDGET,
    step_max: float = 0.15,
    goal_bias: float = DEFAULT_GOAL_BIAS,
    n_closest: int = DEFAULT_N_CLOSEST,
    m_p: int = DEFAULT_M_P,
) -> tuple[list[PlannedPath], list[tuple[int, str]]]:
    """Track every route edge with an RRT path; report edges that fail.

    Terminal poses sit on the edge endpoints heading along the edge; a pose
    whose footprint pokes past a bar end (endpoint vertices) is pulled
    inward along the edge until it is free. Failures are reported as
    (edge id, reason), never raised.
    """
    paths: list[PlannedPath] = []
    untraversable: list[tuple[int, str]] = []
    for i, eid in enumerate(route.traversed_edges):
        u, v = route.walk[i], route.walk[i + 1]
        pu = g.vertices[u].position
        pv = g.vertices[v].position
        heading = math.atan2(pv.y - pu.y, pv.x - pu.x)
        edge_len = pu.distance_to(pv)
        start = _pulled_in_pose(pu, heading, heading, edge_len, params, boundaries, n_closest, m_p)
        goal = _pulled_in_pose(pv, heading, heading + math.pi, edge_len, params, boundaries, n_closest, m_p)
        if start is None or goal is None:
            untraversable.append((eid, "terminal pose not free"))
            continue
        try:
            path = rrt_plan(
                start,
                goal,
                boundaries,
                params,
                seed=int(np.random.SeedSequence([seed, i]).generate_state(1)[0]),
                budget=budget,
                step_max=step_max,
                goal_bias=goal_bias,
                n_closest=n_closest,
                m_p=m_p,
            )
        except BudgetExhausted as exc:
            untraversable.append((eid, str(exc)))
            continue
        path.edge_id = eid
        paths.append(path)
    return paths, untraversable


def _pulled_in_pose(
    position,
    heading: float,
    pull_direction: float,
    edge_len: float,
    params: RobotParams,
    boundaries: list[Boundary],
    n: int,
    m_p: int,
) -> RobotConfig | None:
    """Free pose at (or pulled inward from) a route edge endpoint.

    Cluster seams and bar ends reject poses sitting exactly on a vertex, so
    the pose slides along the edge until its footprint clears them; an edge
    shorter than the robot may slide all the way to the far endpoint. Small
    sideways nudges recenter the footprint when the vertex sits off the
    middle of a narrow corridor.
    """
    max_pull = min(3.0 * params.half_length, edge_len)
    side = (math.cos(pull_direction + 0.5 * math.pi), math.sin(pull_direction + 0.5 * math.pi))
    nudges = [f * params.half_width for f in (0.0, 0.5, -0.5, 1.0, -1.0)]
    for pull in np.linspace(0.0, max_pull, 10):
        for nudge in nudges:
            cfg = RobotConfig(
                position.x + pull * math.cos(pull_direction) + nudge * side[0],
                position.y + pull * math.sin(pull_direction) + nudge * side[1],
                heading,
            )
            if pibc_config_free(cfg, params, boundaries, n, m_p):
                return cfg
    return None
