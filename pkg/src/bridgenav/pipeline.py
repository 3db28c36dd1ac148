"""End-to-end orchestration: cloud -> segmentation -> boundaries -> graph ->
inspection route -> footprint paths, with JSON artifact persistence.

Every stage is a pure function of (inputs, config, seed); running twice with
the same seed produces byte-identical artifacts.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .boundary import Boundary
from .cloud import PointCloud, read_cloud
from .errors import BridgenavError, CloudParseError, Disconnected
from .geometry import Point2, Polygon2
from .graph import StructureGraph, build_graph
from .planner import RobotParams, plan_along_route
from .segmentation import NeighborStats, SegmentationResult, segment_structure
from .vocpp import InspectionRoute, plan_route, validate_route


@dataclass
class RobotConfigDefaults:
    half_length: float = 0.08
    half_width: float = 0.04
    sample_points: int = 5


@dataclass
class PlannerDefaults:
    n_closest: int = 3
    m_p: int = 5
    step_max: float = 0.1
    goal_bias: float = 0.1
    budget: int = 5000


@dataclass
class PipelineConfig:
    n_min: int = 3
    n_max: int = 8
    l_b: float = 0.15
    sliding_factor: int = 12
    d_min: float = 0.45
    eps_border: float | None = None
    n_restarts: int = 4
    start_vertex: int | list[float] | None = None
    target_vertex: int | list[float] | None = None
    robot: RobotConfigDefaults = field(default_factory=RobotConfigDefaults)
    planner: PlannerDefaults = field(default_factory=PlannerDefaults)
    seed: int = 0

    def __post_init__(self):
        if self.n_min < 2 or self.n_max < self.n_min:
            raise BridgenavError("config needs n_max >= n_min >= 2")
        for name in ("l_b", "sliding_factor", "d_min"):
            if getattr(self, name) <= 0:
                raise BridgenavError(f"config field {name} must be positive")

    @classmethod
    def from_json(cls, path: str | Path) -> "PipelineConfig":
        data = json.loads(Path(path).read_text())
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise BridgenavError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        if "robot" in kwargs:
            kwargs["robot"] = RobotConfigDefaults(**kwargs["robot"])
        if "planner" in kwargs:
            kwargs["planner"] = PlannerDefaults(**kwargs["planner"])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RunArtifacts:
    cloud: PointCloud
    labels: np.ndarray
    n_o: int
    stats: list[NeighborStats]
    boundaries: list[Boundary]
    graph: StructureGraph
    route: InspectionRoute | None
    v_s: int | None
    v_t: int | None
    paths: list  # list[PlannedPath]
    untraversable: list[tuple[int, str]]
    diagnostics: list[str]
    config: PipelineConfig
    hub_cluster: int = -1
    eps_border: float = 0.0

    @property
    def severity(self) -> int:
        return 1 if self.diagnostics else 0

    # -- persistence -------------------------------------------------------

    def save(self, out_dir: str | Path) -> None:
        from .cloud import write_csv

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(self.cloud, out / "cloud.csv")
        _dump(out / "clusters.json", {str(i): int(l) for i, l in enumerate(self.labels)})
        _dump(out / "boundaries.json", [_boundary_dict(b) for b in self.boundaries])
        _dump(out / "graph.json", self.graph.to_json_dict())
        if self.route is not None:
            _dump(out / "route.json", _route_dict(self.route, self.graph))
        _dump(
            out / "paths.json",
            [
                {
                    "edge_id": p.edge_id,
                    "waypoints": [
                        {"x": c.x, "y": c.y, "theta": c.theta} for c in p.configs
                    ],
                }
                for p in self.paths
            ],
        )
        _dump(
            out / "diagnostics.json",
            {
                "n_o": self.n_o,
                "hub_cluster": self.hub_cluster,
                "eps_border": self.eps_border,
                "candidates": [asdict(s) for s in self.stats],
                "v_s": self.v_s,
                "v_t": self.v_t,
                "untraversable": [[eid, reason] for eid, reason in self.untraversable],
                "messages": self.diagnostics,
                "severity": self.severity,
                "config": self.config.to_dict(),
            },
        )

    @classmethod
    def load(cls, out_dir: str | Path) -> "RunArtifacts":
        from .cloud import read_csv

        out = Path(out_dir)
        labels_map = json.loads((out / "clusters.json").read_text())
        labels = np.array([labels_map[str(i)] for i in range(len(labels_map))], dtype=int)
        boundaries = [
            Boundary(
                b["cluster_id"],
                Polygon2(b["polygon"]),
                Point2(*b["center"]),
                b["sliding_factor"],
            )
            for b in json.loads((out / "boundaries.json").read_text())
        ]
        graph = StructureGraph.from_json_dict(json.loads((out / "graph.json").read_text()))
        diag = json.loads((out / "diagnostics.json").read_text())
        route = None
        if (out / "route.json").exists():
            rd = json.loads((out / "route.json").read_text())
            route = InspectionRoute(rd["walk"], rd["traversed_edges"], rd["cost"])
        from .planner import PlannedPath, RobotConfig

        paths = [
            PlannedPath(
                [RobotConfig(w["x"], w["y"], w["theta"]) for w in p["waypoints"]],
                p["edge_id"],
            )
            for p in json.loads((out / "paths.json").read_text())
        ]
        return cls(
            cloud=read_csv(out / "cloud.csv"),
            labels=labels,
            n_o=diag["n_o"],
            stats=[NeighborStats(**s) for s in diag["candidates"]],
            boundaries=boundaries,
            graph=graph,
            route=route,
            v_s=diag["v_s"],
            v_t=diag["v_t"],
            paths=paths,
            untraversable=[(int(e), r) for e, r in diag["untraversable"]],
            diagnostics=list(diag["messages"]),
            config=PipelineConfig.from_dict(diag["config"]),
            hub_cluster=diag["hub_cluster"],
            eps_border=diag["eps_border"],
        )


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")


def _boundary_dict(b: Boundary) -> dict:
    return {
        "cluster_id": b.cluster_id,
        "center": [b.center.x, b.center.y],
        "sliding_factor": b.sliding_factor,
        "polygon": [[float(x), float(y)] for x, y in b.polygon.vertices],
    }


def _route_dict(route: InspectionRoute, graph: StructureGraph) -> dict:
    return {
        "walk": list(route.walk),
        "traversed_edges": list(route.traversed_edges),
        "cost": route.total_cost,
        "positions": [
            [graph.vertices[v].position.x, graph.vertices[v].position.y]
            for v in route.walk
        ],
    }


def resolve_vertex(graph: StructureGraph, selector, fallback: str) -> int:
    """Map a config selector (id, coordinate, or None) to a vertex id.

    None picks the vertex with the lexicographically smallest or largest
    position so defaults stay deterministic without user input.
    """
    if isinstance(selector, int):
        if selector not in graph.vertices:
            raise BridgenavError(f"vertex {selector} not in graph")
        return selector
    if selector is not None:
        x, y = float(selector[0]), float(selector[1])
        return min(
            graph.vertices.values(),
            key=lambda v: (math.hypot(v.position.x - x, v.position.y - y), v.id),
        ).id
    key = lambda v: (v.position.x, v.position.y, v.id)
    vertices = list(graph.vertices.values())
    chosen = min(vertices, key=key) if fallback == "min" else max(vertices, key=key)
    return chosen.id


def run_pipeline(
    cloud_file: str | Path,
    config: PipelineConfig | str | Path | None = None,
    out_dir: str | Path | None = None,
    seed: int | None = None,
) -> RunArtifacts:
    """Execute the full stage chain and optionally persist every artifact."""
    if config is None:
        config = PipelineConfig()
    elif not isinstance(config, PipelineConfig):
        config = PipelineConfig.from_json(config)
    if seed is not None:
        config = replace(config, seed=seed)

    cloud = read_cloud(cloud_file)
    artifacts = run_pipeline_on_cloud(cloud, config)
    if out_dir is not None:
        artifacts.save(out_dir)
    return artifacts


def run_pipeline_on_cloud(cloud: PointCloud, config: PipelineConfig) -> RunArtifacts:
    diagnostics: list[str] = []
    seg = segment_structure(
        cloud.points,
        config.n_min,
        config.n_max,
        l_b=config.l_b,
        sliding_factor=config.sliding_factor,
        seed=config.seed,
        eps_border=config.eps_border,
        n_restarts=config.n_restarts,
    )
    graph = build_graph(seg.boundaries, seg.neighbor_matrix, seg.borders, config.d_min)
    if not graph.is_connected():
        diagnostics.append("graph is disconnected")

    route = None
    v_s = v_t = None
    paths: list = []
    untraversable: list[tuple[int, str]] = []
    try:
        v_s = resolve_vertex(graph, config.start_vertex, "min")
        v_t = resolve_vertex(graph, config.target_vertex, "max")
        route, _ = plan_route(graph, v_s, v_t)
        problems = validate_route(graph, route, v_s, v_t)
        if problems:
            diagnostics.extend(f"route: {p}" for p in problems)
    except Disconnected as exc:
        diagnostics.append(f"routing skipped: {exc}")

    if route is not None:
        robot = RobotParams(
            config.robot.half_length,
            config.robot.half_width,
            config.robot.sample_points,
        )
        paths, untraversable = plan_along_route(
            route,
            graph,
            seg.boundaries,
            robot,
            seed=config.seed,
            budget=config.planner.budget,
            step_max=config.planner.step_max,
            goal_bias=config.planner.goal_bias,
            n_closest=config.planner.n_closest,
            m_p=config.planner.m_p,
        )
        if untraversable:
            diagnostics.append(
                "untraversable edges: " + ", ".join(str(e) for e, _ in untraversable)
            )

    return RunArtifacts(
        cloud=cloud,
        labels=seg.cluster_set.labels,
        n_o=seg.n_o,
        stats=seg.stats,
        boundaries=seg.boundaries,
        graph=graph,
        route=route,
        v_s=v_s,
        v_t=v_t,
        paths=paths,
        untraversable=untraversable,
        diagnostics=diagnostics,
        config=config,
        hub_cluster=seg.hub_cluster,
        eps_border=seg.eps_border,
    )
