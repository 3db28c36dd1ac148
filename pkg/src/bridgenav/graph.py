"""Undirected weighted multigraph of the structure: centers, border midpoints
and principal-axis endpoints, plus Dijkstra shortest paths."""

from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .boundary import Boundary, border_midpoint
from .errors import DegenerateInput, UnknownVertex
from .geometry import (
    Point2,
    line_polygon_intersections,
    pca_axis_ratio,
    pca_principal_line,
)

# principal-axis ratio below which a cluster has no usable inspection
# direction (cross areas); its boundary intersections are skipped
PCA_TIE_RATIO = 1.05


class VertexRole(str, enum.Enum):
    CENTER = "center"
    BORDER_MID = "border_mid"
    ENDPOINT = "endpoint"


@dataclass
class Vertex:
    id: int
    position: Point2
    role: VertexRole
    cluster_id: int


@dataclass
class Edge:
    id: int
    u: int
    v: int
    weight: float

    def __post_init__(self):
        if self.u == self.v:
            raise DegenerateInput("edge endpoints must be distinct")
        if not (self.weight > 0 and math.isfinite(self.weight)):
            raise DegenerateInput(f"edge weight must be positive, got {self.weight}")

    def other(self, vid: int) -> int:
        return self.v if vid == self.u else self.u


@dataclass
class StructureGraph:
    vertices: dict[int, Vertex] = field(default_factory=dict)
    edges: dict[int, Edge] = field(default_factory=dict)
    adjacency: dict[int, list[int]] = field(default_factory=dict)

    def add_vertex(self, position: Point2, role: VertexRole, cluster_id: int = -1) -> int:
        vid = len(self.vertices)
        self.vertices[vid] = Vertex(vid, position, role, cluster_id)
        self.adjacency[vid] = []
        return vid

    def add_edge(self, u: int, v: int, weight: float | None = None) -> int:
        if u not in self.vertices or v not in self.vertices:
            raise UnknownVertex(f"edge references missing vertex ({u}, {v})")
        if weight is None:
            weight = self.vertices[u].position.distance_to(self.vertices[v].position)
        eid = len(self.edges)
        self.edges[eid] = Edge(eid, u, v, weight)
        self.adjacency[u].append(eid)
        self.adjacency[v].append(eid)
        return eid

    def degree(self, vid: int) -> int:
        return len(self.adjacency[vid])

    def total_weight(self) -> float:
        return sum(e.weight for e in self.edges.values())

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        seen = {next(iter(self.vertices))}
        stack = list(seen)
        while stack:
            u = stack.pop()
            for eid in self.adjacency[u]:
                w = self.edges[eid].other(u)
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == len(self.vertices)

    @classmethod
    def from_edges(cls, weighted_edges, positions=None) -> "StructureGraph":
        """Build a graph from (u, v, weight) triples; handy for tests.

        Vertices are created on demand; positions default to points on the
        x axis, so weights are not required to match geometric distances.
        """
        g = cls()
        ids: dict = {}
        for u, v, w in weighted_edges:
            for name in (u, v):
                if name not in ids:
                    pos = (
                        Point2(*positions[name])
                        if positions is not None
                        else Point2(float(len(ids)), 0.0)
                    )
                    ids[name] = g.add_vertex(pos, VertexRole.CENTER)
            g.add_edge(ids[u], ids[v], float(w))
        g.vertex_names = {v: k for k, v in ids.items()}
        return g

    def to_json_dict(self) -> dict:
        return {
            "vertices": [
                {
                    "id": v.id,
                    "x": v.position.x,
                    "y": v.position.y,
                    "role": v.role.value,
                    "cluster": v.cluster_id,
                }
                for v in self.vertices.values()
            ],
            "edges": [
                {"id": e.id, "u": e.u, "v": e.v, "weight": e.weight}
                for e in self.edges.values()
            ],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "StructureGraph":
        g = cls()
        for v in data["vertices"]:
            g.vertices[v["id"]] = Vertex(
                v["id"], Point2(v["x"], v["y"]), VertexRole(v["role"]), v["cluster"]
            )
            g.adjacency[v["id"]] = []
        for e in data["edges"]:
            edge = Edge(e["id"], e["u"], e["v"], e["weight"])
            g.edges[edge.id] = edge
            g.adjacency[edge.u].append(edge.id)
            g.adjacency[edge.v].append(edge.id)
        return g


def build_graph(
    boundaries: list[Boundary],
    neighbor_matrix: np.ndarray,
    borders: dict[tuple[int, int], np.ndarray],
    d_min: float,
    tie_ratio: float = PCA_TIE_RATIO,
) -> StructureGraph:
    """Assemble the structure graph from boundaries and neighbor relations.

    One center vertex per cluster; one border-mid vertex per neighbor pair,
    edged to both centers; then each cluster's principal line is intersected
    with its own boundary and crossings farther than d_min from every vertex
    placed so far become endpoint vertices edged to their cluster's center.
    """
    if not boundaries:
        raise DegenerateInput("need at least one boundary")
    g = StructureGraph()
    center_vid: dict[int, int] = {}
    for b in boundaries:
        center_vid[b.cluster_id] = g.add_vertex(b.center, VertexRole.CENTER, b.cluster_id)

    m = len(boundaries)
    for i in range(m):
        for j in range(i + 1, m):
            if not neighbor_matrix[i, j]:
                continue
            border = borders[(i, j)]
            mid = border_midpoint(border)
            ci = boundaries[i].cluster_id
            cj = boundaries[j].cluster_id
            mid_vid = g.add_vertex(mid, VertexRole.BORDER_MID, ci)
            g.add_edge(center_vid[ci], mid_vid)
            g.add_edge(mid_vid, center_vid[cj])

    for b in boundaries:
        verts = b.polygon.vertices
        if pca_axis_ratio(verts) < tie_ratio:
            continue
        line = pca_principal_line(verts)
        for candidate in line_polygon_intersections(line, b.polygon):
            pos = candidate.as_array()
            too_close = any(
                np.hypot(v.position.x - pos[0], v.position.y - pos[1]) <= d_min
                for v in g.vertices.values()
            )
            if too_close:
                continue
            vid = g.add_vertex(candidate, VertexRole.ENDPOINT, b.cluster_id)
            g.add_edge(vid, center_vid[b.cluster_id])
    return g


def dijkstra(g: StructureGraph, source: int) -> dict[int, tuple[float, int | None]]:
    """Shortest-path tree from source: vertex id -> (distance, predecessor).

    Unreachable vertices carry infinite distance and no predecessor.
    """
    if source not in g.vertices:
        raise UnknownVertex(f"vertex {source} not in graph")
    dist = {vid: math.inf for vid in g.vertices}
    pred: dict[int, int | None] = {vid: None for vid in g.vertices}
    dist[source] = 0.0
    heap = [(0.0, source)]
    done = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for eid in g.adjacency[u]:
            edge = g.edges[eid]
            w = edge.other(u)
            nd = d + edge.weight
            if nd < dist[w]:
                dist[w] = nd
                pred[w] = u
                heapq.heappush(heap, (nd, w))
    return {vid: (dist[vid], pred[vid]) for vid in g.vertices}


def shortest_path(g: StructureGraph, source: int, target: int) -> tuple[list[int], float]:
    """Vertex sequence and cost of the shortest source-target path."""
    tree = dijkstra(g, source)
    if target not in g.vertices:
        raise UnknownVertex(f"vertex {target} not in graph")
    if math.isinf(tree[target][0]):
        return [], math.inf
    path = [target]
    while path[-1] != source:
        path.append(tree[path[-1]][1])
    path.reverse()
    return path, tree[target][0]
