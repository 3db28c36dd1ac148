"""Variant open Chinese Postman: cheapest walk covering every edge at least
once between arbitrary start and end vertices.

The graph is first augmented with re-traversals of existing edges so that an
Eulerian trail from start to end exists: the start/end parity cases are
handled individually (connect an even terminal to its nearest odd vertex by
a duplicated shortest path), the remaining odd vertices are paired by a
minimum-cost perfect matching over shortest-path distances, and the trail is
extracted with Hierholzer's algorithm using deterministic lowest-id edge
choices.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field

from .errors import (
    BudgetExceeded,
    Disconnected,
    MissingVertex,
    NotEulerian,
)
from .graph import StructureGraph, dijkstra

MATCHING_DP_LIMIT = 16


@dataclass
class AugmentedGraph:
    base: StructureGraph
    duplicated_edges: list[int] = field(default_factory=list)

    def degree(self, vid: int) -> int:
        extra = sum(
            1
            for eid in self.duplicated_edges
            for end in (self.base.edges[eid].u, self.base.edges[eid].v)
            if end == vid
        )
        return self.base.degree(vid) + extra

    def edge_instances(self) -> list[tuple[int, int]]:
        """(edge id, copy index) for every traversal the trail must make."""
        instances = [(eid, 0) for eid in self.base.edges]
        copies: dict[int, int] = {}
        for eid in self.duplicated_edges:
            copies[eid] = copies.get(eid, 0) + 1
            instances.append((eid, copies[eid]))
        return instances


@dataclass
class InspectionRoute:
    walk: list[int]
    traversed_edges: list[int]
    total_cost: float


def odd_vertices(g: StructureGraph) -> set[int]:
    """Vertices of odd degree; always an even-sized set."""
    return {vid for vid in g.vertices if g.degree(vid) % 2 == 1}


def plan_route(g: StructureGraph, v_s: int, v_t: int) -> tuple[InspectionRoute, AugmentedGraph]:
    """Shortest inspect-all-edges walk from v_s to v_t.

    Augments the graph case by case on the parity of v_s/v_t, pairs the
    remaining odd vertices by exact minimum matching on Dijkstra distances,
    and extracts the Eulerian trail.
    """
    for vid in (v_s, v_t):
        if vid not in g.vertices:
            raise MissingVertex(f"vertex {vid} not in graph")
    if not g.is_connected():
        raise Disconnected("route planning needs a connected graph")
    if not g.edges:
        if v_s != v_t:
            raise Disconnected("no edges connect distinct start and target")
        return InspectionRoute([v_s], [], 0.0), AugmentedGraph(g)

    s_ov = odd_vertices(g)
    aug = AugmentedGraph(g)

    if v_s == v_t:
        # closed inspection tour: every vertex must end up even
        s_mov = set(s_ov)
    elif not s_ov:
        aug.duplicated_edges += _path_edges(g, v_s, v_t)
        s_mov = set()
    elif v_s in s_ov and v_t in s_ov:
        s_mov = s_ov - {v_s, v_t}
    elif v_s not in s_ov and v_t in s_ov:
        v_c = _nearest_odd(g, v_s, s_ov - {v_t})
        aug.duplicated_edges += _path_edges(g, v_s, v_c)
        s_mov = s_ov - {v_t, v_c}
    elif v_s in s_ov and v_t not in s_ov:
        v_c = _nearest_odd(g, v_t, s_ov - {v_s})
        aug.duplicated_edges += _path_edges(g, v_t, v_c)
        s_mov = s_ov - {v_s, v_c}
    else:
        v_c1, v_c2 = _best_terminal_pair(g, v_s, v_t, s_ov)
        aug.duplicated_edges += _path_edges(g, v_s, v_c1)
        aug.duplicated_edges += _path_edges(g, v_t, v_c2)
        s_mov = s_ov - {v_c1, v_c2}

    for a, b in _min_cost_pairing(g, sorted(s_mov)):
        aug.duplicated_edges += _path_edges(g, a, b)

    trail = eulerian_trail(aug, v_s)
    walk = [v_s]
    for eid in trail:
        walk.append(g.edges[eid].other(walk[-1]))
    cost = sum(g.edges[eid].weight for eid in trail)
    return InspectionRoute(walk, trail, cost), aug


def _nearest_odd(g: StructureGraph, source: int, candidates: set[int]) -> int:
    tree = dijkstra(g, source)
    return min(candidates, key=lambda v: (tree[v][0], v))


def _best_terminal_pair(g: StructureGraph, v_s: int, v_t: int, s_ov: set[int]) -> tuple[int, int]:
    """Distinct odd vertices (c1 for v_s, c2 for v_t) with the cheapest paths."""
    d_s = dijkstra(g, v_s)
    d_t = dijkstra(g, v_t)
    best = None
    for c1, c2 in itertools.permutations(sorted(s_ov), 2):
        key = (d_s[c1][0] + d_t[c2][0], c1, c2)
        if best is None or key < best:
            best = key
    return best[1], best[2]


def _path_edges(g: StructureGraph, source: int, target: int) -> list[int]:
    """Edge ids of a shortest source-target path, lowest edge id on ties."""
    if source == target:
        return []
    tree = dijkstra(g, source)
    if math.isinf(tree[target][0]):
        raise Disconnected(f"no path between {source} and {target}")
    edges = []
    cur = target
    while cur != source:
        prev = tree[cur][1]
        eid = min(
            (e for e in g.adjacency[cur] if g.edges[e].other(cur) == prev),
            key=lambda e: (g.edges[e].weight, e),
        )
        edges.append(eid)
        cur = prev
    edges.reverse()
    return edges


def _min_cost_pairing(g: StructureGraph, vertices: list[int]) -> list[tuple[int, int]]:
    """Perfect matching of the odd set minimizing summed path distances.

    Exact subset dynamic programming up to MATCHING_DP_LIMIT vertices, greedy
    nearest-pair beyond that.
    """
    n = len(vertices)
    if n == 0:
        return []
    if n % 2 != 0:
        raise NotEulerian("odd-vertex set has odd cardinality")
    dist = {}
    for v in vertices:
        tree = dijkstra(g, v)
        for w in vertices:
            dist[(v, w)] = tree[w][0]

    if n <= MATCHING_DP_LIMIT:
        full = (1 << n) - 1
        dp: list[float] = [math.inf] * (full + 1)
        choice: list[tuple[int, int] | None] = [None] * (full + 1)
        dp[0] = 0.0
        for mask in range(1, full + 1):
            i = (mask & -mask).bit_length() - 1
            if not (mask >> i) & 1:
                continue
            rest = mask ^ (1 << i)
            j = rest
            while j:
                k = (j & -j).bit_length() - 1
                j ^= 1 << k
                prev = rest ^ (1 << k)
                cost = dp[prev] + dist[(vertices[i], vertices[k])]
                if cost < dp[mask]:
                    dp[mask] = cost
                    choice[mask] = (i, k)
        pairs = []
        mask = full
        while mask:
            i, k = choice[mask]
            pairs.append((vertices[i], vertices[k]))
            mask ^= (1 << i) | (1 << k)
        return pairs

    remaining = list(vertices)
    pairs = []
    while remaining:
        a = remaining[0]
        b = min(remaining[1:], key=lambda v: (dist[(a, v)], v))
        pairs.append((a, b))
        remaining.remove(a)
        remaining.remove(b)
    return pairs


def eulerian_trail(aug: AugmentedGraph, start: int) -> list[int]:
    """Edge ids of a trail using every edge instance exactly once.

    Hierholzer's algorithm with the lowest (edge id, copy) picked first, so
    the output is deterministic.
    """
    g = aug.base
    if start not in g.vertices:
        raise MissingVertex(f"vertex {start} not in graph")
    instances = aug.edge_instances()
    if not instances:
        return []

    odd = [vid for vid in g.vertices if aug.degree(vid) % 2 == 1]
    if len(odd) not in (0, 2):
        raise NotEulerian(f"{len(odd)} odd vertices, expected 0 or 2")
    if len(odd) == 2 and start not in odd:
        raise NotEulerian("trail must start at an odd vertex")
    if aug.degree(start) == 0:
        raise NotEulerian("start vertex touches no edges")
    if not _edge_connected(aug):
        raise NotEulerian("edges do not form a single connected component")

    remaining: dict[int, list[tuple[int, int]]] = {vid: [] for vid in g.vertices}
    for inst in instances:
        edge = g.edges[inst[0]]
        remaining[edge.u].append(inst)
        remaining[edge.v].append(inst)
    for lst in remaining.values():
        lst.sort(reverse=True)  # pop() yields lowest (edge id, copy) first
    used: set[tuple[int, int]] = set()
    vertex_stack: list[int] = [start]
    edge_stack: list[tuple[int, int] | None] = [None]
    trail: list[int] = []
    while vertex_stack:
        v = vertex_stack[-1]
        lst = remaining[v]
        while lst and lst[-1] in used:
            lst.pop()
        if lst:
            inst = lst.pop()
            used.add(inst)
            vertex_stack.append(g.edges[inst[0]].other(v))
            edge_stack.append(inst)
        else:
            vertex_stack.pop()
            inst = edge_stack.pop()
            if inst is not None:
                trail.append(inst[0])
    trail.reverse()
    if len(trail) != len(instances):
        raise NotEulerian("graph has unreachable edges")
    return trail


def _edge_connected(aug: AugmentedGraph) -> bool:
    g = aug.base
    touched = {vid for vid in g.vertices if g.degree(vid) > 0}
    if not touched:
        return True
    seen = set()
    stack = [next(iter(touched))]
    while stack:
        u = stack.pop()
        if u in seen:
            continue
        seen.add(u)
        for eid in g.adjacency[u]:
            stack.append(g.edges[eid].other(u))
    return touched <= seen


def validate_route(g: StructureGraph, route: InspectionRoute, v_s: int, v_t: int) -> list[str]:
    """Consistency problems of a route against its graph; empty when valid."""
    problems = []
    if not route.walk or route.walk[0] != v_s:
        problems.append("walk does not start at v_s")
    if not route.walk or route.walk[-1] != v_t:
        problems.append("walk does not end at v_t")
    if len(route.walk) != len(route.traversed_edges) + 1:
        problems.append("walk and edge list lengths disagree")
    else:
        for i, eid in enumerate(route.traversed_edges):
            edge = g.edges[eid]
            if {route.walk[i], route.walk[i + 1]} != {edge.u, edge.v}:
                problems.append(f"edge {eid} does not join walk step {i}")
                break
    if set(g.edges) - set(route.traversed_edges):
        problems.append("not every edge is covered")
    replay = sum(g.edges[eid].weight for eid in route.traversed_edges)
    if not math.isclose(replay, route.total_cost, rel_tol=1e-9, abs_tol=1e-12):
        problems.append("total_cost does not match replayed edge weights")
    return problems


def brute_force_ocpp(
    g: StructureGraph,
    v_s: int,
    v_t: int,
    max_traversals: int = 1 << 20,
) -> float:
    """Exact minimum cost over all edge-covering v_s -> v_t walks.

    Dijkstra over (vertex, covered-edge-set) states; max_traversals bounds the
    number of state expansions. Only intended for small graphs.
    """
    if len(g.edges) > 12:
        raise BudgetExceeded("oracle limited to 12 edges")
    for vid in (v_s, v_t):
        if vid not in g.vertices:
            raise MissingVertex(f"vertex {vid} not in graph")
    edge_ids = sorted(g.edges)
    bit = {eid: 1 << i for i, eid in enumerate(edge_ids)}
    full = (1 << len(edge_ids)) - 1
    start = (v_s, 0)
    best: dict[tuple[int, int], float] = {start: 0.0}
    heap = [(0.0, v_s, 0)]
    expansions = 0
    while heap:
        cost, v, mask = heapq.heappop(heap)
        if cost > best.get((v, mask), math.inf):
            continue
        if v == v_t and mask == full:
            return cost
        expansions += 1
        if expansions > max_traversals:
            raise BudgetExceeded("state-space search budget exhausted")
        for eid in g.adjacency[v]:
            edge = g.edges[eid]
            w = edge.other(v)
            state = (w, mask | bit[eid])
            nc = cost + edge.weight
            if nc < best.get(state, math.inf):
                best[state] = nc
                heapq.heappush(heap, (nc, w, state[1]))
    raise Disconnected("target not reachable with full edge coverage")
