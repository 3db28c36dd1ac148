import itertools

import numpy as np
import pytest

from bridgenav.errors import BudgetExceeded, Disconnected, MissingVertex, NotEulerian
from bridgenav.graph import StructureGraph
from bridgenav.vocpp import (
    AugmentedGraph,
    brute_force_ocpp,
    eulerian_trail,
    odd_vertices,
    plan_route,
    validate_route,
)


def path3():
    return StructureGraph.from_edges([("A", "B", 1.0), ("B", "C", 1.0)])


def cycle4():
    return StructureGraph.from_edges(
        [("A", "B", 1.0), ("B", "C", 1.0), ("C", "D", 1.0), ("D", "A", 1.0)]
    )


def k4():
    verts = "ABCD"
    return StructureGraph.from_edges(
        [(a, b, 1.0) for a, b in itertools.combinations(verts, 2)]
    )


def bowtie():
    return StructureGraph.from_edges(
        [
            ("A", "B", 1.0), ("B", "C", 1.0), ("C", "A", 1.0),
            ("A", "D", 1.0), ("D", "E", 1.0), ("E", "A", 1.0),
        ]
    )


def grid_3x2():
    edges = []
    coords = {(x, y): f"{x}{y}" for x in range(3) for y in range(2)}
    for (x, y), name in coords.items():
        if (x + 1, y) in coords:
            edges.append((name, coords[(x + 1, y)], 1.0))
        if (x, y + 1) in coords:
            edges.append((name, coords[(x, y + 1)], 1.0))
    return StructureGraph.from_edges(edges)


CURATED = [path3, cycle4, k4, bowtie, grid_3x2]


def random_connected_graph(rng, max_vertices=8, max_edges=12):
    n = int(rng.integers(2, max_vertices + 1))
    edges = []
    # random spanning tree first
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.append((u, v, float(rng.uniform(0.1, 5.0))))
    extra = int(rng.integers(0, max_edges - (n - 1) + 1))
    tries = 0
    while extra > 0 and tries < 50:
        tries += 1
        u, v = rng.integers(0, n, size=2)
        if u == v:
            continue
        edges.append((int(u), int(v), float(rng.uniform(0.1, 5.0))))
        extra -= 1
    if rng.random() < 0.3:
        # append a closing cycle to exercise the all-even cases
        cyc = list(rng.permutation(n))
        need = [
            (int(a), int(b))
            for a, b in zip(cyc, cyc[1:] + cyc[:1])
            if not any({a, b} == {u, v} for u, v, _ in edges)
        ]
        for u, v in need[: max(0, max_edges - len(edges))]:
            edges.append((u, v, float(rng.uniform(0.1, 5.0))))
    return StructureGraph.from_edges(edges)


def parity_case(g, v_s, v_t):
    odd = odd_vertices(g)
    if not odd:
        return "none-odd"
    if v_s in odd and v_t in odd:
        return "both-odd"
    if v_s not in odd and v_t in odd:
        return "t-odd"
    if v_s in odd and v_t not in odd:
        return "s-odd"
    return "both-even"


# ---------------------------------------------------------------------------
# odd_vertices
# ---------------------------------------------------------------------------

def test_cycle_has_no_odd_vertices():
    assert odd_vertices(cycle4()) == set()


def test_path_endpoints_are_odd():
    assert odd_vertices(path3()) == {0, 2}


def test_k4_all_odd():
    assert odd_vertices(k4()) == {0, 1, 2, 3}


def test_handshake_lemma_on_random_graphs():
    rng = np.random.default_rng(0)
    for _ in range(50):
        g = random_connected_graph(rng)
        assert len(odd_vertices(g)) % 2 == 0


# ---------------------------------------------------------------------------
# plan_route on the curated fixtures
# ---------------------------------------------------------------------------

def test_path_route_is_the_trail():
    g = path3()
    route, aug = plan_route(g, 0, 2)
    assert route.walk == [0, 1, 2]
    assert route.total_cost == pytest.approx(2.0)
    assert aug.duplicated_edges == []


def test_cycle_opposite_corners_costs_six():
    g = cycle4()
    route, _ = plan_route(g, 0, 2)
    assert route.total_cost == pytest.approx(6.0)
    assert brute_force_ocpp(g, 0, 2) == pytest.approx(6.0)


def test_k4_costs_seven():
    g = k4()
    route, _ = plan_route(g, 0, 1)
    assert route.total_cost == pytest.approx(7.0)
    assert brute_force_ocpp(g, 0, 1) == pytest.approx(7.0)


@pytest.mark.parametrize("make", CURATED)
def test_curated_fixtures_match_oracle_for_all_terminal_pairs(make):
    g = make()
    vids = sorted(g.vertices)
    for v_s in vids:
        for v_t in vids:
            route, aug = plan_route(g, v_s, v_t)
            assert validate_route(g, route, v_s, v_t) == []
            optimum = brute_force_ocpp(g, v_s, v_t)
            assert route.total_cost == pytest.approx(optimum), (
                f"{make.__name__} {v_s}->{v_t}"
            )


def test_missing_vertex_raises():
    with pytest.raises(MissingVertex):
        plan_route(path3(), 0, 9)


def test_disconnected_graph_raises():
    g = StructureGraph.from_edges([("A", "B", 1.0)])
    from bridgenav.graph import VertexRole

    g.add_vertex(g.vertices[0].position, VertexRole.CENTER)
    with pytest.raises(Disconnected):
        plan_route(g, 0, 2)


# ---------------------------------------------------------------------------
# random-graph properties
# ---------------------------------------------------------------------------

def test_routes_valid_and_never_beat_oracle_on_random_graphs():
    rng = np.random.default_rng(7)
    seen_cases = set()
    for _ in range(200):
        g = random_connected_graph(rng)
        vids = sorted(g.vertices)
        v_s = int(rng.choice(vids))
        v_t = int(rng.choice(vids))
        seen_cases.add(parity_case(g, v_s, v_t))
        route, aug = plan_route(g, v_s, v_t)
        assert validate_route(g, route, v_s, v_t) == []
        optimum = brute_force_ocpp(g, v_s, v_t)
        assert route.total_cost >= optimum - 1e-9
        # augmented parity invariant
        for vid in g.vertices:
            deg = aug.degree(vid)
            if v_s == v_t or vid not in (v_s, v_t):
                assert deg % 2 == 0
            else:
                assert deg % 2 == 1
    assert seen_cases == {"none-odd", "both-odd", "t-odd", "s-odd", "both-even"}


def test_semi_eulerian_graph_needs_no_duplication():
    g = grid_3x2()
    odd = sorted(odd_vertices(g))
    route, aug = plan_route(g, odd[0], odd[1])
    assert aug.duplicated_edges == []
    assert route.total_cost == pytest.approx(g.total_weight())


# ---------------------------------------------------------------------------
# eulerian_trail
# ---------------------------------------------------------------------------

def test_triangle_circuit():
    g = StructureGraph.from_edges([("A", "B", 1.0), ("B", "C", 1.0), ("C", "A", 1.0)])
    trail = eulerian_trail(AugmentedGraph(g), 0)
    assert len(trail) == 3
    walk = [0]
    for eid in trail:
        walk.append(g.edges[eid].other(walk[-1]))
    assert walk[0] == walk[-1] == 0


def test_wrong_start_raises():
    with pytest.raises(NotEulerian):
        eulerian_trail(AugmentedGraph(path3()), 1)


def test_two_triangles_share_vertex():
    g = bowtie()
    trail = eulerian_trail(AugmentedGraph(g), 0)
    assert sorted(trail) == sorted(g.edges)


def test_duplicated_edges_replayed_exactly_once_each():
    g = path3()
    aug = AugmentedGraph(g, duplicated_edges=[0])
    # degrees: A:2, B:3, C:1 -> trail must start at B or C
    trail = eulerian_trail(aug, 2)
    assert sorted(trail) == [0, 0, 1]


def test_random_augmented_graphs_replay_every_instance():
    rng = np.random.default_rng(11)
    raised = 0
    for _ in range(100):
        g = random_connected_graph(rng)
        dup = [int(e) for e in rng.choice(sorted(g.edges), size=rng.integers(0, 3))]
        aug = AugmentedGraph(g, duplicated_edges=dup)
        odd = sorted(vid for vid in g.vertices if aug.degree(vid) % 2 == 1)
        starts = sorted(g.vertices)
        start = int(rng.choice(starts))
        should_fail = (len(odd) not in (0, 2)) or (len(odd) == 2 and start not in odd)
        if not should_fail and aug.degree(start) == 0:
            should_fail = True
        if should_fail:
            with pytest.raises(NotEulerian):
                eulerian_trail(aug, start)
            raised += 1
            continue
        trail = eulerian_trail(aug, start)
        want = sorted(list(g.edges) + dup)
        assert sorted(trail) == want
        walk = [start]
        for eid in trail:
            walk.append(g.edges[eid].other(walk[-1]))
        if odd:
            assert {walk[0], walk[-1]} == set(odd)
        else:
            assert walk[0] == walk[-1] == start
    assert raised > 0


# ---------------------------------------------------------------------------
# brute_force_ocpp
# ---------------------------------------------------------------------------

def test_oracle_path():
    assert brute_force_ocpp(path3(), 0, 2) == pytest.approx(2.0)


def test_oracle_single_edge_round_trip():
    g = StructureGraph.from_edges([("A", "B", 1.0)])
    assert brute_force_ocpp(g, 0, 0) == pytest.approx(2.0)


def test_oracle_budget():
    with pytest.raises(BudgetExceeded):
        brute_force_ocpp(k4(), 0, 1, max_traversals=2)


def test_oracle_rejects_large_graphs():
    edges = [(i, i + 1, 1.0) for i in range(13)]
    with pytest.raises(BudgetExceeded):
        brute_force_ocpp(StructureGraph.from_edges(edges), 0, 1)
