"""Tests for theta-graph construction, routing, and certification."""

import math

import pytest

from thetatrack.geometry import Point, cone_of, bisector_projection, spanning_ratio
from thetatrack.harness import generate_points
from thetatrack.rng import INSTANCE_STREAM, make_rng
from thetatrack.spanner import (DuplicatePoint, NoEdgeInCone, ThetaGraph,
                                TooFewPoints, Unreachable, build_theta_graph,
                                certify_spanning_ratio, load_graph_json,
                                load_points, path_length, route, route_step,
                                save_graph_json, save_points,
                                shortest_path_lengths)

from conftest import random_instance


# ------------------------------------------------------------ construction

def test_two_point_graph(cs8):
    g = build_theta_graph([Point(0, 0), Point(1, 0)], cs8)
    assert g.out_edge[0] == [1, None, None, None, None, None, None, None]
    assert g.out_edge[1] == [None, None, None, None, 0, None, None, None]
    assert g.edges == {(0, 1): 1.0}


def test_three_collinear_prefers_nearer_projection(cs8):
    g = build_theta_graph([Point(0, 0), Point(1, 0), Point(2, 0)], cs8)
    # projections 0.92388 vs 1.84776: vertex 1 wins cone 0 of vertex 0
    assert g.out_edge[0][0] == 1
    assert g.out_edge[1][0] == 2
    assert g.out_edge[1][4] == 0
    assert g.out_edge[2][4] == 1


def test_construction_matches_bruteforce_rescan(cs8):
    # independent O(n^2 k) recheck with the scalar primitives
    rng = make_rng(42, INSTANCE_STREAM)
    pts = generate_points(50, rng)
    g = build_theta_graph(pts, cs8)
    n = len(pts)
    for u in range(n):
        best = {}
        for v in range(n):
            if v == u:
                continue
            i = cone_of(pts[u], pts[v], cs8)
            proj = bisector_projection(pts[u], pts[v], i, cs8)
            if i not in best or (proj, v) < best[i]:
                best[i] = (proj, v)
        for i in range(cs8.k):
            if i in best:
                assert g.out_edge[u][i] == best[i][1]
            else:
                assert g.out_edge[u][i] is None


def test_out_edges_lie_in_their_cone(small_graph):
    g = small_graph
    for u in range(g.n):
        for i, v in enumerate(g.out_edge[u]):
            if v is not None:
                assert cone_of(g.points[u], g.points[v], g.cs) == i


def test_edges_are_undirected_union_of_out_edges(small_graph):
    g = small_graph
    directed = {(u, v) for u in range(g.n) for v in g.out_edge[u] if v is not None}
    normalized = {(min(u, v), max(u, v)) for u, v in directed}
    assert set(g.edges) == normalized
    for (u, v), length in g.edges.items():
        assert length == pytest.approx(g.edge_length(u, v), rel=1e-15)


def test_out_degree_bounded_by_k(small_graph):
    g = small_graph
    for u in range(g.n):
        assert sum(v is not None for v in g.out_edge[u]) <= g.cs.k


def test_construction_deterministic(cs8):
    rng = make_rng(5, INSTANCE_STREAM)
    pts = generate_points(40, rng)
    a = build_theta_graph(pts, cs8)
    b = build_theta_graph(pts, cs8)
    assert a.out_edge == b.out_edge
    assert a.edges == b.edges


def test_duplicate_points_rejected(cs8):
    with pytest.raises(DuplicatePoint):
        build_theta_graph([Point(0, 0), Point(1, 1), Point(0, 0)], cs8)


def test_too_few_points_rejected(cs8):
    with pytest.raises(TooFewPoints):
        build_theta_graph([Point(0, 0)], cs8)


def test_nonfinite_points_rejected(cs8):
    with pytest.raises(ValueError):
        build_theta_graph([Point(0, 0), Point(math.nan, 1)], cs8)


# ----------------------------------------------------------------- routing

def test_route_step_two_point_graph(cs8):
    g = build_theta_graph([Point(0, 0), Point(1, 0)], cs8)
    assert route_step(g, 0, 0) == 1


def test_route_step_three_collinear(cs8):
    g = build_theta_graph([Point(0, 0), Point(1, 0), Point(2, 0)], cs8)
    assert route_step(g, 0, 0) == 1


def test_route_step_empty_cone_raises(cs8):
    g = build_theta_graph([Point(0, 0), Point(1, 0)], cs8)
    with pytest.raises(NoEdgeInCone):
        route_step(g, 0, 2)


def test_route_to_self(small_graph):
    assert route(small_graph, 7, 7) == [7]


def test_route_two_point_graph(cs8):
    g = build_theta_graph([Point(0, 0), Point(1, 0)], cs8)
    assert route(g, 0, 1) == [0, 1]
    assert route(g, 1, 0) == [1, 0]


def test_route_random_pairs_bounded_and_above_dijkstra():
    g = random_instance(200, seed=99)
    t = spanning_ratio(g.cs)
    rng = make_rng(7, INSTANCE_STREAM)
    pairs = set()
    while len(pairs) < 100:
        u, v = rng.integers(0, g.n, size=2).tolist()
        if u != v:
            pairs.add((u, v))
    dij = {}
    for u, v in sorted(pairs):
        path = route(g, u, v)
        assert path[0] == u and path[-1] == v
        assert all(b in [x for x, _ in g.adj[a]] for a, b in zip(path, path[1:]))
        plen = path_length(g, path)
        euclid = g.edge_length(u, v)
        assert plen <= t * euclid + 1e-9
        if u not in dij:
            dij[u] = shortest_path_lengths(g, u)
        assert plen >= dij[u][v] - 1e-9


def test_route_progress_strictly_decreases_distance(small_graph):
    g = small_graph
    for (u, v) in [(0, 31), (5, 59), (17, 2), (44, 12)]:
        path = route(g, u, v)
        assert len(path) <= g.n
        dists = [g.edge_length(p, v) for p in path[:-1]]
        assert all(a > b for a, b in zip(dists, dists[1:] + [0.0]))


# ------------------------------------------------------------ certification

def _floyd_warshall(g):
    n = g.n
    dist = [[math.inf] * n for _ in range(n)]
    for u in range(n):
        dist[u][u] = 0.0
    for (u, v), w in g.edges.items():
        dist[u][v] = min(dist[u][v], w)
        dist[v][u] = min(dist[v][u], w)
    for m in range(n):
        dm = dist[m]
        for u in range(n):
            du = dist[u]
            dum = du[m]
            for v in range(n):
                alt = dum + dm[v]
                if alt < du[v]:
                    du[v] = alt
    return dist


def test_dijkstra_matches_floyd_warshall():
    g = random_instance(30, seed=11)
    fw = _floyd_warshall(g)
    for u in range(g.n):
        d = shortest_path_lengths(g, u)
        for v in range(g.n):
            assert d[v] == pytest.approx(fw[u][v], rel=1e-12, abs=1e-12)


def test_certify_two_point_graph(cs8):
    g = build_theta_graph([Point(0, 0), Point(1, 0)], cs8)
    assert certify_spanning_ratio(g) == pytest.approx(1.0)


def test_certify_triangle_all_edges_present(cs8):
    pts = [Point(0, 0), Point(2, 0.1), Point(1, 1.8)]
    g = build_theta_graph(pts, cs8)
    assert certify_spanning_ratio(g) == pytest.approx(1.0)


def test_certify_random_instance_below_bound():
    g = random_instance(200, seed=3)
    worst = certify_spanning_ratio(g)
    assert worst <= spanning_ratio(g.cs) + 1e-9
    assert worst <= 2.614 + 1e-9  # comfortably under even the tighter figure


@pytest.mark.parametrize("seed", [10, 20, 30, 40, 50, 60])
def test_certify_never_exceeds_bound_many_seeds(seed):
    g = random_instance(60, seed=seed)
    assert certify_spanning_ratio(g) <= spanning_ratio(g.cs) + 1e-9


def test_certify_sampled_pairs(small_graph):
    worst = certify_spanning_ratio(small_graph, [(0, 1), (2, 9), (10, 30)])
    assert 1.0 <= worst <= spanning_ratio(small_graph.cs) + 1e-9


def test_certify_unreachable_raises(cs8):
    # doctored table with no edges at all between the two clusters
    pts = [Point(0, 0), Point(1, 0), Point(50, 50), Point(51, 50)]
    out = [[None] * 8 for _ in pts]
    out[0][0] = 1
    out[2][0] = 3
    g = ThetaGraph(pts, cs8, out)
    with pytest.raises(Unreachable):
        certify_spanning_ratio(g)


# ----------------------------------------------------------- file formats

def test_points_roundtrip(tmp_path):
    rng = make_rng(8, INSTANCE_STREAM)
    pts = generate_points(25, rng)
    path = tmp_path / "pts.txt"
    save_points(path, pts)
    assert load_points(path) == pts  # repr floats round-trip exactly


def test_points_file_comments_and_blanks(tmp_path):
    path = tmp_path / "pts.txt"
    path.write_text("# header\n\n0.5 1.5\n# middle comment\n2.0 3.25\n")
    assert load_points(path) == [Point(0.5, 1.5), Point(2.0, 3.25)]


def test_points_file_malformed_line(tmp_path):
    path = tmp_path / "pts.txt"
    path.write_text("1.0 2.0 3.0\n")
    with pytest.raises(ValueError, match="expected two reals"):
        load_points(path)


def test_graph_json_roundtrip(tmp_path, small_graph):
    path = tmp_path / "g.json"
    save_graph_json(path, small_graph)
    g2 = load_graph_json(path)
    assert g2.cs.k == small_graph.cs.k
    assert g2.points == small_graph.points
    assert g2.out_edge == small_graph.out_edge
    assert g2.edges == small_graph.edges


def test_graph_json_malformed(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"k": 8, "points": [[0,0],[1,0]], "out_edges": [[null]]}')
    with pytest.raises(ValueError):
        load_graph_json(path)
