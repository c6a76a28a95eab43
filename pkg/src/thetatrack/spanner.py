"""Theta-graph construction, cone routing, and spanning-ratio certification.

Construction follows the classic rule: for every vertex and every cone
around it, connect to the point in that cone whose projection onto the cone
bisector is smallest (ties broken by smallest vertex index). The undirected
union of those out-edges is the embedding labels travel over. Routing toward
a target repeatedly follows the out-edge in the cone containing the target.
"""

import json
import math
from heapq import heappush, heappop
from typing import Iterable, Optional, Sequence

import numpy as np

from .geometry import TWO_PI, ConeSystem, Point, cone_of


class TooFewPoints(ValueError):
    """A theta graph needs at least two points."""


class DuplicatePoint(ValueError):
    """Input points must be pairwise distinct."""


class NoEdgeInCone(LookupError):
    """Requested out-edge in a cone that contains no point."""


class RoutingDiverged(RuntimeError):
    """Routing exceeded the defensive step cap; indicates a construction bug."""


class Unreachable(RuntimeError):
    """No path between two vertices; theta graphs with k >= 7 are connected."""


class ThetaGraph:
    """Immutable theta graph over a fixed point set.

    `out_edge[v][i]` is the chosen neighbor of v in cone i (None when the
    cone is empty); `out_len[v][i]` the matching Euclidean edge length.
    `edges` maps each undirected embedding edge (u, v) with u < v to its
    length, and `adj` is the undirected adjacency list used by Dijkstra.
    """

    def __init__(self, points: Sequence[Point], cs: ConeSystem,
                 out_edge: list[list[Optional[int]]]):
        self.points = [Point(float(p[0]), float(p[1])) for p in points]
        self.cs = cs
        self.out_edge = out_edge
        self.xs = [p.x for p in self.points]
        self.ys = [p.y for p in self.points]

        n = len(self.points)
        self.out_len: list[list[float]] = [[0.0] * cs.k for _ in range(n)]
        self.edges: dict[tuple[int, int], float] = {}
        for u in range(n):
            for i, v in enumerate(out_edge[u]):
                if v is None:
                    continue
                d = self.edge_length(u, v)
                self.out_len[u][i] = d
                key = (u, v) if u < v else (v, u)
                self.edges[key] = d
        self.adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        for (u, v), d in self.edges.items():
            self.adj[u].append((v, d))
            self.adj[v].append((u, d))

    @property
    def n(self) -> int:
        return len(self.points)

    def edge_length(self, u: int, v: int) -> float:
        return math.hypot(self.xs[v] - self.xs[u], self.ys[v] - self.ys[u])


def _validate_points(points: Sequence[Point]) -> None:
    if len(points) < 2:
        raise TooFewPoints(f"need at least 2 points, got {len(points)}")
    seen: dict[tuple[float, float], int] = {}
    for idx, p in enumerate(points):
        x, y = float(p[0]), float(p[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            raise ValueError(f"point {idx} has non-finite coordinates ({x}, {y})")
        key = (x, y)
        if key in seen:
            raise DuplicatePoint(f"points {seen[key]} and {idx} coincide at {key}")
        seen[key] = idx


def build_theta_graph(points: Sequence[Point], cs: ConeSystem) -> ThetaGraph:
    """Build the theta graph on `points` under cone system `cs`.

    Per-vertex scan of all other points, bucketed by cone, keeping the
    minimum bisector projection (smallest index on ties). Deterministic for
    a fixed input order.
    """
    _validate_points(points)
    n = len(points)
    k = cs.k
    theta = cs.theta
    xs = np.array([float(p[0]) for p in points])
    ys = np.array([float(p[1]) for p in points])
    bis = (np.arange(k) + 0.5) * theta
    bis_cos = np.cos(bis)
    bis_sin = np.sin(bis)

    out_edge: list[list[Optional[int]]] = []
    for u in range(n):
        dx = xs - xs[u]
        dy = ys - ys[u]
        ang = np.arctan2(dy, dx)
        ang = np.where(ang < 0.0, ang + TWO_PI, ang)
        cones = (ang / theta).astype(np.int64) % k
        proj = dx * bis_cos[cones] + dy * bis_sin[cones]
        proj[u] = np.inf
        row: list[Optional[int]] = [None] * k
        for i in range(k):
            cand = np.flatnonzero(cones == i)
            cand = cand[cand != u]
            if cand.size:
                # argmin returns the first minimum; cand ascending -> smallest index wins ties
                row[i] = int(cand[np.argmin(proj[cand])])
        out_edge.append(row)
    return ThetaGraph(points, cs, out_edge)


# ---------------------------------------------------------------- routing


def route_step(g: ThetaGraph, at: int, target_cone: int) -> int:
    """Neighbor of `at` along its out-edge in `target_cone`."""
    v = g.out_edge[at][target_cone]
    if v is None:
        raise NoEdgeInCone(f"vertex {at} has no out-edge in cone {target_cone}")
    return v


def route(g: ThetaGraph, frm: int, to: int) -> list[int]:
    """Cone-route from vertex `frm` to vertex `to`.

    Each step follows the out-edge of the current vertex in the cone that
    contains the target. The returned path starts at `frm` and ends at `to`;
    its length never exceeds spanning_ratio(cs) times the Euclidean distance.
    """
    path = [frm]
    if frm == to:
        return path
    target = g.points[to]
    at = frm
    cap = g.n * g.cs.k  # defensive; a correct construction terminates in < n steps
    while at != to:
        i = cone_of(g.points[at], target, g.cs)
        at = route_step(g, at, i)
        path.append(at)
        if len(path) > cap:
            raise RoutingDiverged(f"no arrival after {cap} steps from {frm} to {to}")
    return path


def path_length(g: ThetaGraph, path: Sequence[int]) -> float:
    return sum(g.edge_length(u, v) for u, v in zip(path, path[1:]))


# ---------------------------------------------------------- certification


def shortest_path_lengths(g: ThetaGraph, source: int) -> list[float]:
    """Dijkstra over the undirected embedding; inf marks unreachable vertices."""
    dist = [math.inf] * g.n
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        d, u = heappop(heap)
        if d > dist[u]:
            continue
        for v, w in g.adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heappush(heap, (nd, v))
    return dist


def certify_spanning_ratio(g: ThetaGraph,
                           pairs: Optional[Iterable[tuple[int, int]]] = None) -> float:
    """Max over pairs of (shortest-path length / Euclidean distance).

    `pairs=None` checks all vertex pairs. Shortest paths come from Dijkstra
    on the undirected embedding, independent of the routing rule. Raises
    Unreachable if some pair has no connecting path.
    """
    by_source: dict[int, set[int]] = {}
    if pairs is None:
        for u in range(g.n):
            by_source[u] = set(range(u + 1, g.n))
    else:
        for u, v in pairs:
            if u != v:
                by_source.setdefault(u, set()).add(v)
    worst = 1.0 if g.n else 0.0
    for u, targets in by_source.items():
        dist = shortest_path_lengths(g, u)
        for v in targets:
            if math.isinf(dist[v]):
                raise Unreachable(f"no path between {u} and {v}")
            ratio = dist[v] / g.edge_length(u, v)
            if ratio > worst:
                worst = ratio
    return worst


# -------------------------------------------------------------- graph JSON


def save_graph_json(path, g: ThetaGraph) -> None:
    """Serialize as {"k": int, "points": [[x,y]...], "out_edges": [[v|null]*k ...]}."""
    payload = {
        "k": g.cs.k,
        "points": [[p.x, p.y] for p in g.points],
        "out_edges": [list(row) for row in g.out_edge],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_graph_json(path) -> ThetaGraph:
    """Rebuild a ThetaGraph from its JSON form (out-edges taken as given)."""
    with open(path) as fh:
        payload = json.load(fh)
    try:
        k = int(payload["k"])
        points = [Point(float(x), float(y)) for x, y in payload["points"]]
        out_edges = payload["out_edges"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"{path}: malformed graph JSON ({exc})") from None
    n = len(points)
    if len(out_edges) != n:
        raise ValueError(f"{path}: out_edges has {len(out_edges)} rows for {n} points")
    table: list[list[Optional[int]]] = []
    for u, row in enumerate(out_edges):
        if len(row) != k:
            raise ValueError(f"{path}: vertex {u} has {len(row)} cones, expected {k}")
        clean: list[Optional[int]] = []
        for v in row:
            if v is None:
                clean.append(None)
            else:
                v = int(v)
                if not 0 <= v < n or v == u:
                    raise ValueError(f"{path}: vertex {u} has invalid neighbor {v}")
                clean.append(v)
        table.append(clean)
    return ThetaGraph(points, ConeSystem(k), table)


# ------------------------------------------------------------- point files


def save_points(path, points: Sequence[Point]) -> None:
    """Write one `x y` pair per line (repr floats, exact round-trip)."""
    with open(path, "w") as fh:
        fh.write("# x y\n")
        for p in points:
            fh.write(f"{p[0]!r} {p[1]!r}\n")


def load_points(path) -> list[Point]:
    """Read a point-set file: two reals per line, '#' comment lines ignored."""
    points: list[Point] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.strip()
            if not body or body.startswith("#"):
                continue
            parts = body.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two reals, got {body!r}")
            try:
                x, y = float(parts[0]), float(parts[1])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValueError(f"{path}:{lineno}: non-finite coordinate")
            points.append(Point(x, y))
    return points
