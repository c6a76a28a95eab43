"""The evolving system: ground-truth matching, hypothesis, evolver, cone oracle.

A World owns one simulation: the true label-to-vertex matching M, the
hypothesized positions H on the graph embedding, a simulated clock whose
integer ticks fire the evolver, and the oracle that reports which cone around
H(l) contains l's true vertex. The total distance D(M, H) (sum of per-label
Euclidean gaps) is maintained incrementally with compensated summation; a
full recomputation is available for cross-checking.

Worlds are single-owner mutable state: run one simulation per World and use
independent Worlds (own seeds) for parallel replications.
"""

import math
from array import array
from dataclasses import dataclass
from typing import Optional

from .geometry import Point, cone_of
from .rng import EVOLVER_STREAM, INSTANCE_STREAM, IntDraws, make_rng
from .spanner import ThetaGraph

EVOLVER_KINDS = ("none", "random", "greedy-max", "evader")


class QueryOffVertex(RuntimeError):
    """Oracle queried while the hypothesized position is mid-edge."""


@dataclass(frozen=True)
class GraphPos:
    """Position on the embedding: a vertex, or a point `offset` along edge (u, v).

    Vertex form has v=None and offset=0; edge positions whose offset reaches
    an endpoint are normalized back to vertex form by the factories.
    """

    u: int
    v: Optional[int] = None
    offset: float = 0.0

    @property
    def is_vertex(self) -> bool:
        return self.v is None


class Matching:
    """Label-vertex bijection; label_at and vertex_of stay mutual inverses."""

    def __init__(self, vertex_of: list[int]):
        n = len(vertex_of)
        if sorted(vertex_of) != list(range(n)):
            raise ValueError("vertex_of is not a permutation")
        self.vertex_of = list(vertex_of)
        self.label_at = [0] * n
        for label, v in enumerate(vertex_of):
            self.label_at[v] = label

    @classmethod
    def random(cls, n: int, rng) -> "Matching":
        return cls(rng.permutation(n).tolist())

    @property
    def n(self) -> int:
        return len(self.vertex_of)

    def swap_vertices(self, u: int, v: int) -> None:
        """Exchange the labels sitting at vertices u and v."""
        lu, lv = self.label_at[u], self.label_at[v]
        self.label_at[u], self.label_at[v] = lv, lu
        self.vertex_of[lu], self.vertex_of[lv] = v, u

    def check_bijection(self) -> None:
        assert sorted(self.vertex_of) == list(range(self.n))
        assert all(self.label_at[self.vertex_of[l]] == l for l in range(self.n))


class Hypothesis:
    """Per-label embedding positions with cached planar coordinates."""

    def __init__(self, g: ThetaGraph, vertices: list[int]):
        self.g = g
        self.eu = list(vertices)
        self.ev = [-1] * len(vertices)  # -1 marks the vertex form
        self.off = [0.0] * len(vertices)
        self.x = [g.xs[v] for v in vertices]
        self.y = [g.ys[v] for v in vertices]

    def pos(self, label: int) -> GraphPos:
        if self.ev[label] < 0:
            return GraphPos(self.eu[label])
        return GraphPos(self.eu[label], self.ev[label], self.off[label])

    def planar(self, label: int) -> Point:
        return Point(self.x[label], self.y[label])

    def vertex(self, label: int) -> Optional[int]:
        """Current vertex, or None when the position is mid-edge."""
        return self.eu[label] if self.ev[label] < 0 else None

    def edge_of(self, label: int) -> tuple[int, int]:
        u = self.eu[label]
        v = self.ev[label]
        return (u, v) if v >= 0 else (u, u)


class EvolverConfig:
    """How the background process perturbs the matching.

    kind: none | random | greedy-max | evader. Each tick it swaps the labels
    of `swaps_per_step` vertex pairs closer than swap_radius (strictly).
    rng_seed of None derives the evolver stream from the world seed.
    """

    def __init__(self, kind: str = "random", swap_radius: float = 1.0,
                 swaps_per_step: int = 1, rng_seed: Optional[int] = None):
        if kind == "greedy":
            kind = "greedy-max"
        if kind not in EVOLVER_KINDS:
            raise ValueError(f"unknown evolver kind {kind!r}, expected one of {EVOLVER_KINDS}")
        if not swap_radius > 0:
            raise ValueError(f"swap_radius must be > 0, got {swap_radius}")
        if swaps_per_step < 1:
            raise ValueError(f"swaps_per_step must be >= 1, got {swaps_per_step}")
        self.kind = kind
        self.swap_radius = float(swap_radius)
        self.swaps_per_step = int(swaps_per_step)
        self.rng_seed = rng_seed

    def as_dict(self) -> dict:
        return {"kind": self.kind, "swap_radius": self.swap_radius,
                "swaps_per_step": self.swaps_per_step, "rng_seed": self.rng_seed}


def eligible_pairs(g: ThetaGraph, radius: float) -> list[tuple[int, int]]:
    """All vertex pairs strictly closer than `radius`, in canonical order.

    Grid buckets of cell size `radius`; built once since the point set never
    moves.
    """
    buckets: dict[tuple[int, int], list[int]] = {}
    cells = []
    for v in range(g.n):
        key = (math.floor(g.xs[v] / radius), math.floor(g.ys[v] / radius))
        cells.append(key)
        buckets.setdefault(key, []).append(v)
    pairs = []
    r2 = radius * radius
    for v in range(g.n):
        cx, cy = cells[v]
        px, py = g.xs[v], g.ys[v]
        for gx in (cx - 1, cx, cx + 1):
            for gy in (cy - 1, cy, cy + 1):
                for w in buckets.get((gx, gy), ()):
                    if w <= v:
                        continue
                    dx = g.xs[w] - px
                    dy = g.ys[w] - py
                    if dx * dx + dy * dy < r2:
                        pairs.append((v, w))
    pairs.sort()
    return pairs


class Evolver:
    """Background process swapping labels of nearby vertices once per tick."""

    def __init__(self, g: ThetaGraph, cfg: EvolverConfig, rng):
        self.cfg = cfg
        self.pairs = eligible_pairs(g, cfg.swap_radius)
        self.pairs_at: list[list[int]] = [[] for _ in range(g.n)]
        for idx, (u, v) in enumerate(self.pairs):
            self.pairs_at[u].append(idx)
            self.pairs_at[v].append(idx)
        self._draw = IntDraws(rng, len(self.pairs)) if self.pairs else None

    def step(self, world: "World", tracked: Optional[int] = None) -> Optional[tuple[int, int]]:
        """Pick one eligible pair per `kind` and swap its labels.

        Returns the swapped vertex pair, or None when no pair is eligible.
        """
        if not self.pairs:
            return None
        kind = self.cfg.kind
        if kind == "random":
            u, v = self.pairs[self._draw()]
        elif kind == "greedy-max":
            u, v = self.pairs[self._greedy_index(world)]
        elif kind == "evader":
            idx = self._evader_index(world, tracked)
            if idx is None:
                idx = self._greedy_index(world)
            u, v = self.pairs[idx]
        else:
            return None
        world.apply_swap(u, v)
        return (u, v)

    def _swap_gain(self, world: "World", u: int, v: int) -> float:
        """Change in D(M, H) if the labels at u and v trade places."""
        g = world.graph
        lu = world.matching.label_at[u]
        lv = world.matching.label_at[v]
        hyp = world.hyp
        gain = math.hypot(hyp.x[lu] - g.xs[v], hyp.y[lu] - g.ys[v]) - world.d[lu]
        gain += math.hypot(hyp.x[lv] - g.xs[u], hyp.y[lv] - g.ys[u]) - world.d[lv]
        return gain

    def _greedy_index(self, world: "World") -> int:
        best, best_gain = 0, -math.inf
        for idx, (u, v) in enumerate(self.pairs):
            gain = self._swap_gain(world, u, v)
            if gain > best_gain:
                best, best_gain = idx, gain
        return best

    def _evader_index(self, world: "World", tracked: Optional[int]) -> Optional[int]:
        """Pair moving the tracked label as far as possible from its hypothesis."""
        if tracked is None:
            return None
        w = world.matching.vertex_of[tracked]
        hx, hy = world.hyp.x[tracked], world.hyp.y[tracked]
        g = world.graph
        best, best_d = None, -math.inf
        for idx in self.pairs_at[w]:
            u, v = self.pairs[idx]
            other = v if u == w else u
            d = math.hypot(hx - g.xs[other], hy - g.ys[other])
            if d > best_d:
                best, best_d = idx, d
        return best


class ConeOracle:
    """Reports the cone around H(l) containing l's true vertex, or None on a match.

    Switching to a different label costs `switch_overhead` simulated time,
    charged before the answer is formed (evolver ticks inside that interval
    fire first); repeat queries on the same label are free.
    """

    def __init__(self, switch_overhead: float = 0.5):
        if switch_overhead < 0:
            raise ValueError(f"switch_overhead must be >= 0, got {switch_overhead}")
        self.switch_overhead = switch_overhead
        self.last_queried: Optional[int] = None

    def query(self, world: "World", label: int) -> Optional[int]:
        if world.hyp.vertex(label) is None:
            raise QueryOffVertex(f"label {label} hypothesis is mid-edge")
        if label != self.last_queried:
            world.advance(self.switch_overhead)
            self.last_queried = label
        hv = world.hyp.vertex(label)
        tv = world.matching.vertex_of[label]
        if tv == hv:
            return None
        g = world.graph
        return cone_of(g.points[hv], g.points[tv], g.cs)


class Clock:
    """Simulated time; the evolver fires at integer times, next_tick first."""

    def __init__(self):
        self.now = 0.0
        self.next_tick = 1


class World:
    """One evolving simulation over a fixed theta graph."""

    def __init__(self, graph: ThetaGraph, seed: int, *, init: str = "perfect",
                 evolver: Optional[EvolverConfig] = None,
                 switch_overhead: float = 0.5, instance_rng=None):
        if init not in ("perfect", "scrambled"):
            raise ValueError(f"init must be 'perfect' or 'scrambled', got {init!r}")
        self.graph = graph
        self.seed = seed
        n = graph.n
        inst = instance_rng if instance_rng is not None else make_rng(seed, INSTANCE_STREAM)
        self.matching = Matching.random(n, inst)
        if init == "perfect":
            start = list(self.matching.vertex_of)
        else:
            start = inst.integers(0, n, size=n).tolist()
        self.hyp = Hypothesis(graph, start)
        self.clock = Clock()
        self.oracle = ConeOracle(switch_overhead)
        self.evolver_config = evolver
        self.evolver: Optional[Evolver] = None
        if evolver is not None and evolver.kind != "none":
            eseed = evolver.rng_seed if evolver.rng_seed is not None else seed
            self.evolver = Evolver(graph, evolver, make_rng(eseed, EVOLVER_STREAM))
        self.tracked_label: Optional[int] = None
        self.found_count = 0
        self.cap_hits = 0

        xs, ys = graph.xs, graph.ys
        vo = self.matching.vertex_of
        self.d = [math.hypot(self.hyp.x[l] - xs[vo[l]], self.hyp.y[l] - ys[vo[l]])
                  for l in range(n)]
        self._dsum = math.fsum(self.d)
        self._dcomp = 0.0

        self.sample_t = array("d")
        self.sample_d = array("d")
        self.sample_found = array("q")
        self.sample_caps = array("q")

    # ------------------------------------------------------------ distance

    @property
    def total_distance(self) -> float:
        """Incrementally maintained D(M, H)."""
        return self._dsum if self._dsum > 0.0 else 0.0

    def recompute_distance(self) -> float:
        """D(M, H) from scratch; cross-check for the incremental total."""
        return distance(self.matching, self.hyp)

    def _add_distance(self, delta: float) -> None:
        # Kahan-compensated accumulation keeps drift below the 1e-9 contract
        y = delta - self._dcomp
        t = self._dsum + y
        self._dcomp = (t - self._dsum) - y
        self._dsum = t

    def _retarget(self, label: int, vertex: int) -> None:
        nd = math.hypot(self.hyp.x[label] - self.graph.xs[vertex],
                        self.hyp.y[label] - self.graph.ys[vertex])
        self._add_distance(nd - self.d[label])
        self.d[label] = nd

    def _rehome(self, label: int) -> None:
        self._retarget(label, self.matching.vertex_of[label])

    def apply_swap(self, u: int, v: int) -> None:
        """Swap the labels at vertices u and v, updating distance accounting."""
        self.matching.swap_vertices(u, v)
        self._rehome(self.matching.label_at[u])
        self._rehome(self.matching.label_at[v])

    def set_hypothesis_vertex(self, label: int, v: int) -> None:
        hyp = self.hyp
        hyp.eu[label] = v
        hyp.ev[label] = -1
        hyp.off[label] = 0.0
        hyp.x[label] = self.graph.xs[v]
        hyp.y[label] = self.graph.ys[v]
        self._rehome(label)

    def set_hypothesis_edge(self, label: int, u: int, v: int, offset: float) -> None:
        """Place H(label) `offset` along edge (u, v); endpoints normalize to vertices."""
        key = (u, v) if u < v else (v, u)
        length = self.graph.edges.get(key)
        if length is None:
            raise ValueError(f"({u}, {v}) is not an embedding edge")
        if offset < 0.0 or offset > length:
            raise ValueError(f"offset {offset} outside [0, {length}]")
        if offset == 0.0:
            self.set_hypothesis_vertex(label, u)
        elif offset == length:
            self.set_hypothesis_vertex(label, v)
        else:
            self._slide(label, u, v, offset / length)

    def _slide(self, label: int, u: int, v: int, frac: float) -> None:
        g = self.graph
        hyp = self.hyp
        hyp.eu[label] = u
        hyp.ev[label] = v
        hyp.off[label] = frac * g.edges[(u, v) if u < v else (v, u)]
        hyp.x[label] = g.xs[u] + frac * (g.xs[v] - g.xs[u])
        hyp.y[label] = g.ys[u] + frac * (g.ys[v] - g.ys[u])
        self._rehome(label)

    # ---------------------------------------------------------------- time

    def record_sample(self) -> None:
        """Log (time, D, found-so-far, cap-hits); same-time re-records replace."""
        t = self.clock.now
        if len(self.sample_t) and self.sample_t[-1] == t:
            self.sample_d[-1] = self.total_distance
            self.sample_found[-1] = self.found_count
            self.sample_caps[-1] = self.cap_hits
            return
        self.sample_t.append(t)
        self.sample_d.append(self.total_distance)
        self.sample_found.append(self.found_count)
        self.sample_caps.append(self.cap_hits)

    def _fire_tick(self) -> None:
        if self.evolver is not None:
            for _ in range(self.evolver.cfg.swaps_per_step):
                self.evolver.step(self, self.tracked_label)
        self.record_sample()
        self.clock.next_tick += 1

    def advance(self, dt: float) -> None:
        """Let `dt` simulated time pass; integer ticks fire the evolver."""
        if dt < 0:
            raise ValueError("cannot advance backwards")
        clock = self.clock
        end = clock.now + dt
        while clock.next_tick <= end:
            clock.now = float(clock.next_tick)
            self._fire_tick()
        clock.now = end

    def traverse(self, label: int, u: int, v: int, duration: float, speed: float) -> None:
        """Slide H(label) from vertex u along edge (u, v) for `duration` at `speed`.

        The position moves linearly; every integer tick inside the interval
        updates the position first, then fires the evolver. Ends with
        H(label) at vertex v.
        """
        g = self.graph
        key = (u, v) if u < v else (v, u)
        length = g.edges[key]
        clock = self.clock
        t0 = clock.now
        end = t0 + duration
        hyp = self.hyp
        ux0, uy0 = g.xs[u], g.ys[u]
        fx = (g.xs[v] - ux0) / length
        fy = (g.ys[v] - uy0) / length
        while clock.next_tick <= end:
            tt = float(clock.next_tick)
            off = (tt - t0) * speed
            if off > length:  # float fuzz when a tick lands at the traversal end
                off = length
            hyp.eu[label] = u
            hyp.ev[label] = v
            hyp.off[label] = off
            hyp.x[label] = ux0 + off * fx
            hyp.y[label] = uy0 + off * fy
            self._rehome(label)
            clock.now = tt
            self._fire_tick()
        clock.now = end
        self.set_hypothesis_vertex(label, v)


def distance(matching: Matching, hyp: Hypothesis) -> float:
    """Sum over labels of the Euclidean gap between hypothesis and truth.

    Full recomputation from scratch (exact summation); mid-edge hypothesis
    positions use their interpolated planar coordinates.
    """
    g = hyp.g
    vo = matching.vertex_of
    return math.fsum(
        math.hypot(hyp.x[l] - g.xs[vo[l]], hyp.y[l] - g.ys[vo[l]])
        for l in range(len(vo))
    )
