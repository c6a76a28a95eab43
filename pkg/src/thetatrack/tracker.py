"""Randomized oracle-guided tracking over the theta graph.

The tracker repeatedly draws a label uniformly at random and chases it: query
the cone oracle at the label's hypothesized vertex, follow the out-edge in
the returned cone at speed c times the graph's stretch factor, and repeat
until the oracle reports a match. Evolver ticks interleave with traversals in
exact simulated time.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import spanning_ratio
from .rng import TRACKER_STREAM, IntDraws, make_rng
from .spanner import NoEdgeInCone
from .world import GraphPos, World


class SimulationStalled(RuntimeError):
    """run() made no simulated-time progress over many iterations.

    Only reachable with switch_overhead == 0 on a fully matched world, where
    no mechanism can advance the clock.
    """


@dataclass
class TrackerConfig:
    """Chase speed c (label speed is c * stretch factor), step cap, RNG seed.

    max_steps_per_label of None means 10 * n * k; rng_seed of None derives
    the tracker stream from the world seed.
    """

    c: float = 4.0
    max_steps_per_label: Optional[int] = None
    rng_seed: Optional[int] = None

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"speed factor c must be > 0, got {self.c}")


@dataclass(frozen=True)
class TrackEvent:
    time: float
    label: int
    kind: str  # selected | edge-traversed | found | cap-hit
    position: GraphPos


@dataclass
class Trajectory:
    """Time series of (time, D, labels found so far, cap hits) samples."""

    times: np.ndarray
    distance: np.ndarray
    found: np.ndarray
    cap_hits: np.ndarray
    fingerprint: str = ""
    seed: int = 0

    def __len__(self) -> int:
        return len(self.times)

    def samples(self):
        """Iterate (time, D, found, cap_hits) rows."""
        return zip(self.times.tolist(), self.distance.tolist(),
                   self.found.tolist(), self.cap_hits.tolist())

    def same_samples(self, other: "Trajectory") -> bool:
        return (np.array_equal(self.times, other.times)
                and np.array_equal(self.distance, other.distance)
                and np.array_equal(self.found, other.found)
                and np.array_equal(self.cap_hits, other.cap_hits))


def trajectory_from_world(world: World, fingerprint: str = "", seed: Optional[int] = None) -> Trajectory:
    return Trajectory(
        times=np.array(world.sample_t, dtype=np.float64),
        distance=np.array(world.sample_d, dtype=np.float64),
        found=np.array(world.sample_found, dtype=np.int64),
        cap_hits=np.array(world.sample_caps, dtype=np.int64),
        fingerprint=fingerprint,
        seed=world.seed if seed is None else seed,
    )


class Tracker:
    """Owns the chase loop for one world."""

    def __init__(self, world: World, cfg: TrackerConfig):
        self.world = world
        self.cfg = cfg
        g = world.graph
        self.speed = cfg.c * spanning_ratio(g.cs)
        cap = cfg.max_steps_per_label
        self.max_steps = cap if cap is not None else 10 * g.n * g.cs.k
        if self.max_steps < g.n:
            raise ValueError("max_steps_per_label must be at least n")
        seed = cfg.rng_seed if cfg.rng_seed is not None else world.seed
        self._pick = IntDraws(make_rng(seed, TRACKER_STREAM), g.n)

    def track_label(self, label: int) -> list[TrackEvent]:
        """Chase one label until the oracle reports a match (or the cap hits).

        Each loop turn queries the oracle (paying the switch cost once, on
        the first query after a label change), follows the out-edge of the
        current vertex in the returned cone, and lands the hypothesis on the
        far endpoint. The hypothesis moves continuously during traversals, so
        evolver ticks inside them see (and samples record) mid-edge positions.
        """
        world = self.world
        g = world.graph
        events = [TrackEvent(world.clock.now, label, "selected", world.hyp.pos(label))]
        world.tracked_label = label
        steps = 0
        while True:
            cone = world.oracle.query(world, label)
            if cone is None:
                world.found_count += 1
                world.record_sample()
                events.append(TrackEvent(world.clock.now, label, "found", world.hyp.pos(label)))
                break
            at = world.hyp.vertex(label)
            nxt = g.out_edge[at][cone]
            if nxt is None:
                # unreachable when the oracle is sound: the true vertex sits in that cone
                raise NoEdgeInCone(f"vertex {at} has no out-edge in reported cone {cone}")
            world.traverse(label, at, nxt, g.out_len[at][cone] / self.speed, self.speed)
            events.append(TrackEvent(world.clock.now, label, "edge-traversed", world.hyp.pos(label)))
            steps += 1
            if steps >= self.max_steps:
                world.cap_hits += 1
                world.record_sample()
                events.append(TrackEvent(world.clock.now, label, "cap-hit", world.hyp.pos(label)))
                break
        world.tracked_label = None
        return events

    def run(self, horizon: float) -> Trajectory:
        """Chase uniformly random labels until the clock reaches `horizon`.

        Samples D at every integer tick and at every chase completion; the
        trajectory opens with one sample at the start time.
        """
        world = self.world
        world.record_sample()
        stalled = 0
        stall_cap = 100 * world.graph.n
        while world.clock.now < horizon:
            before = world.clock.now
            self.track_label(self._pick())
            if world.clock.now == before:
                stalled += 1
                if stalled > stall_cap:
                    raise SimulationStalled(
                        f"no time progress in {stall_cap} consecutive chases "
                        "(zero switch overhead on a fully matched world)")
            else:
                stalled = 0
        return trajectory_from_world(world)
