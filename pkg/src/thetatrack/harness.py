"""Experiment driver: instances, replications, summaries, and file formats.

Each replication is fully isolated: replication i of a run seeded with S uses
seed S+i for its own instance/evolver/tracker streams, so any single
replication can be reproduced on its own. Trajectory CSVs embed the config
fingerprint and replication seed as comment lines and round-trip exactly
(floats are written with repr).
"""

import hashlib
import json
import math
import os
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from .geometry import ConeSystem, Point
from .rng import INSTANCE_STREAM, make_rng
from .spanner import build_theta_graph, load_points
from .tracker import Tracker, TrackerConfig, Trajectory, trajectory_from_world
from .world import EvolverConfig, World


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field."""


class NoData(ValueError):
    """Summary requested over an empty trajectory collection."""


class FingerprintMismatch(ValueError):
    """Refusing to aggregate trajectories from different configurations."""


@dataclass
class ExperimentConfig:
    """Everything one experiment needs; defaults give a desk-scale run."""

    n: int = 200
    k: int = 8
    c: float = 4.0
    evolver: EvolverConfig = field(default_factory=EvolverConfig)
    switch_overhead: float = 0.5
    horizon: Union[float, str] = "auto"
    replications: int = 1
    seed: int = 0
    init: str = "perfect"
    points: str = "uniform-square"
    tracker_enabled: bool = True
    max_steps_per_label: Optional[int] = None

    def validate(self) -> None:
        if not isinstance(self.n, int) or self.n < 2:
            raise ConfigError(f"field 'n': must be an integer >= 2, got {self.n!r}")
        if not isinstance(self.k, int) or self.k < 7:
            raise ConfigError(f"field 'k': must be an integer >= 7, got {self.k!r}")
        if not self.c > 0:
            raise ConfigError(f"field 'c': must be > 0, got {self.c!r}")
        if self.switch_overhead < 0:
            raise ConfigError(f"field 'switch_overhead': must be >= 0, got {self.switch_overhead!r}")
        if isinstance(self.horizon, str):
            if self.horizon != "auto":
                raise ConfigError(f"field 'horizon': must be 'auto' or a number, got {self.horizon!r}")
        elif not self.horizon >= 0:
            raise ConfigError(f"field 'horizon': must be >= 0, got {self.horizon!r}")
        if not isinstance(self.replications, int) or self.replications < 1:
            raise ConfigError(f"field 'replications': must be an integer >= 1, got {self.replications!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"field 'seed': must be a non-negative integer, got {self.seed!r}")
        if self.init not in ("perfect", "scrambled"):
            raise ConfigError(f"field 'init': must be 'perfect' or 'scrambled', got {self.init!r}")
        if not self.points:
            raise ConfigError("field 'points': must be 'uniform-square' or a file path")
        if self.points != "uniform-square" and not os.path.exists(self.points):
            raise ConfigError(f"field 'points': file not found: {self.points}")
        if self.max_steps_per_label is not None and self.max_steps_per_label < self.n:
            raise ConfigError(
                f"field 'max_steps_per_label': must be >= n, got {self.max_steps_per_label!r}")
        try:
            EvolverConfig(self.evolver.kind, self.evolver.swap_radius,
                          self.evolver.swaps_per_step, self.evolver.rng_seed)
        except ValueError as exc:
            raise ConfigError(f"field 'evolver': {exc}") from None

    def resolved_horizon(self) -> float:
        """Numeric horizon; 'auto' scales with the expected mixing time."""
        if self.horizon != "auto":
            return float(self.horizon)
        if self.c > 3:
            z = (self.c - 3.0) / (self.c - 1.0)
            return 20.0 * self.n * math.log(self.n) / z
        return 50.0 * self.n * math.log(self.n)

    def as_dict(self) -> dict:
        return {
            "n": self.n, "k": self.k, "c": self.c,
            "evolver": self.evolver.as_dict(),
            "switch_overhead": self.switch_overhead,
            "horizon": self.horizon,
            "replications": self.replications,
            "seed": self.seed,
            "init": self.init,
            "points": self.points,
            "tracker_enabled": self.tracker_enabled,
            "max_steps_per_label": self.max_steps_per_label,
        }

    def fingerprint(self) -> str:
        """Stable hash of all fields; embedded in every output file."""
        blob = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# ------------------------------------------------------------- instances


def _has_close_pair(xs: np.ndarray, ys: np.ndarray, radius: float) -> bool:
    buckets: dict[tuple[int, int], list[int]] = {}
    for i in range(len(xs)):
        buckets.setdefault((int(xs[i] // radius), int(ys[i] // radius)), []).append(i)
    r2 = radius * radius
    for (cx, cy), members in buckets.items():
        for i in members:
            for gx in (cx - 1, cx, cx + 1):
                for gy in (cy - 1, cy, cy + 1):
                    for j in buckets.get((gx, gy), ()):
                        if j > i and (xs[j] - xs[i]) ** 2 + (ys[j] - ys[i]) ** 2 < r2:
                            return True
    return False


def generate_points(n: int, rng, swap_radius: float = 1.0) -> list[Point]:
    """n points uniform in a square of side sqrt(n) (unit density).

    Resamples until some pair lies within the swap radius, so the evolver is
    never vacuous, and until all points are distinct.
    """
    side = math.sqrt(n)
    for _ in range(1000):
        xs = rng.uniform(0.0, side, n)
        ys = rng.uniform(0.0, side, n)
        pts = {(float(x), float(y)) for x, y in zip(xs, ys)}
        if len(pts) == n and _has_close_pair(xs, ys, swap_radius):
            return [Point(float(x), float(y)) for x, y in zip(xs, ys)]
    raise RuntimeError("could not generate a usable point set (radius too small?)")


# ------------------------------------------------------------ experiments


def run_experiment(cfg: ExperimentConfig) -> list[Trajectory]:
    """Run all replications; deterministic for a fixed (config, seed)."""
    cfg.validate()
    fp = cfg.fingerprint()
    file_points = None
    if cfg.points != "uniform-square":
        file_points = load_points(cfg.points)
        if len(file_points) != cfg.n:
            raise ConfigError(
                f"field 'n': {cfg.n} does not match {len(file_points)} points in {cfg.points}")
    horizon = cfg.resolved_horizon()
    trajectories = []
    for rep in range(cfg.replications):
        rep_seed = cfg.seed + rep
        inst = make_rng(rep_seed, INSTANCE_STREAM)
        if file_points is None:
            pts = generate_points(cfg.n, inst, cfg.evolver.swap_radius)
        else:
            pts = file_points
        graph = build_theta_graph(pts, ConeSystem(cfg.k))
        world = World(graph, rep_seed, init=cfg.init, evolver=cfg.evolver,
                      switch_overhead=cfg.switch_overhead, instance_rng=inst)
        if cfg.tracker_enabled:
            tracker = Tracker(world, TrackerConfig(
                c=cfg.c, max_steps_per_label=cfg.max_steps_per_label))
            traj = tracker.run(horizon)
        else:
            world.record_sample()
            world.advance(horizon)
            traj = trajectory_from_world(world)
        traj.fingerprint = fp
        traj.seed = rep_seed
        trajectories.append(traj)
    return trajectories


@dataclass
class Summary:
    mean_tail_distance: float
    stderr_tail_distance: float
    cap_hits: int
    replications: int
    tail_fraction: float
    fingerprint: str
    rep_tail_means: list[float]
    rep_seeds: list[int]

    def as_dict(self) -> dict:
        return {
            "mean_tail_distance": self.mean_tail_distance,
            "stderr_tail_distance": self.stderr_tail_distance,
            "cap_hits": self.cap_hits,
            "replications": self.replications,
            "tail_fraction": self.tail_fraction,
            "fingerprint": self.fingerprint,
            "rep_tail_means": self.rep_tail_means,
            "rep_seeds": self.rep_seeds,
        }


def summarize(trajectories: Sequence[Trajectory], tail_fraction: float = 0.25) -> Summary:
    """Steady-state summary: mean over the tail window, per replication.

    The tail window of each trajectory is [t_max * (1 - tail_fraction), t_max]
    by sample time, so the result does not depend on sample order. Mixing
    trajectories with different config fingerprints is refused.
    """
    if not trajectories:
        raise NoData("no trajectories to summarize")
    if not 0 < tail_fraction <= 1:
        raise ValueError(f"tail_fraction must be in (0, 1], got {tail_fraction}")
    prints = {t.fingerprint for t in trajectories if t.fingerprint}
    if len(prints) > 1:
        raise FingerprintMismatch(f"mixed config fingerprints: {sorted(prints)}")
    means = []
    caps = 0
    for traj in trajectories:
        if len(traj) == 0:
            raise NoData(f"trajectory seed={traj.seed} has no samples")
        cutoff = float(traj.times.max()) * (1.0 - tail_fraction)
        window = traj.distance[traj.times >= cutoff]
        means.append(float(window.mean()))
        caps += int(traj.cap_hits.max())
    mean = float(np.mean(means))
    stderr = float(np.std(means, ddof=1) / math.sqrt(len(means))) if len(means) > 1 else 0.0
    return Summary(
        mean_tail_distance=mean,
        stderr_tail_distance=stderr,
        cap_hits=caps,
        replications=len(trajectories),
        tail_fraction=tail_fraction,
        fingerprint=next(iter(prints)) if prints else "",
        rep_tail_means=means,
        rep_seeds=[t.seed for t in trajectories],
    )


def run_sweep(base: ExperimentConfig, param: str, values: Sequence,
              tail_fraction: float = 0.25) -> list[dict]:
    """Re-run the experiment for each value of `param`; one summary row each."""
    if param not in ("n", "c"):
        raise ConfigError(f"field 'param': sweep supports 'n' or 'c', got {param!r}")
    rows = []
    for value in values:
        cfg = replace(base, **{param: value})
        summary = summarize(run_experiment(cfg), tail_fraction)
        rows.append({
            "param": param,
            "value": value,
            "n": cfg.n,
            "c": cfg.c,
            "mean_tail_distance": summary.mean_tail_distance,
            "stderr_tail_distance": summary.stderr_tail_distance,
            "ratio_to_n": summary.mean_tail_distance / cfg.n,
            "cap_hits": summary.cap_hits,
            "replications": summary.replications,
            "fingerprint": summary.fingerprint,
        })
    return rows


# ---------------------------------------------------------------- file IO


def save_trajectory(path, traj: Trajectory) -> None:
    """CSV with `time,distance,found,cap_hits` header and comment metadata."""
    with open(path, "w") as fh:
        fh.write(f"# fingerprint={traj.fingerprint}\n")
        fh.write(f"# seed={traj.seed}\n")
        fh.write("time,distance,found,cap_hits\n")
        for t, d, f, c in traj.samples():
            fh.write(f"{t!r},{d!r},{f},{c}\n")


def load_trajectory(path) -> Trajectory:
    """Parse a trajectory CSV back; exact round-trip of what was saved."""
    fingerprint = ""
    seed = 0
    times, dist, found, caps = [], [], [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if body.startswith("fingerprint="):
                    fingerprint = body.split("=", 1)[1]
                elif body.startswith("seed="):
                    seed = int(body.split("=", 1)[1])
                continue
            if line.startswith("time,"):
                continue
            t, d, f, c = line.split(",")
            times.append(float(t))
            dist.append(float(d))
            found.append(int(f))
            caps.append(int(c))
    return Trajectory(
        times=np.array(times, dtype=np.float64),
        distance=np.array(dist, dtype=np.float64),
        found=np.array(found, dtype=np.int64),
        cap_hits=np.array(caps, dtype=np.int64),
        fingerprint=fingerprint,
        seed=seed,
    )


def write_summary_json(path, cfg: ExperimentConfig, summary: Summary,
                       trajectories: Sequence[Trajectory]) -> None:
    payload = {
        "config": cfg.as_dict(),
        "fingerprint": cfg.fingerprint(),
        "horizon_resolved": cfg.resolved_horizon(),
        "summary": summary.as_dict(),
        "replications": [
            {
                "seed": t.seed,
                "samples": len(t),
                "final_time": float(t.times[-1]) if len(t) else None,
                "final_distance": float(t.distance[-1]) if len(t) else None,
                "found": int(t.found.max()) if len(t) else 0,
                "cap_hits": int(t.cap_hits.max()) if len(t) else 0,
            }
            for t in trajectories
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_sweep_csv(path, rows: Sequence[dict]) -> None:
    cols = ["param", "value", "n", "c", "mean_tail_distance",
            "stderr_tail_distance", "ratio_to_n", "cap_hits",
            "replications", "fingerprint"]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(_csv_cell(row[c]) for c in cols) + "\n")


def _csv_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)
