"""Theta-graph spanners, cone routing, and oracle-guided label tracking.

A library plus CLI for simulating label tracking on a planar point set: a
background evolver keeps swapping labels of nearby points while a tracker
chases randomly chosen labels over the theta-graph embedding, steered by an
oracle that reports which cone around the hypothesized position contains the
truth.
"""

from .geometry import (ConeCountTooSmall, ConeSystem, DegenerateDirection,
                       Point, WrongCone, bisector_projection, cone_of,
                       spanning_ratio)
from .harness import (ConfigError, ExperimentConfig, FingerprintMismatch,
                      NoData, Summary, generate_points, load_trajectory,
                      run_experiment, run_sweep, save_trajectory, summarize)
from .spanner import (DuplicatePoint, NoEdgeInCone, RoutingDiverged,
                      ThetaGraph, TooFewPoints, Unreachable,
                      build_theta_graph, certify_spanning_ratio,
                      load_graph_json, load_points, path_length, route,
                      route_step, save_graph_json, save_points,
                      shortest_path_lengths)
from .tracker import (SimulationStalled, Tracker, TrackerConfig, TrackEvent,
                      Trajectory)
from .world import (ConeOracle, Evolver, EvolverConfig, GraphPos, Hypothesis,
                    Matching, QueryOffVertex, World, distance,
                    eligible_pairs)

__version__ = "0.1.0"
