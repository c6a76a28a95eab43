"""Figure rendering for experiment outputs. Files only (Agg backend)."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.collections import LineCollection


def plot_trajectories(trajectories, path, title=None, max_points=2000):
    """Distance vs time, one thin line per replication plus their mean."""
    fig, ax = plt.subplots(figsize=(8.0, 4.5))
    t_max = max(float(tr.times[-1]) for tr in trajectories if len(tr))
    for tr in trajectories:
        stride = max(1, len(tr) // max_points)
        ax.plot(tr.times[::stride], tr.distance[::stride],
                lw=0.6, alpha=0.45, color="tab:blue")
    if len(trajectories) > 1 and t_max > 0:
        grid = np.linspace(0.0, t_max, 500)
        stack = [np.interp(grid, tr.times, tr.distance) for tr in trajectories]
        ax.plot(grid, np.mean(stack, axis=0), lw=1.8, color="tab:red",
                label=f"mean of {len(trajectories)} replications")
        ax.legend(loc="best", fontsize=8)
    ax.set_xlabel("time")
    ax.set_ylabel("total distance D")
    if title:
        ax.set_title(title, fontsize=10)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_sweep(rows, path):
    """Mean tail distance with error bars across the swept values."""
    param = rows[0]["param"]
    xs = [row["value"] for row in rows]
    ys = [row["mean_tail_distance"] for row in rows]
    es = [row["stderr_tail_distance"] for row in rows]
    fig, axes = plt.subplots(1, 2, figsize=(10.0, 4.0))
    axes[0].errorbar(xs, ys, yerr=es, marker="o", capsize=3)
    axes[0].set_xlabel(param)
    axes[0].set_ylabel("mean tail distance")
    axes[0].grid(alpha=0.3)
    ratios = [row["ratio_to_n"] for row in rows]
    axes[1].plot(xs, ratios, marker="s", color="tab:green")
    axes[1].set_xlabel(param)
    axes[1].set_ylabel("mean tail distance / n")
    axes[1].set_ylim(bottom=0)
    axes[1].grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_graph(g, path, title=None):
    """The embedding: points plus undirected theta-graph edges."""
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    segments = [((g.xs[u], g.ys[u]), (g.xs[v], g.ys[v])) for u, v in g.edges]
    ax.add_collection(LineCollection(segments, colors="gray", linewidths=0.5))
    ax.plot(g.xs, g.ys, "o", color="tab:blue", markersize=2.5)
    ax.set_aspect("equal", adjustable="box")
    ax.autoscale()
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
