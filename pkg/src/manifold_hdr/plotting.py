"""Matplotlib figures written straight to files (non-interactive backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .datasets import angles_to_hours  # noqa: E402
from .io import boundary_nodes, projection_columns  # noqa: E402
from .manifolds import Manifold  # noqa: E402
from .morphology import GridSet  # noqa: E402


def _finish(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def _hemisphere_panels(ax_n, ax_s, points, **kw):
    proj = projection_columns(Manifold.sphere(), points)
    north = proj["hemisphere"] == "north"
    ax_n.scatter(proj["ortho_x"][north], proj["ortho_y"][north], **kw)
    ax_s.scatter(proj["ortho_x"][~north], proj["ortho_y"][~north], **kw)


def plot_sphere_estimate(path, sample, region: GridSet, truth: GridSet | None = None, title: str = "") -> Path:
    """North and south orthographic views of a sample and region boundaries."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 4.6))
    for ax, label in zip(axes, ("north", "south")):
        ax.add_patch(plt.Circle((0, 0), 1.0, fill=False, color="0.5", lw=0.8))
        ax.set_aspect("equal")
        ax.set_xlim(-1.05, 1.05)
        ax.set_ylim(-1.05, 1.05)
        ax.set_xticks([])
        ax.set_yticks([])
        ax.set_title(f"{label} view")
    _hemisphere_panels(*axes, np.asarray(sample), s=4, c="k", alpha=0.5, label="sample")
    if truth is not None and not truth.is_empty():
        _hemisphere_panels(*axes, truth.grid.nodes[boundary_nodes(truth)], s=1, c="tab:blue", label="true boundary")
    if not region.is_empty():
        _hemisphere_panels(*axes, region.grid.nodes[boundary_nodes(region)], s=1, c="tab:red", label="estimate boundary")
    axes[0].legend(loc="lower left", fontsize=7, markerscale=3)
    if title:
        fig.suptitle(title)
    return _finish(fig, path)


def plot_torus_estimate(path, sample, region: GridSet, title: str = "") -> Path:
    """Flat 24 h x 24 h view of a torus sample and region boundary."""
    fig, ax = plt.subplots(figsize=(5, 5))
    h = angles_to_hours(np.asarray(sample))
    ax.scatter(h[:, 0], h[:, 1], s=10, c="k", label="sample")
    if not region.is_empty():
        b = angles_to_hours(region.grid.nodes[boundary_nodes(region)])
        ax.scatter(b[:, 0], b[:, 1], s=1, c="tab:red", label="estimate boundary")
    ax.plot([0, 24], [0, 24], ls="--", c="0.6", lw=0.8)
    ax.set_xlim(0, 24)
    ax.set_ylim(0, 24)
    ax.set_xlabel("phase 1 (h)")
    ax.set_ylabel("phase 2 (h)")
    ax.legend(loc="upper left", fontsize=7, markerscale=3)
    if title:
        ax.set_title(title)
    return _finish(fig, path)


def plot_convergence(path, record) -> Path:
    """Box plot of the Hausdorff error against sample size."""
    ns = sorted({r["n"] for r in record.rows})
    data = [record.values("d_H", n=n) for n in ns]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.boxplot(data)
    ax.set_xticks(range(1, len(ns) + 1), [str(n) for n in ns])
    ax.set_xlabel("n")
    ax.set_ylabel("Hausdorff error")
    ax.set_title(f"{record.study} ({record.config_hash})")
    return _finish(fig, path)
