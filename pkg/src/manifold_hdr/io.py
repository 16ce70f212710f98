"""File formats for sets, estimates, densities and plotting boundaries."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .datasets import angles_to_hours
from .grids import Grid
from .hdr import HdrEstimate
from .manifolds import unit_to_spherical
from .morphology import BallUnionSet, GridSet, boundary_mask


def _fmt(x: float) -> str:
    return repr(float(x))


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


def read_json(path):
    return json.loads(Path(path).read_text())


def write_gridset(path, S: GridSet) -> Path:
    """CSV ``node_index,c1..ck,member`` with one row per grid node."""
    k = S.manifold.ambient_dim
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_index", *[f"c{j + 1}" for j in range(k)], "member"])
        for i, (p, m) in enumerate(zip(S.grid.nodes, S.mask)):
            w.writerow([i, *map(_fmt, p), int(m)])
    return Path(path)


def read_gridset_mask(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([r["member"] == "1" for r in rows], dtype=bool)


def write_ball_union(path, S: BallUnionSet) -> Path:
    return write_json(path, S.to_dict())


def read_ball_union(path) -> BallUnionSet:
    return BallUnionSet.from_dict(read_json(path))


def write_estimate(path, est: HdrEstimate) -> Path:
    return write_json(path, est.to_dict())


def read_estimate(path) -> HdrEstimate:
    return HdrEstimate.from_dict(read_json(path))


def write_density_grid(path, grid: Grid, values) -> Path:
    """CSV ``node_index,value`` of a density evaluated on grid nodes."""
    values = np.asarray(values, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_index", "value"])
        for i, v in enumerate(values):
            w.writerow([i, _fmt(v)])
    return Path(path)


def projection_columns(manifold, points) -> dict[str, np.ndarray]:
    """Plotting coordinates for ``points``.

    Sphere: hemisphere label, orthographic coordinates in the view centred on
    that hemisphere's pole (the south view is mirrored so it reads as seen
    from below), and longitude/latitude in degrees. Circle/torus: each angle
    in hours on a 24 h clock.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, manifold.ambient_dim)
    if manifold.kind == "sphere":
        north = pts[:, 2] >= 0
        lon, lat = unit_to_spherical(pts) if len(pts) else (np.empty(0), np.empty(0))
        return {
            "hemisphere": np.where(north, "north", "south"),
            "ortho_x": pts[:, 0],
            "ortho_y": np.where(north, pts[:, 1], -pts[:, 1]),
            "lon_deg": np.degrees(lon),
            "lat_deg": np.degrees(lat),
        }
    if manifold.is_angular:
        hours = angles_to_hours(pts)
        return {f"hours{j + 1}": hours[:, j] for j in range(manifold.dim)}
    return {}


def boundary_nodes(S: GridSet) -> np.ndarray:
    """Indices of member nodes adjacent (within the grid link radius) to non-members."""
    return np.flatnonzero(boundary_mask(S, S.grid.link_radius))


def write_boundary(path, S: GridSet) -> Path:
    """CSV of boundary nodes with coordinates and projection columns."""
    idx = boundary_nodes(S)
    pts = S.grid.nodes[idx]
    proj = projection_columns(S.manifold, pts)
    k = S.manifold.ambient_dim
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["node_index", *[f"c{j + 1}" for j in range(k)], *proj])
        for row, i in enumerate(idx):
            extra = [v[row] if isinstance(v[row], str) else _fmt(v[row]) for v in proj.values()]
            w.writerow([int(i), *map(_fmt, pts[row]), *extra])
    return Path(path)
