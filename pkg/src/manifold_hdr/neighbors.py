"""Nearest-neighbour and radius queries under a manifold's geodesic metric.

Small problems are solved by brute force over the full distance matrix; large
ones go through a k-d tree on the embedded coordinates (chordal distance on
the sphere is monotone in geodesic distance, and the flat torus is a periodic
box). Distances returned by the tree path are recomputed with the manifold's
own metric so both paths report the same numbers.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .manifolds import TWO_PI, Manifold

BRUTE_FORCE_LIMIT = 2_000_000
_CHUNK = 1_000_000


def _tree(manifold: Manifold, points: np.ndarray) -> cKDTree:
    if manifold.is_angular:
        # boxsize demands coordinates strictly below the period
        pts = np.where(points >= TWO_PI, 0.0, points)
        return cKDTree(pts, boxsize=TWO_PI)
    return cKDTree(points)


def nearest(manifold: Manifold, queries, targets, *, brute: bool | None = None):
    """Distance to and index of the nearest target for every query row.

    With no targets the distances are ``inf`` and indices ``-1``.
    """
    queries = np.asarray(queries, dtype=float)
    targets = np.asarray(targets, dtype=float)
    nq = len(queries)
    if len(targets) == 0 or nq == 0:
        return np.full(nq, np.inf), np.full(nq, -1, dtype=np.intp)
    if brute is None:
        brute = nq * len(targets) <= BRUTE_FORCE_LIMIT
    if brute:
        dist = np.empty(nq)
        idx = np.empty(nq, dtype=np.intp)
        step = max(1, _CHUNK // len(targets))
        for start in range(0, nq, step):
            block = manifold.pairwise_distances(queries[start : start + step], targets)
            j = np.argmin(block, axis=1)
            idx[start : start + step] = j
            dist[start : start + step] = block[np.arange(len(j)), j]
        return dist, idx
    _, idx = _tree(manifold, targets).query(queries)
    idx = np.asarray(idx, dtype=np.intp)
    return manifold.paired_distances(queries, targets[idx]), idx


def nearest_distance(manifold: Manifold, queries, targets, **kw) -> np.ndarray:
    return nearest(manifold, queries, targets, **kw)[0]


def pairs_within(manifold: Manifold, points, radius: float) -> np.ndarray:
    """All index pairs ``(i, j)``, ``i < j``, with geodesic distance <= radius."""
    points = np.asarray(points, dtype=float)
    n = len(points)
    if n < 2:
        return np.empty((0, 2), dtype=np.intp)
    if n * n <= BRUTE_FORCE_LIMIT:
        d = manifold.pairwise_distances(points, points)
        i, j = np.nonzero(np.triu(d <= radius, k=1))
        return np.column_stack([i, j])
    # slightly inflated search radius, then exact geodesic filtering
    chord = manifold.geodesic_to_chord(radius) * (1 + 1e-9) + 1e-12
    pairs = _tree(manifold, points).query_pairs(chord, output_type="ndarray")
    if len(pairs) == 0:
        return np.empty((0, 2), dtype=np.intp)
    keep = manifold.paired_distances(points[pairs[:, 0]], points[pairs[:, 1]]) <= radius
    return pairs[keep]


def any_within(manifold: Manifold, queries, targets, radius: float) -> np.ndarray:
    """Boolean per query: is some target within ``radius`` (closed ball)?"""
    return nearest_distance(manifold, queries, targets) <= radius
