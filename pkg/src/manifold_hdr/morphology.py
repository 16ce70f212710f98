"""Minkowski morphology, set distances and related diagnostics.

Two set carriers are used. ``BallUnionSet`` is an exact finite union of closed
geodesic balls of one common radius. ``GridSet`` is a boolean mask over the
nodes of a ``Grid``; on it dilation, erosion and opening are computed with the
grid nodes taken as a finite metric space, so set identities that only use the
triangle inequality hold exactly, and continuous ones hold up to the grid
dispersion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import Grid
from .manifolds import DomainError, Manifold
from .neighbors import nearest_distance, pairs_within
from .unionfind import components_from_pairs

DENSE_LIMIT = 4096


@dataclass(eq=False)
class GridSet:
    grid: Grid
    mask: np.ndarray

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.shape != (len(self.grid),):
            raise DomainError("mask length must equal the grid node count")

    @classmethod
    def empty(cls, grid: Grid) -> "GridSet":
        return cls(grid, np.zeros(len(grid), dtype=bool))

    @classmethod
    def full(cls, grid: Grid) -> "GridSet":
        return cls(grid, np.ones(len(grid), dtype=bool))

    @property
    def manifold(self) -> Manifold:
        return self.grid.manifold

    @property
    def points(self) -> np.ndarray:
        return self.grid.nodes[self.mask]

    def __len__(self) -> int:
        return int(self.mask.sum())

    def __eq__(self, other) -> bool:
        return isinstance(other, GridSet) and self.grid is other.grid and np.array_equal(self.mask, other.mask)

    def __le__(self, other: "GridSet") -> bool:
        return bool(np.all(~self.mask | other.mask))

    def is_empty(self) -> bool:
        return not self.mask.any()

    def complement(self) -> "GridSet":
        return GridSet(self.grid, ~self.mask)

    def __or__(self, other):
        return GridSet(self.grid, self.mask | other.mask)

    def __and__(self, other):
        return GridSet(self.grid, self.mask & other.mask)

    def __xor__(self, other):
        return GridSet(self.grid, self.mask ^ other.mask)


@dataclass(eq=False)
class BallUnionSet:
    """Union of closed geodesic balls of common radius around ``centers``."""

    manifold: Manifold
    centers: np.ndarray
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError("ball radius must be > 0")
        self.centers = self.manifold.canonicalize(self.centers)

    def __len__(self) -> int:
        return len(self.centers)

    def is_empty(self) -> bool:
        return len(self.centers) == 0

    def distance_to_centers(self, x) -> np.ndarray:
        return nearest_distance(self.manifold, np.atleast_2d(x), self.centers)

    def contains(self, x) -> np.ndarray:
        return self.distance_to_centers(x) <= self.radius

    def discretize(self, grid: Grid) -> GridSet:
        return GridSet(grid, self.contains(grid.nodes))

    def to_dict(self) -> dict:
        return {"manifold": self.manifold.tag, "radius": self.radius, "centers": self.centers.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "BallUnionSet":
        man = Manifold.parse(d["manifold"])
        centers = np.asarray(d["centers"], dtype=float).reshape(-1, man.ambient_dim)
        return cls(man, centers, float(d["radius"]))


def _distance_to_mask(S: GridSet, mask: np.ndarray) -> np.ndarray:
    """Distance from every grid node to the nearest node selected by ``mask``."""
    grid = S.grid
    if not mask.any():
        return np.full(len(grid), np.inf)
    if len(grid) <= DENSE_LIMIT:
        return grid.distance_matrix()[:, mask].min(axis=1)
    return nearest_distance(grid.manifold, grid.nodes, grid.nodes[mask])


def dilate(S: GridSet, r: float) -> GridSet:
    """Nodes within distance ``r`` of some node of ``S``."""
    if not r > 0:
        raise DomainError("radius must be > 0")
    return GridSet(S.grid, _distance_to_mask(S, S.mask) <= r)


def erode(S: GridSet, r: float) -> GridSet:
    """Nodes whose closed ``r``-ball of grid nodes lies entirely in ``S``."""
    if not r > 0:
        raise DomainError("radius must be > 0")
    return GridSet(S.grid, ~(_distance_to_mask(S, ~S.mask) <= r))


def opening(S: GridSet, r: float) -> GridSet:
    """Erosion followed by dilation: the union of r-balls that fit inside S."""
    return dilate(erode(S, r), r)


def closing(S: GridSet, r: float) -> GridSet:
    return erode(dilate(S, r), r)


def _as_points(A, manifold: Manifold | None):
    if isinstance(A, GridSet):
        return A.points, A.manifold
    if isinstance(A, BallUnionSet):
        return A.centers, A.manifold
    return np.asarray(A, dtype=float), manifold


def _pair(A, B, manifold):
    a, ma = _as_points(A, manifold)
    b, mb = _as_points(B, manifold)
    man = ma or mb
    if man is None:
        raise DomainError("manifold required for raw point arrays")
    if ma is not None and mb is not None and ma != mb:
        raise DomainError("sets live on different manifolds")
    if len(a) == 0 or len(b) == 0:
        raise DomainError("set distances need non-empty sets")
    return np.atleast_2d(a), np.atleast_2d(b), man


def directed_hausdorff(A, B, manifold: Manifold | None = None) -> float:
    """sup over a in A of the distance from a to B."""
    a, b, man = _pair(A, B, manifold)
    return float(np.max(nearest_distance(man, a, b)))


def hausdorff_distance(A, B, manifold: Manifold | None = None) -> float:
    """Hausdorff distance between two finite point sets (or grid sets)."""
    a, b, man = _pair(A, B, manifold)
    return max(float(np.max(nearest_distance(man, a, b))), float(np.max(nearest_distance(man, b, a))))


def set_distance(A, B, manifold: Manifold | None = None) -> float:
    """inf over pairs of the geodesic distance."""
    a, b, man = _pair(A, B, manifold)
    return float(np.min(nearest_distance(man, a, b)))


def packing_number(manifold: Manifold, points, eps: float) -> int:
    """Size of a greedily built eps-separated subset of ``points``.

    A point is kept when it is farther than ``eps`` from every point kept so
    far. The result is a lower bound on the packing number D(eps, A).
    """
    if not eps > 0:
        raise DomainError("eps must be > 0")
    points = manifold.canonicalize(points)
    kept: list[np.ndarray] = []
    for p in points:
        if not kept or np.min(manifold.pairwise_distances(p[None, :], np.asarray(kept))[0]) > eps:
            kept.append(p)
    return len(kept)


def maximal_spacing(region: GridSet, sample) -> float:
    """Radius of the largest sample-free ball inside ``region``, on the grid.

    Each region node is scored by its distance to the nearest sample point or
    to the nearest node outside the region, whichever is smaller; the score
    is capped at the manifold diameter.
    """
    if region.is_empty():
        raise DomainError("maximal spacing needs a non-empty region")
    man = region.manifold
    pts = region.points
    sample = np.asarray(sample, dtype=float).reshape(-1, man.ambient_dim)
    to_sample = nearest_distance(man, pts, sample)
    outside = region.grid.nodes[~region.mask]
    to_outside = nearest_distance(man, pts, outside)
    return float(min(np.max(np.minimum(to_sample, to_outside)), man.diameter))


def grid_components(S: GridSet, link_radius: float) -> tuple[int, np.ndarray]:
    """Connected components of the member nodes linked within ``link_radius``.

    Returns the component count and a label per grid node (-1 off the set).
    """
    idx = np.flatnonzero(S.mask)
    labels = np.full(len(S.grid), -1, dtype=int)
    if len(idx) == 0:
        return 0, labels
    count, lab = components_from_pairs(len(idx), pairs_within(S.manifold, S.grid.nodes[idx], link_radius))
    labels[idx] = lab
    return count, labels


def boundary_mask(S: GridSet, link_radius: float) -> np.ndarray:
    """Member nodes with a non-member node within ``link_radius``."""
    out = np.zeros(len(S.grid), dtype=bool)
    if S.is_empty() or not (~S.mask).any():
        return out
    d = nearest_distance(S.manifold, S.points, S.grid.nodes[~S.mask])
    out[np.flatnonzero(S.mask)] = d <= link_radius
    return out
