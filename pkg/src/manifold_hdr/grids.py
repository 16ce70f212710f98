"""Quasi-uniform grids used to discretise continuous subsets of a manifold."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .manifolds import TWO_PI, DomainError, Manifold, _box
from .neighbors import nearest_distance

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))
MIN_RESOLUTION = 4


class ConfigurationError(ValueError):
    """Raised for inconsistent or incomplete run configuration."""


@dataclass(frozen=True)
class GridSpec:
    manifold: Manifold
    resolution: int
    bounds: tuple | None = None
    probe_seed: int = 0


@dataclass(eq=False)
class Grid:
    """Grid nodes on a manifold together with their estimated dispersion."""

    manifold: Manifold
    nodes: np.ndarray
    dispersion: float
    spec: GridSpec | None = None
    _dmat: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def cell_volume(self) -> float:
        """Quadrature weight of each node (equal-weight rule)."""
        if self.manifold.kind == "euclidean":
            lo, hi = _box(self.spec.bounds, self.manifold.dim)
            return float(np.prod(hi - lo)) / len(self.nodes)
        return self.manifold.volume / len(self.nodes)

    @property
    def link_radius(self) -> float:
        """Radius that links every node to its immediate grid neighbours.

        The probe-based dispersion slightly underestimates the covering radius,
        and on product grids the axis step equals twice the covering radius,
        so a 25% margin over 2 * dispersion is used.
        """
        return 2.5 * self.dispersion

    def distance_matrix(self) -> np.ndarray:
        """Full node-to-node distance matrix, cached; meant for small grids."""
        if self._dmat is None:
            self._dmat = self.manifold.pairwise_distances(self.nodes, self.nodes)
        return self._dmat

    def integrate(self, values) -> float:
        """Equal-weight quadrature of nodal values."""
        return float(np.sum(values) * self.cell_volume)


def fibonacci_sphere(n: int) -> np.ndarray:
    """Fibonacci lattice on S^2: heights at the midpoints of n equal z-slabs."""
    i = np.arange(n, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / n
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = np.mod(i * GOLDEN_ANGLE, TWO_PI)
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


def _axis_count(resolution: int, d: int) -> int:
    m = max(2, int(round(resolution ** (1.0 / d))))
    while m**d < resolution / 2:
        m += 1
    return m


def build_grid(spec: GridSpec) -> Grid:
    """Build the grid described by ``spec`` and estimate its dispersion.

    The dispersion is the largest nearest-node distance over ``10 * resolution``
    uniformly drawn probe points, a Monte Carlo lower estimate of the covering
    radius.
    """
    man = spec.manifold
    res = int(spec.resolution)
    if res < MIN_RESOLUTION:
        raise ConfigurationError(f"grid resolution must be >= {MIN_RESOLUTION}")
    if man.kind == "sphere":
        nodes = fibonacci_sphere(res)
    elif man.is_angular:
        m = _axis_count(res, man.dim)
        axis = TWO_PI * np.arange(m) / m
        mesh = np.meshgrid(*([axis] * man.dim), indexing="ij")
        nodes = np.column_stack([g.ravel() for g in mesh])
    else:
        if spec.bounds is None:
            raise ConfigurationError("euclidean grids need a bounding box")
        try:
            lo, hi = _box(spec.bounds, man.dim)
        except DomainError as exc:
            raise ConfigurationError(str(exc)) from exc
        m = _axis_count(res, man.dim)
        # cell centres, so equal weights give the midpoint rule on the box
        axes = [lo[k] + (np.arange(m) + 0.5) * (hi[k] - lo[k]) / m for k in range(man.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        nodes = np.column_stack([g.ravel() for g in mesh])

    rng = np.random.default_rng(spec.probe_seed)
    probes = man.uniform(10 * res, rng, bounds=spec.bounds)
    dispersion = float(np.max(nearest_distance(man, probes, nodes)))
    return Grid(man, nodes, dispersion, spec)


def grid_for(manifold: Manifold, resolution: int, bounds=None) -> Grid:
    return build_grid(GridSpec(manifold, resolution, None if bounds is None else tuple(map(tuple, bounds))))
