"""Supported manifolds and their geodesic metrics.

Point sets are stored as ``(n, k)`` float arrays whose row layout depends on
the manifold:

* ``sphere``: embedded unit vectors in R^3 (k = 3)
* ``circle`` / ``torus``: angles in radians, canonical range [0, 2*pi) (k = d)
* ``euclidean``: plain coordinates (k = d)
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * np.pi
SPHERE_NORM_TOL = 1e-9

KINDS = ("circle", "sphere", "torus", "euclidean")


class DomainError(ValueError):
    """Raised when inputs fall outside the mathematical domain of an operation."""


@dataclass(frozen=True)
class Manifold:
    """One of the supported manifolds: S^1, S^2, the flat torus T^d or R^d."""

    kind: str
    dim: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown manifold kind {self.kind!r}")
        if self.dim < 1:
            raise DomainError("manifold dimension must be >= 1")
        if self.kind == "circle" and self.dim != 1:
            raise DomainError("circle has dimension 1")
        if self.kind == "sphere" and self.dim != 2:
            raise DomainError("only the 2-sphere is supported")

    @classmethod
    def circle(cls) -> "Manifold":
        return cls("circle", 1)

    @classmethod
    def sphere(cls) -> "Manifold":
        return cls("sphere", 2)

    @classmethod
    def torus(cls, d: int = 2) -> "Manifold":
        return cls("torus", d)

    @classmethod
    def euclidean(cls, d: int = 2) -> "Manifold":
        return cls("euclidean", d)

    @classmethod
    def parse(cls, tag: str, dim: int | None = None) -> "Manifold":
        """Build a manifold from a tag such as ``sphere``, ``torus`` or ``T2``."""
        tag = tag.strip().lower()
        aliases = {"s1": "circle", "s2": "sphere", "sphere2": "sphere"}
        tag = aliases.get(tag, tag)
        m = re.fullmatch(r"(t|r|torus|euclidean)(\d+)", tag)
        if m:
            return cls("torus" if m.group(1).startswith("t") else "euclidean", int(m.group(2)))
        if tag == "circle":
            return cls.circle()
        if tag == "sphere":
            return cls.sphere()
        if tag in ("torus", "euclidean"):
            return cls(tag, 2 if dim is None else int(dim))
        raise DomainError(f"unknown manifold tag {tag!r}")

    @property
    def tag(self) -> str:
        if self.kind in ("torus", "euclidean"):
            return f"{self.kind}{self.dim}"
        return self.kind

    @property
    def ambient_dim(self) -> int:
        """Number of stored coordinates per point."""
        return 3 if self.kind == "sphere" else self.dim

    @property
    def is_angular(self) -> bool:
        return self.kind in ("circle", "torus")

    @property
    def diameter(self) -> float:
        """Largest possible geodesic distance (inf for R^d)."""
        if self.kind == "sphere":
            return math.pi
        if self.is_angular:
            return math.pi * math.sqrt(self.dim)
        return math.inf

    @property
    def volume(self) -> float:
        if self.kind == "sphere":
            return 4.0 * math.pi
        if self.is_angular:
            return TWO_PI**self.dim
        return math.inf

    # -- points -----------------------------------------------------------

    def canonicalize(self, coords) -> np.ndarray:
        """Return a validated ``(n, k)`` array in canonical form.

        Angles are wrapped into [0, 2*pi); sphere rows must already be unit
        vectors up to ``SPHERE_NORM_TOL`` and are renormalised.
        """
        x = np.asarray(coords, dtype=float)
        if x.ndim == 1:
            x = x.reshape(1, -1) if x.size else x.reshape(0, self.ambient_dim)
        if x.ndim != 2 or x.shape[1] != self.ambient_dim:
            raise DomainError(
                f"{self.tag} points need {self.ambient_dim} coordinates, got shape {x.shape}"
            )
        if not np.all(np.isfinite(x)):
            raise DomainError("non-finite coordinates")
        if self.kind == "sphere":
            norms = np.linalg.norm(x, axis=1)
            if np.any(np.abs(norms - 1.0) > SPHERE_NORM_TOL):
                raise DomainError("sphere points must be unit vectors")
            # rows already unit to rounding are left untouched so that
            # canonicalisation is idempotent bit for bit
            drift = np.abs(norms - 1.0) > 4 * np.finfo(float).eps
            if np.any(drift):
                x = x.copy()
                x[drift] /= norms[drift, None]
        elif self.is_angular:
            x = np.mod(x, TWO_PI)
            # mod can return exactly 2*pi for tiny negative inputs
            x[x >= TWO_PI] = 0.0
        return x

    def point(self, coords) -> "ManifoldPoint":
        return ManifoldPoint(self, self.canonicalize(coords)[0])

    # -- metric -----------------------------------------------------------

    def pairwise_distances(self, a, b) -> np.ndarray:
        """Geodesic distance matrix between the rows of ``a`` and ``b``."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return self._metric(a[:, None, :], b[None, :, :])

    def paired_distances(self, a, b) -> np.ndarray:
        """Row-by-row geodesic distances; bitwise consistent with ``pairwise_distances``."""
        return self._metric(np.asarray(a, dtype=float), np.asarray(b, dtype=float))

    def distance(self, x, y) -> float:
        return float(self.pairwise_distances(np.atleast_2d(x), np.atleast_2d(y))[0, 0])

    def _metric(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.kind == "sphere":
            # atan2(|a x b|, a . b) equals arccos(a . b) on unit vectors but stays
            # accurate near 0 and pi, so d(x, x) is exactly 0. Explicit sums keep
            # the result independent of BLAS reduction order.
            a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
            b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
            dot = a0 * b0 + a1 * b1 + a2 * b2
            c0 = a1 * b2 - a2 * b1
            c1 = a2 * b0 - a0 * b2
            c2 = a0 * b1 - a1 * b0
            return np.arctan2(np.sqrt(c0 * c0 + c1 * c1 + c2 * c2), dot)
        diff = a - b
        if self.is_angular:
            diff = _wrap_angle(diff)
        return np.sqrt(np.sum(diff * diff, axis=-1))

    def chord_to_geodesic(self, chord: np.ndarray) -> np.ndarray:
        """Map embedded distances (as used by spatial indexes) to geodesic ones."""
        if self.kind == "sphere":
            return 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))
        return chord

    def geodesic_to_chord(self, r: float) -> float:
        if self.kind == "sphere":
            return 2.0 * math.sin(min(r, math.pi) / 2.0)
        return r

    # -- geometry helpers ---------------------------------------------------

    def uniform(self, n: int, rng=None, bounds=None) -> np.ndarray:
        """Draw ``n`` points from the normalised volume measure.

        ``rng`` may be a Generator or anything ``np.random.default_rng`` accepts.
        """
        rng = np.random.default_rng(rng)
        if self.kind == "sphere":
            z = rng.standard_normal((n, 3))
            return z / np.linalg.norm(z, axis=1)[:, None]
        if self.is_angular:
            return rng.uniform(0.0, TWO_PI, size=(n, self.dim))
        if bounds is None:
            raise DomainError("euclidean sampling needs a bounding box")
        lo, hi = _box(bounds, self.dim)
        return rng.uniform(lo, hi, size=(n, self.dim))


@dataclass(frozen=True)
class ManifoldPoint:
    manifold: Manifold
    coords: np.ndarray

    def distance(self, other: "ManifoldPoint") -> float:
        return geodesic_distance(self, other)


def geodesic_distance(x: ManifoldPoint, y: ManifoldPoint) -> float:
    """Geodesic distance between two points of the same manifold."""
    if x.manifold != y.manifold:
        raise DomainError(f"manifold mismatch: {x.manifold.tag} vs {y.manifold.tag}")
    return x.manifold.distance(x.coords, y.coords)


def _wrap_angle(d: np.ndarray) -> np.ndarray:
    """Wrap angular differences into [-pi, pi]."""
    return np.mod(d + np.pi, TWO_PI) - np.pi


def _box(bounds, dim: int) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(bounds, dtype=float)
    if arr.shape != (dim, 2):
        raise DomainError(f"bounding box must have shape ({dim}, 2)")
    lo, hi = arr[:, 0], arr[:, 1]
    if np.any(hi <= lo):
        raise DomainError("bounding box upper limits must exceed lower limits")
    return lo, hi


def spherical_to_unit(lon: Sequence[float] | np.ndarray, lat) -> np.ndarray:
    """Unit vectors from longitude/latitude in radians."""
    lon = np.asarray(lon, dtype=float)
    lat = np.asarray(lat, dtype=float)
    return np.stack(
        [np.cos(lon) * np.cos(lat), np.sin(lon) * np.cos(lat), np.sin(lat)], axis=-1
    )


def unit_to_spherical(v) -> tuple[np.ndarray, np.ndarray]:
    """Longitude in [-pi, pi] and latitude in [-pi/2, pi/2] of unit vectors."""
    v = np.atleast_2d(np.asarray(v, dtype=float))
    lon = np.arctan2(v[:, 1], v[:, 0])
    lat = np.arcsin(np.clip(v[:, 2], -1.0, 1.0))
    return lon, lat
