"""Highest density region estimation by inflating filtered high-density points.

Given a density estimate f_n, a level lambda and a radius r_n, the sample is
split into high points (f_n >= lambda) and low points (f_n < lambda). Every
high point whose closed r_n-ball contains no low point becomes the centre of a
closed r_n-ball; the union of those balls estimates {f >= lambda}.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .grids import Grid
from .manifolds import DomainError, Manifold
from .morphology import BallUnionSet, GridSet
from .neighbors import nearest_distance, pairs_within
from .sampling import as_rng
from .unionfind import components_from_pairs


class EmptyEstimateWarning(UserWarning):
    """The estimate selected no centres."""


@dataclass(eq=False)
class LabeledSample:
    manifold: Manifold
    points: np.ndarray
    fn_values: np.ndarray
    lam: float

    @property
    def plus(self) -> np.ndarray:
        return np.flatnonzero(self.fn_values >= self.lam)

    @property
    def minus(self) -> np.ndarray:
        return np.flatnonzero(self.fn_values < self.lam)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(eq=False)
class HdrEstimate:
    set: BallUnionSet
    lam: float
    radius: float
    selected: np.ndarray
    gamma: float | None = None
    labeled: LabeledSample | None = field(default=None, repr=False)

    @property
    def manifold(self) -> Manifold:
        return self.set.manifold

    @property
    def centers(self) -> np.ndarray:
        return self.set.centers

    def is_empty(self) -> bool:
        return self.set.is_empty()

    def contains(self, x) -> np.ndarray:
        return hdr_contains(self, x)

    def to_dict(self) -> dict:
        count, labels = connected_components(self)
        out = {
            "manifold": self.manifold.tag,
            "lambda": self.lam,
            "radius": self.radius,
            "centers": self.centers.tolist(),
            "selected": [int(i) for i in self.selected],
            "n_components": count,
            "component_labels": labels.tolist(),
        }
        if self.gamma is not None:
            out["gamma"] = self.gamma
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "HdrEstimate":
        man = Manifold.parse(d["manifold"])
        centers = np.asarray(d["centers"], dtype=float).reshape(-1, man.ambient_dim)
        bus = BallUnionSet(man, centers, float(d["radius"]))
        selected = np.asarray(d.get("selected", range(len(centers))), dtype=int)
        return cls(bus, float(d["lambda"]), float(d["radius"]), selected, d.get("gamma"))


def split_sample(manifold: Manifold, points, density, lam: float) -> LabeledSample:
    """Evaluate ``density`` on the sample and split it at ``lam`` (ties go high)."""
    points = manifold.canonicalize(points)
    if len(points) == 0:
        raise DomainError("cannot split an empty sample")
    values = np.asarray(density.pdf(points), dtype=float).reshape(len(points))
    return LabeledSample(manifold, points, values, float(lam))


def estimate_hdr(labeled: LabeledSample, r_n: float) -> HdrEstimate:
    """Union of closed r_n-balls around high points with no low point within r_n."""
    if not r_n > 0:
        raise DomainError("r_n must be > 0")
    man = labeled.manifold
    plus = labeled.plus
    minus = labeled.minus
    gap = nearest_distance(man, labeled.points[plus], labeled.points[minus])
    selected = plus[gap > r_n]
    return HdrEstimate(BallUnionSet(man, labeled.points[selected], r_n), labeled.lam, float(r_n), selected, labeled=labeled)


def hdr_contains(est: HdrEstimate, x) -> np.ndarray:
    """Membership of the rows of ``x`` in the estimated region."""
    x = est.manifold.canonicalize(x)
    if est.is_empty():
        return np.zeros(len(x), dtype=bool)
    return est.set.contains(x)


def estimate_level(fn_values, gamma: float) -> float:
    """Empirical level: sup{l : (1/n) #{i : f_n(X_i) >= l} >= 1 - gamma}.

    Equal to the j-th smallest value with j = min(n, floor(n * gamma) + 1);
    the floor is taken in exact rational arithmetic so the result matches the
    sup definition bit for bit.
    """
    values = np.sort(np.asarray(fn_values, dtype=float).ravel())
    n = len(values)
    if n == 0:
        raise DomainError("level estimation needs at least one value")
    if not 0.0 < gamma < 1.0:
        raise DomainError("gamma must lie in (0, 1)")
    j = min(n, math.floor(Fraction(gamma) * n) + 1)
    return float(values[j - 1])


def estimate_hdr_by_probability(manifold: Manifold, points, density, gamma: float, r_n: float) -> HdrEstimate:
    """Estimate the region of probability content 1 - gamma.

    The level is the empirical gamma-quantile of the density values at the
    sample; the region is then built at that level.
    """
    points = manifold.canonicalize(points)
    values = np.asarray(density.pdf(points), dtype=float).reshape(len(points))
    lam = estimate_level(values, gamma)
    labeled = LabeledSample(manifold, points, values, lam)
    est = estimate_hdr(labeled, r_n)
    est.gamma = float(gamma)
    if est.is_empty():
        warnings.warn(
            f"no centre survives at gamma={gamma}, r_n={r_n}; returning the empty estimate",
            EmptyEstimateWarning,
            stacklevel=2,
        )
    return est


def plugin_hdr(density, lam: float, grid: Grid) -> GridSet:
    """Plug-in region {x : f_n(x) >= lam} evaluated on grid nodes."""
    return GridSet(grid, np.asarray(density.pdf(grid.nodes)) >= lam)


def true_level(density, gamma: float, oracle_n: int = 1_000_000, seed=None) -> float:
    """Monte Carlo value of the level whose region carries probability 1 - gamma.

    Uses the same order-statistic convention as :func:`estimate_level` on the
    true density values of ``oracle_n`` draws; the standard error is of order
    ``oracle_n ** -0.5``.
    """
    rng = as_rng(seed)
    values = np.asarray(density.pdf(density.sample(oracle_n, rng)), dtype=float)
    return estimate_level(values, gamma)


def connected_components(est: HdrEstimate) -> tuple[int, np.ndarray]:
    """Components of the ball union: centres linked when their balls meet (d <= 2r)."""
    if est.is_empty():
        return 0, np.empty(0, dtype=int)
    pairs = pairs_within(est.manifold, est.centers, 2.0 * est.radius)
    return components_from_pairs(len(est.centers), pairs)


def survival_sup_distance(sample_values, reference_values) -> float:
    """sup over l of |P_ref[f >= l] - P_sample[f >= l]| for two value samples."""
    a = np.sort(np.asarray(sample_values, dtype=float))
    b = np.sort(np.asarray(reference_values, dtype=float))
    knots = np.concatenate([a, b])

    def surv(sorted_vals, t, side):
        return 1.0 - np.searchsorted(sorted_vals, t, side=side) / len(sorted_vals)

    # survival at l (>= l) and just above l (> l)
    at = np.abs(surv(a, knots, "left") - surv(b, knots, "left"))
    above = np.abs(surv(a, knots, "right") - surv(b, knots, "right"))
    return float(max(at.max(), above.max()))
