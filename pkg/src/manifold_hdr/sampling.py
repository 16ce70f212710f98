"""Random sampling on the supported manifolds.

Every sampler takes ``seed`` as either an integer (or None) or an existing
``numpy.random.Generator``; passing a generator lets callers chain draws on a
single stream.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .manifolds import TWO_PI, DomainError, Manifold

def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def tangent_basis(mu: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two orthonormal vectors spanning the tangent plane of S^2 at ``mu``."""
    mu = np.asarray(mu, dtype=float)
    helper = np.eye(3)[int(np.argmin(np.abs(mu)))]
    e1 = np.cross(mu, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(mu, e1)
    return e1, e2


def _wood_cosines(kappa: float, n: int, rng: np.random.Generator) -> np.ndarray:
    # Wood (1994) rejection scheme for <X, mu>, specialised to S^2 (p = 3)
    b = 1.0 / (kappa + math.sqrt(kappa * kappa + 1.0))
    x0 = (1.0 - b) / (1.0 + b)
    c = kappa * x0 + 2.0 * math.log(1.0 - x0 * x0)
    out = np.empty(0)
    while len(out) < n:
        m = max(16, int(1.2 * (n - len(out))) + 8)
        z = rng.uniform(size=m)
        u = rng.uniform(size=m)
        w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z)
        with np.errstate(divide="ignore"):
            ok = kappa * w + 2.0 * np.log1p(-x0 * w) - c >= np.log(u)
        out = np.concatenate([out, w[ok]])
    return np.clip(out[:n], -1.0, 1.0)


def sample_vmf(mu, kappa: float, n: int, seed=None) -> np.ndarray:
    """Draw ``n`` unit vectors from the von Mises-Fisher law M_2(mu, kappa)."""
    if kappa < 0:
        raise DomainError("kappa must be >= 0")
    mu = Manifold.sphere().canonicalize(mu)[0]
    rng = as_rng(seed)
    if n == 0:
        return np.empty((0, 3))
    w = _wood_cosines(float(kappa), n, rng)
    theta = rng.uniform(0.0, TWO_PI, size=n)
    e1, e2 = tangent_basis(mu)
    s = np.sqrt(np.clip(1.0 - w * w, 0.0, None))
    x = w[:, None] * mu + s[:, None] * (np.cos(theta)[:, None] * e1 + np.sin(theta)[:, None] * e2)
    return x / np.linalg.norm(x, axis=1)[:, None]


def sample_von_mises(mu: float, kappa: float, n: int, seed=None) -> np.ndarray:
    """Angles in [0, 2*pi) from the von Mises law by Best-Fisher rejection."""
    if kappa < 0:
        raise DomainError("kappa must be >= 0")
    rng = as_rng(seed)
    if n == 0:
        return np.empty(0)
    if kappa < 1e-12:
        return rng.uniform(0.0, TWO_PI, size=n)
    tau = 1.0 + math.sqrt(1.0 + 4.0 * kappa * kappa)
    rho = (tau - math.sqrt(2.0 * tau)) / (2.0 * kappa)
    r = (1.0 + rho * rho) / (2.0 * rho)
    out = np.empty(0)
    while len(out) < n:
        m = max(16, int(1.5 * (n - len(out))) + 8)
        u1, u2, u3 = rng.uniform(size=(3, m))
        z = np.cos(np.pi * u1)
        f = (1.0 + r * z) / (r + z)
        c = kappa * (r - f)
        with np.errstate(divide="ignore", invalid="ignore"):
            ok = (c * (2.0 - c) - u2 > 0) | (np.log(c / u2) + 1.0 - c >= 0)
        theta = mu + np.sign(u3[ok] - 0.5) * np.arccos(np.clip(f[ok], -1.0, 1.0))
        out = np.concatenate([out, theta])
    return np.mod(out[:n], TWO_PI)


def sample_von_mises_torus(mus: Sequence[float], kappas: Sequence[float], n: int, seed=None) -> np.ndarray:
    """Independent von Mises coordinates on T^d; returns an ``(n, d)`` array."""
    mus = np.atleast_1d(np.asarray(mus, dtype=float))
    kappas = np.atleast_1d(np.asarray(kappas, dtype=float))
    if mus.shape != kappas.shape:
        raise DomainError("mus and kappas must have the same length")
    if np.any(kappas < 0):
        raise DomainError("kappas must be >= 0")
    rng = as_rng(seed)
    cols = [sample_von_mises(m, k, n, rng) for m, k in zip(mus, kappas)]
    return np.column_stack(cols) if n else np.empty((0, len(mus)))


def sample_mixture(components: Sequence[tuple[float, Callable]], n: int, seed=None, *, return_labels: bool = False):
    """Sample a finite mixture.

    ``components`` is a sequence of ``(weight, sampler)`` pairs where
    ``sampler(count, rng)`` returns ``count`` points. A component is chosen for
    each draw by a categorical draw on the weights; a single-component mixture
    hands the generator straight to its sampler.
    """
    weights = np.asarray([w for w, _ in components], dtype=float)
    if len(weights) == 0:
        raise DomainError("mixture needs at least one component")
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
        raise DomainError("mixture weights must be >= 0 and sum to 1")
    rng = as_rng(seed)
    samplers = [s for _, s in components]
    if len(samplers) == 1:
        pts = samplers[0](n, rng)
        return (pts, np.zeros(n, dtype=int)) if return_labels else pts
    labels = rng.choice(len(weights), size=n, p=weights / weights.sum())
    out = None
    for k, sampler in enumerate(samplers):
        idx = np.flatnonzero(labels == k)
        pts = np.asarray(sampler(len(idx), rng), dtype=float)
        if out is None:
            out = np.empty((n, pts.shape[1]))
        out[idx] = pts
    return (out, labels) if return_labels else out
