"""Densities on the supported manifolds and kernel density estimation.

Analytic models (von Mises-Fisher on S^2, product von Mises on T^d, isotropic
Gaussians on R^d and finite mixtures of those) share a small interface:
``pdf(x)``, ``sample(n, seed)``, ``manifold`` and ``to_dict()``.
``KernelDensity`` provides the kernel estimate with the same surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate
from scipy.special import i0e, logsumexp

from .manifolds import TWO_PI, DomainError, Manifold
from .sampling import as_rng, sample_mixture, sample_vmf, sample_von_mises_torus

NORMALIZER_RTOL = 1e-6
DEFAULT_KAPPA_GRID = tuple(np.logspace(0.0, 10.0, 40, base=2.0))
KERNELS = ("vmf", "von_mises", "gaussian")

_CHUNK = 2_000_000


class NormalizerMismatch(RuntimeError):
    """Closed-form normaliser disagrees with its quadrature cross-check."""


class SelectionError(RuntimeError):
    """Cross-validation could not pick a smoothing parameter."""


# -- normalising constants ------------------------------------------------


@lru_cache(maxsize=4096)
def vmf_log_normalizer(kappa: float) -> float:
    """log C(kappa) with C(kappa) * exp(kappa <x, mu>) a density on S^2.

    The closed form kappa / (4 pi sinh kappa) is cross-checked against adaptive
    quadrature of the zonal integral before being cached.
    """
    kappa = float(kappa)
    if kappa < 0:
        raise DomainError("kappa must be >= 0")
    if kappa == 0.0:
        return -math.log(4.0 * math.pi)
    # integral of exp(kappa (t - 1)) over S^2 is 2 pi (1 - e^{-2 kappa}) / kappa
    closed = TWO_PI * -math.expm1(-2.0 * kappa) / kappa
    knee = max(-1.0, 1.0 - 30.0 / kappa)
    pts = [knee] if -1.0 < knee < 1.0 else None
    quad, _ = integrate.quad(
        lambda t: math.exp(kappa * (t - 1.0)), -1.0, 1.0, points=pts, epsabs=0.0, epsrel=1e-12, limit=200
    )
    quad *= TWO_PI
    if abs(quad - closed) > NORMALIZER_RTOL * closed:
        raise NormalizerMismatch(f"vMF normaliser mismatch at kappa={kappa}: {closed} vs {quad}")
    return -math.log(closed) - kappa


@lru_cache(maxsize=4096)
def log_bessel_i0(kappa: float) -> float:
    """log I_0(kappa), checked against trapezoidal quadrature of its integral form."""
    kappa = float(kappa)
    if kappa < 0:
        raise DomainError("kappa must be >= 0")
    closed = float(i0e(kappa))
    m = 2048 + int(64 * math.sqrt(kappa))
    theta = np.linspace(0.0, math.pi, m + 1)
    vals = np.exp(kappa * (np.cos(theta) - 1.0))
    quad = float(np.trapezoid(vals, theta)) / math.pi
    if abs(quad - closed) > NORMALIZER_RTOL * closed:
        raise NormalizerMismatch(f"I0 mismatch at kappa={kappa}: {closed} vs {quad}")
    return math.log(closed) + kappa


# -- analytic pdfs ----------------------------------------------------------


def vmf_pdf(x, mu, kappa: float) -> np.ndarray | float:
    """von Mises-Fisher density on S^2 evaluated at the rows of ``x``."""
    if kappa < 0:
        raise DomainError("kappa must be >= 0")
    x = np.asarray(x, dtype=float)
    mu = np.asarray(mu, dtype=float)
    t = x @ mu
    out = np.exp(vmf_log_normalizer(kappa) + kappa * t)
    return float(out) if out.ndim == 0 else out


def von_mises_torus_pdf(x, mus, kappas) -> np.ndarray | float:
    """Product of independent von Mises densities on T^d."""
    mus = np.atleast_1d(np.asarray(mus, dtype=float))
    kappas = np.atleast_1d(np.asarray(kappas, dtype=float))
    if np.any(kappas < 0):
        raise DomainError("kappas must be >= 0")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[1] != len(mus) or len(mus) != len(kappas):
        raise DomainError("dimension mismatch between x, mus and kappas")
    logc = sum(math.log(TWO_PI) + log_bessel_i0(k) for k in kappas)
    out = np.exp(np.cos(x - mus) @ kappas - logc)
    return float(out[0]) if scalar else out


def mixture_pdf(x, components: Sequence[tuple[float, object]]):
    """Weighted sum of component densities; components are ``(weight, model)``."""
    total = 0.0
    for w, comp in components:
        total = total + w * np.asarray(comp.pdf(x))
    return total


# -- density models -------------------------------------------------------


@dataclass(frozen=True)
class VonMisesFisher:
    mu: tuple
    kappa: float

    manifold = Manifold.sphere()

    def __post_init__(self):
        if self.kappa < 0:
            raise DomainError("kappa must be >= 0")
        mu = Manifold.sphere().canonicalize(self.mu)[0]
        object.__setattr__(self, "mu", tuple(float(v) for v in mu))

    def pdf(self, x):
        return vmf_pdf(x, self.mu, self.kappa)

    def sample(self, n: int, seed=None) -> np.ndarray:
        return sample_vmf(self.mu, self.kappa, n, seed)

    @property
    def sup(self) -> float:
        return float(np.exp(vmf_log_normalizer(self.kappa) + self.kappa))

    def to_dict(self) -> dict:
        return {"type": "vmf", "mu": list(self.mu), "kappa": self.kappa}


@dataclass(frozen=True)
class TorusVonMises:
    mus: tuple
    kappas: tuple

    def __post_init__(self):
        mus = tuple(float(m) for m in np.atleast_1d(self.mus))
        kappas = tuple(float(k) for k in np.atleast_1d(self.kappas))
        if len(mus) != len(kappas):
            raise DomainError("mus and kappas must have the same length")
        if any(k < 0 for k in kappas):
            raise DomainError("kappas must be >= 0")
        object.__setattr__(self, "mus", mus)
        object.__setattr__(self, "kappas", kappas)

    @property
    def manifold(self) -> Manifold:
        return Manifold.circle() if len(self.mus) == 1 else Manifold.torus(len(self.mus))

    def pdf(self, x):
        return von_mises_torus_pdf(x, self.mus, self.kappas)

    def sample(self, n: int, seed=None) -> np.ndarray:
        return sample_von_mises_torus(self.mus, self.kappas, n, seed)

    @property
    def sup(self) -> float:
        return float(self.pdf(np.asarray(self.mus)))

    def to_dict(self) -> dict:
        return {"type": "torus_von_mises", "mus": list(self.mus), "kappas": list(self.kappas)}


@dataclass(frozen=True)
class IsotropicGaussian:
    mean: tuple
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise DomainError("sigma must be > 0")
        object.__setattr__(self, "mean", tuple(float(m) for m in np.atleast_1d(self.mean)))

    @property
    def manifold(self) -> Manifold:
        return Manifold.euclidean(len(self.mean))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        d = len(self.mean)
        sq = np.sum((np.atleast_2d(x) - self.mean) ** 2, axis=1)
        out = np.exp(-0.5 * sq / self.sigma**2) / (TWO_PI ** (d / 2) * self.sigma**d)
        return float(out[0]) if x.ndim == 1 else out

    def sample(self, n: int, seed=None) -> np.ndarray:
        rng = as_rng(seed)
        return np.asarray(self.mean) + self.sigma * rng.standard_normal((n, len(self.mean)))

    @property
    def sup(self) -> float:
        return float(self.pdf(np.asarray(self.mean)))

    def to_dict(self) -> dict:
        return {"type": "gaussian", "mean": list(self.mean), "sigma": self.sigma}


@dataclass(frozen=True)
class Mixture:
    weights: tuple
    components: tuple

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        if len(w) != len(self.components) or not w:
            raise DomainError("one weight per component required")
        if any(v < 0 for v in w) or abs(sum(w) - 1.0) > 1e-9:
            raise DomainError("mixture weights must be >= 0 and sum to 1")
        mans = {c.manifold for c in self.components}
        if len(mans) != 1:
            raise DomainError("mixture components live on different manifolds")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def manifold(self) -> Manifold:
        return self.components[0].manifold

    def pdf(self, x):
        return mixture_pdf(x, list(zip(self.weights, self.components)))

    def sample(self, n: int, seed=None, *, return_labels: bool = False):
        parts = [(w, c.sample) for w, c in zip(self.weights, self.components)]
        return sample_mixture(parts, n, seed, return_labels=return_labels)

    def to_dict(self) -> dict:
        return {
            "type": "mixture",
            "weights": list(self.weights),
            "components": [c.to_dict() for c in self.components],
        }


def bimodal_vmf_mixture(kappa: float = 10.0) -> Mixture:
    """Equal-weight mixture of two vMF laws with modes about 1.12 rad apart.

    mu1 = (cos(-pi/6), sin(-pi/6), 0),
    mu2 = (cos(pi/6) cos(pi/6), cos(pi/6) sin(pi/6), sin(pi/6)).
    """
    a = math.pi / 6
    mu1 = (math.cos(-a), math.sin(-a), 0.0)
    mu2 = (math.cos(a) * math.cos(a), math.cos(a) * math.sin(a), math.sin(a))
    return Mixture((0.5, 0.5), (VonMisesFisher(mu1, kappa), VonMisesFisher(mu2, kappa)))


# -- kernel density estimation ----------------------------------------------


@dataclass(frozen=True)
class KernelConfig:
    """Kernel family and smoothing parameter.

    ``param`` is the concentration kappa for ``vmf`` / ``von_mises`` kernels and
    the bandwidth h for the ``gaussian`` kernel.
    """

    kernel: str
    param: float

    def __post_init__(self):
        if self.kernel not in KERNELS:
            raise DomainError(f"unknown kernel {self.kernel!r}")
        if not self.param > 0:
            raise DomainError("kernel concentration / bandwidth must be > 0")

    def to_dict(self) -> dict:
        key = "bandwidth" if self.kernel == "gaussian" else "concentration"
        return {"kernel": self.kernel, key: self.param}


def kernel_for(manifold: Manifold) -> str:
    if manifold.kind == "sphere":
        return "vmf"
    if manifold.is_angular:
        return "von_mises"
    return "gaussian"


def _check_kernel(manifold: Manifold, kernel: str):
    if kernel_for(manifold) != kernel:
        raise DomainError(f"kernel {kernel!r} does not live on {manifold.tag}")


def _similarity(manifold: Manifold, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Kernel 'similarity' s(x, y); the log-kernel is affine in s."""
    if manifold.kind == "sphere":
        return x @ y.T
    if manifold.is_angular:
        return np.cos(x[:, None, :] - y[None, :, :]).sum(axis=-1)
    sq = (x * x).sum(1)[:, None] + (y * y).sum(1)[None, :] - 2.0 * x @ y.T
    return -0.5 * np.maximum(sq, 0.0)


def _log_kernel_affine(manifold: Manifold, kernel: str, param: float) -> tuple[float, float]:
    """(offset, scale) with log K(x, y) = offset + scale * s(x, y)."""
    d = manifold.dim
    if kernel == "vmf":
        return vmf_log_normalizer(param), param
    if kernel == "von_mises":
        return -d * (math.log(TWO_PI) + log_bessel_i0(param)), param
    return -0.5 * d * math.log(TWO_PI) - d * math.log(param), 1.0 / param**2


class KernelDensity:
    """Kernel density estimate f_n(x) = (1/n) sum_i K(x, X_i)."""

    def __init__(self, manifold: Manifold, sample, config: KernelConfig):
        sample = manifold.canonicalize(sample)
        if len(sample) == 0:
            raise DomainError("kernel density estimate needs a non-empty sample")
        _check_kernel(manifold, config.kernel)
        self.manifold = manifold
        self.sample = sample
        self.config = config

    def __repr__(self):
        return f"KernelDensity({self.manifold.tag}, n={len(self.sample)}, {self.config})"

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 1
        x = np.atleast_2d(x)
        offset, scale = _log_kernel_affine(self.manifold, self.config.kernel, self.config.param)
        out = np.empty(len(x))
        step = max(1, _CHUNK // len(self.sample))
        for start in range(0, len(x), step):
            s = _similarity(self.manifold, x[start : start + step], self.sample)
            out[start : start + step] = np.exp(offset + scale * s).mean(axis=1)
        return float(out[0]) if scalar else out

    def to_dict(self) -> dict:
        return {"type": "kde", "manifold": self.manifold.tag, **self.config.to_dict(), "n": len(self.sample)}


def kde_evaluate(manifold: Manifold, sample, config: KernelConfig, x):
    return KernelDensity(manifold, sample, config).pdf(x)


def loo_log_likelihoods(manifold: Manifold, sample, kernel: str, params: Sequence[float]) -> np.ndarray:
    """Leave-one-out log-likelihood sum_i log f_{n,-i}(X_i) for each parameter."""
    sample = manifold.canonicalize(sample)
    _check_kernel(manifold, kernel)
    n = len(sample)
    if n < 2:
        raise SelectionError("cross-validation needs at least two points")
    affine = [_log_kernel_affine(manifold, kernel, float(p)) for p in params]
    out = np.zeros(len(params))
    step = max(1, _CHUNK // n)
    for start in range(0, n, step):
        rows = np.arange(start, min(start + step, n))
        s = _similarity(manifold, sample[rows], sample)
        s[np.arange(len(rows)), rows] = -np.inf
        smax = s.max(axis=1)
        resid = s - smax[:, None]
        for k, (offset, scale) in enumerate(affine):
            lse = np.log(np.exp(scale * resid).sum(axis=1))
            out[k] += np.sum(offset + scale * smax + lse)
    return out - n * math.log(n - 1)


def default_parameter_grid(kernel: str, sample) -> np.ndarray:
    """Default CV candidates for ``kernel``.

    Concentrations for the directional kernels. For the Gaussian kernel the
    same concentrations are mapped to bandwidths h = s / sqrt(kappa), where s
    is the root-mean-square coordinate spread of the sample, so the default
    search is equivariant under rescaling of the data.
    """
    kappas = np.asarray(DEFAULT_KAPPA_GRID, dtype=float)
    if kernel != "gaussian":
        return kappas
    x = np.asarray(sample, dtype=float)
    spread = float(np.sqrt(np.mean(np.var(x, axis=0)))) if len(x) > 1 else 1.0
    spread = spread if spread > 0 else 1.0
    return np.sort(spread / np.sqrt(kappas))


def cv_select_concentration(manifold: Manifold, sample, kernel: str | None = None, grid=None) -> float:
    """Smoothing parameter maximising the leave-one-out log-likelihood.

    ``grid`` holds concentrations (bandwidths for the Gaussian kernel); the
    default is :func:`default_parameter_grid`. Ties go to the smoother
    candidate: the smaller concentration, or the larger bandwidth for the
    Gaussian kernel.
    """
    kernel = kernel or kernel_for(manifold)
    grid = default_parameter_grid(kernel, sample) if grid is None else np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise SelectionError("empty parameter grid")
    if np.any(np.diff(grid) < 0):
        raise SelectionError("parameter grid must be sorted")
    ll = loo_log_likelihoods(manifold, sample, kernel, grid)
    if not np.any(np.isfinite(ll)):
        raise SelectionError("every leave-one-out likelihood is -inf")
    best = np.flatnonzero(ll == np.max(ll))
    pick = best[-1] if kernel == "gaussian" else best[0]
    return float(grid[pick])


def fit_kde(manifold: Manifold, sample, kernel: str | None = None, grid=None, param: float | None = None) -> KernelDensity:
    """KDE with the kernel matching ``manifold`` and a CV-selected parameter."""
    kernel = kernel or kernel_for(manifold)
    if param is None:
        param = cv_select_concentration(manifold, sample, kernel, grid)
    return KernelDensity(manifold, sample, KernelConfig(kernel, param))


# -- serialisation ------------------------------------------------------------


def model_from_dict(d: dict):
    kind = d.get("type")
    if kind == "vmf":
        return VonMisesFisher(tuple(d["mu"]), float(d["kappa"]))
    if kind == "torus_von_mises":
        return TorusVonMises(tuple(d["mus"]), tuple(d["kappas"]))
    if kind == "gaussian":
        return IsotropicGaussian(tuple(d["mean"]), float(d["sigma"]))
    if kind == "mixture":
        return Mixture(tuple(d["weights"]), tuple(model_from_dict(c) for c in d["components"]))
    if kind == "bimodal_vmf":
        return bimodal_vmf_mixture(float(d.get("kappa", 10.0)))
    raise DomainError(f"unknown density type {kind!r}")


def density_sup(model) -> float:
    """Best available upper value of an analytic density (mixtures: max over modes)."""
    if isinstance(model, Mixture):
        modes = []
        for c in model.components:
            anchor = getattr(c, "mu", None) or getattr(c, "mus", None) or getattr(c, "mean", None)
            modes.append(np.asarray(anchor, dtype=float))
        return float(np.max(model.pdf(np.vstack(modes))))
    return model.sup
