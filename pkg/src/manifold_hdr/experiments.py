"""Seeded Monte Carlo studies of the region estimator.

Each study is driven by an :class:`ExperimentConfig` and returns a
:class:`RunRecord` with one row per (sample size, replicate[, gamma]). Every
replicate draws from its own generator seeded with ``(seed, rep, n)``, so
replicate ``k`` at different sample sizes forms a seed-paired comparison and
records are exactly reproducible.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .density import KernelConfig, KernelDensity, cv_select_concentration, kernel_for, model_from_dict
from .grids import ConfigurationError, Grid, GridSpec, build_grid
from .hdr import (
    LabeledSample,
    connected_components,
    estimate_hdr,
    estimate_level,
    survival_sup_distance,
    true_level,
)
from .morphology import GridSet, grid_components, hausdorff_distance

log = logging.getLogger(__name__)

STUDIES = ("convergence", "level", "plugin", "dkw")


@dataclass
class ExperimentConfig:
    density: dict
    n_schedule: list
    rn: float | list = 0.05
    lam: float | None = None
    gammas: list | None = None
    reps: int = 20
    seed: int = 0
    grid_res: int = 80_000
    sup_grid_res: int = 20_000
    kde: str | float = "cv"
    kappa_grid: list | None = None
    undersmooth: float = 1.0
    oracle_n: int = 1_000_000
    study: str = "convergence"
    output: str | None = None

    def __post_init__(self):
        self.n_schedule = [int(n) for n in self.n_schedule]
        if not self.n_schedule or any(b <= a for a, b in zip(self.n_schedule, self.n_schedule[1:])):
            raise ConfigurationError("n schedule must be non-empty and strictly increasing")
        if self.reps < 1:
            raise ConfigurationError("replicate count must be >= 1")
        if self.study not in STUDIES:
            raise ConfigurationError(f"unknown study {self.study!r}")
        if isinstance(self.rn, (list, tuple)):
            if len(self.rn) != len(self.n_schedule):
                raise ConfigurationError("rn schedule must match the n schedule")
            self.rn = [float(r) for r in self.rn]
        if min(self.rn_list) <= 0:
            raise ConfigurationError("rn must be > 0")
        if self.gammas is not None:
            self.gammas = [float(g) for g in self.gammas]
            if any(not 0 < g < 1 for g in self.gammas):
                raise ConfigurationError("gammas must lie in (0, 1)")

    @property
    def rn_list(self) -> list:
        return list(self.rn) if isinstance(self.rn, list) else [float(self.rn)] * len(self.n_schedule)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        unknown = set(d) - set(known)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**known)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from exc

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return asdict(self)

    def hash(self) -> str:
        d = self.to_dict()
        d.pop("output", None)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class RunRecord:
    config_hash: str
    study: str
    dispersion: float
    rows: list = field(default_factory=list)
    wall_time: float = field(default=0.0, compare=False)

    def values(self, key: str, **where) -> np.ndarray:
        sel = [r[key] for r in self.rows if all(r.get(k) == v for k, v in where.items())]
        return np.asarray(sel, dtype=float)

    def summary(self) -> dict:
        """Medians and quartiles of each error column per (n[, gamma])."""
        groups: dict = {}
        for r in self.rows:
            key = (r["n"], r.get("gamma"))
            groups.setdefault(key, []).append(r)
        out = []
        for (n, gamma), rows in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1] or 0)):
            entry = {"n": n, "reps": len(rows)}
            if gamma is not None:
                entry["gamma"] = gamma
            for col in ("d_H", "D_n", "level_error", "plugin_components", "ball_components", "symdiff_nodes"):
                if col not in rows[0]:
                    continue
                vals = np.array([r[col] for r in rows], dtype=float)
                q1, med, q3 = np.percentile(vals, [25, 50, 75])
                entry[col] = {"median": med, "q1": q1, "q3": q3}
                if col == "d_H":
                    kept = np.array([r[col] for r in rows if not r["empty"]], dtype=float)
                    entry["d_H_excluding_empty"] = float(np.median(kept)) if len(kept) else None
                    entry["empty_count"] = int(sum(r["empty"] for r in rows))
            out.append(entry)
        return {
            "config_hash": self.config_hash,
            "study": self.study,
            "dispersion": self.dispersion,
            "wall_time": self.wall_time,
            "groups": out,
        }

    def write(self, output, append: bool = True) -> tuple[Path, Path]:
        """Append rows to ``<output>.csv`` and write ``<output>.summary.json``."""
        base = Path(output)
        base.parent.mkdir(parents=True, exist_ok=True)
        csv_path = base.with_suffix(".csv")
        json_path = base.with_suffix(".summary.json")
        fields = ["config_hash", *self.rows[0].keys()] if self.rows else ["config_hash"]
        new = not (append and csv_path.exists())
        with open(csv_path, "w" if new else "a", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=fields)
            if new:
                w.writeheader()
            for r in self.rows:
                w.writerow({"config_hash": self.config_hash, **r})
        json_path.write_text(json.dumps(self.summary(), indent=2, default=float))
        return csv_path, json_path


# -- helpers --------------------------------------------------------------


@lru_cache(maxsize=8)
def _cached_grid(tag: str, res: int) -> Grid:
    from .manifolds import Manifold

    return build_grid(GridSpec(Manifold.parse(tag), res))


def study_grid(model, res: int) -> Grid:
    return _cached_grid(model.manifold.tag, int(res))


def _replicate_rng(seed: int, rep: int, n: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(rep), int(n)])


def _fit_density(config: ExperimentConfig, model, sample):
    man = model.manifold
    if config.kde == "true":
        return model, math.nan
    kernel = kernel_for(man)
    if config.kde == "cv":
        grid = config.kappa_grid
        param = cv_select_concentration(man, sample, kernel, grid)
    else:
        param = float(config.kde)
    param = param * config.undersmooth if kernel != "gaussian" else param / config.undersmooth
    return KernelDensity(man, sample, KernelConfig(kernel, param)), param


def region_error(grid: Grid, truth_mask: np.ndarray, est) -> tuple[float, bool]:
    """Hausdorff distance between the discretised true region and an estimate.

    The estimate is represented by the grid nodes it covers plus its centres.
    If either side is empty the manifold diameter is returned with the flag set.
    """
    man = grid.manifold
    if est.is_empty() or not truth_mask.any():
        return man.diameter, True
    covered = est.set.contains(grid.nodes)
    pts = np.vstack([grid.nodes[covered], est.centers])
    return hausdorff_distance(grid.nodes[truth_mask], pts, man), False


def _check_grid(grid: Grid, config: ExperimentConfig):
    limit = min(config.rn_list) / 4.0
    if grid.dispersion >= limit:
        raise ConfigurationError(
            f"grid dispersion {grid.dispersion:.4g} must be below rn/4 = {limit:.4g}; raise grid_res"
        )


# -- studies --------------------------------------------------------------


def run_convergence_study(config: ExperimentConfig) -> RunRecord:
    """Hausdorff error of the fixed-level estimate across sample sizes."""
    if config.lam is None:
        raise ConfigurationError("convergence study needs lam")
    model = model_from_dict(config.density)
    grid = study_grid(model, config.grid_res)
    _check_grid(grid, config)
    sup_grid = study_grid(model, min(config.sup_grid_res, config.grid_res))
    truth = np.asarray(model.pdf(grid.nodes)) >= config.lam
    f_sup = np.asarray(model.pdf(sup_grid.nodes))
    record = RunRecord(config.hash(), "convergence", grid.dispersion)
    t0 = time.perf_counter()
    for n, rn in zip(config.n_schedule, config.rn_list):
        for rep in range(config.reps):
            rng = _replicate_rng(config.seed, rep, n)
            x = model.sample(n, rng)
            fn, param = _fit_density(config, model, x)
            values = np.asarray(fn.pdf(x))
            est = estimate_hdr(LabeledSample(model.manifold, x, values, config.lam), rn)
            d_h, empty = region_error(grid, truth, est)
            d_n = float(np.max(np.abs(f_sup - np.asarray(fn.pdf(sup_grid.nodes)))))
            record.rows.append(
                {
                    "n": n, "rep": rep, "seed": config.seed, "rn": rn, "lambda": config.lam,
                    "kernel_param": param, "n_plus": int((values >= config.lam).sum()),
                    "n_selected": len(est.selected), "d_H": d_h, "D_n": d_n, "empty": empty,
                    "dispersion": grid.dispersion,
                }
            )
            log.info("n=%d rep=%d d_H=%.4f D_n=%.4f", n, rep, d_h, d_n)
    record.wall_time = time.perf_counter() - t0
    return record


def run_level_study(config: ExperimentConfig) -> RunRecord:
    """Level error |lambda_hat - lambda_gamma| and region error per gamma."""
    if not config.gammas:
        raise ConfigurationError("level study needs gammas")
    model = model_from_dict(config.density)
    grid = study_grid(model, config.grid_res)
    _check_grid(grid, config)
    node_f = np.asarray(model.pdf(grid.nodes))
    levels = {
        g: true_level(model, g, config.oracle_n, np.random.default_rng([config.seed, 10**6 + k]))
        for k, g in enumerate(config.gammas)
    }
    record = RunRecord(config.hash(), "level", grid.dispersion)
    t0 = time.perf_counter()
    for n, rn in zip(config.n_schedule, config.rn_list):
        for rep in range(config.reps):
            rng = _replicate_rng(config.seed, rep, n)
            x = model.sample(n, rng)
            fn, param = _fit_density(config, model, x)
            values = np.asarray(fn.pdf(x))
            for g in config.gammas:
                lam_hat = estimate_level(values, g)
                est = estimate_hdr(LabeledSample(model.manifold, x, values, lam_hat), rn)
                est.gamma = g
                d_h, empty = region_error(grid, node_f >= levels[g], est)
                record.rows.append(
                    {
                        "n": n, "rep": rep, "gamma": g, "seed": config.seed, "rn": rn,
                        "kernel_param": param, "lambda_gamma": levels[g], "lambda_hat": lam_hat,
                        "level_error": abs(lam_hat - levels[g]), "d_H": d_h, "empty": empty,
                        "dispersion": grid.dispersion,
                    }
                )
    record.wall_time = time.perf_counter() - t0
    return record


def compare_plugin(config: ExperimentConfig) -> RunRecord:
    """Ball-union estimate versus the plug-in region on identical samples."""
    model = model_from_dict(config.density)
    grid = study_grid(model, config.grid_res)
    _check_grid(grid, config)
    if config.lam is None and not config.gammas:
        raise ConfigurationError("plug-in comparison needs lam or gammas")
    link = grid.link_radius
    node_f = np.asarray(model.pdf(grid.nodes))
    record = RunRecord(config.hash(), "plugin", grid.dispersion)
    t0 = time.perf_counter()
    for n, rn in zip(config.n_schedule, config.rn_list):
        for rep in range(config.reps):
            rng = _replicate_rng(config.seed, rep, n)
            x = model.sample(n, rng)
            fn, param = _fit_density(config, model, x)
            values = np.asarray(fn.pdf(x))
            lam = config.lam if config.lam is not None else estimate_level(values, config.gammas[0])
            est = estimate_hdr(LabeledSample(model.manifold, x, values, lam), rn)
            plug = GridSet(grid, np.asarray(fn.pdf(grid.nodes)) >= lam)
            ball = est.set.discretize(grid)
            record.rows.append(
                {
                    "n": n, "rep": rep, "seed": config.seed, "rn": rn, "lambda": lam,
                    "kernel_param": param,
                    "plugin_components": grid_components(plug, link)[0],
                    "ball_components": connected_components(est)[0],
                    "symdiff_nodes": int((plug.mask ^ ball.mask).sum()),
                    "plugin_truth_symdiff": int((plug.mask ^ (node_f >= lam)).sum()),
                    "empty": est.is_empty(),
                    "dispersion": grid.dispersion,
                }
            )
    record.wall_time = time.perf_counter() - t0
    return record


def run_dkw_trials(model, n: int, trials: int, seed: int = 0, oracle_n: int = 1_000_000) -> np.ndarray:
    """sup_l |P[f >= l] - P_n[f >= l]| for ``trials`` independent samples of size n.

    P is approximated by the empirical law of f over ``oracle_n`` draws.
    """
    ref = np.asarray(model.pdf(model.sample(oracle_n, np.random.default_rng([seed, 0]))))
    out = np.empty(trials)
    for t in range(trials):
        x = model.sample(n, np.random.default_rng([seed, 1, t]))
        out[t] = survival_sup_distance(np.asarray(model.pdf(x)), ref)
    return out


def dkw_bound(n: int) -> float:
    return math.sqrt(math.log(n) / n)


def run_study(config: ExperimentConfig) -> RunRecord:
    if config.study == "convergence":
        return run_convergence_study(config)
    if config.study == "level":
        return run_level_study(config)
    if config.study == "plugin":
        return compare_plugin(config)
    model = model_from_dict(config.density)
    record = RunRecord(config.hash(), "dkw", math.nan)
    t0 = time.perf_counter()
    for n in config.n_schedule:
        stats = run_dkw_trials(model, n, config.reps, config.seed, config.oracle_n)
        for t, s in enumerate(stats):
            record.rows.append({"n": n, "rep": t, "seed": config.seed, "sup_gap": float(s), "bound": dkw_bound(n), "within": bool(s <= dkw_bound(n))})
    record.wall_time = time.perf_counter() - t0
    return record


BIMODAL_CONVERGENCE_CONFIG = {
    "density": {"type": "bimodal_vmf", "kappa": 10.0},
    "lam": 0.45,
    "rn": 0.05,
    "n_schedule": [400, 800, 1600],
    "reps": 20,
    "seed": 0,
    "grid_res": 80_000,
}
