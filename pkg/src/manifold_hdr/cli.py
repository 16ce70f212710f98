"""Command-line entry point: ``manifold-hdr <subcommand> ...``.

Exit codes: 0 success, 2 invalid input or configuration, 3 unreadable or
malformed input files, 64 usage errors (unknown subcommand, bad flags).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import datasets, io
from .datasets import IngestionError
from .density import KernelConfig, KernelDensity, cv_select_concentration, kernel_for, model_from_dict
from .experiments import ExperimentConfig, run_study
from .grids import grid_for
from .hdr import connected_components, estimate_hdr, estimate_hdr_by_probability, estimate_level, split_sample
from .morphology import maximal_spacing

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INGEST = 3
EXIT_USAGE = 64

GRID_RES_ENV = "MANIFOLD_HDR_GRID_RES"
DEFAULT_GRID_RES = 20_000

log = logging.getLogger("manifold_hdr")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def default_grid_res() -> int:
    raw = os.environ.get(GRID_RES_ENV)
    if raw is None:
        return DEFAULT_GRID_RES
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{GRID_RES_ENV} must be an integer, got {raw!r}") from None


def _emit(obj, out: str | None):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if out:
        io.write_json(out, obj)
        log.info("wrote %s", out)
    else:
        print(text)


def _density_for(args, manifold, points):
    """Analytic density from ``--density`` or a KDE (fixed ``--kappa`` or CV)."""
    if args.density:
        model = model_from_dict(io.read_json(args.density))
        if model.manifold != manifold:
            raise ValueError(f"density lives on {model.manifold.tag}, sample on {manifold.tag}")
        return model
    kernel = args.kernel or kernel_for(manifold)
    if args.kappa is not None:
        param = args.kappa
    else:
        grid = args.kappa_grid
        param = cv_select_concentration(manifold, points, kernel, grid)
    return KernelDensity(manifold, points, KernelConfig(kernel, param))


def cmd_estimate(args) -> int:
    manifold, points = datasets.read_sample(args.sample)
    density = _density_for(args, manifold, points)
    if args.gamma is not None:
        est = estimate_hdr_by_probability(manifold, points, density, args.gamma, args.rn)
    else:
        est = estimate_hdr(split_sample(manifold, points, density, args.lam), args.rn)
    out = est.to_dict()
    out["density"] = density.to_dict()
    res = args.grid_res or (default_grid_res() if args.plot else None)
    if res and manifold.kind != "euclidean":
        grid = grid_for(manifold, res)
        region = est.set.discretize(grid)
        if not region.is_empty():
            out["maximal_spacing"] = maximal_spacing(region, points)
        if args.plot:
            _plot(args.plot, manifold, points, region)
    _emit(out, args.out)
    return EXIT_OK


def _plot(path, manifold, points, region):
    from . import plotting

    if manifold.kind == "sphere":
        plotting.plot_sphere_estimate(path, points, region)
    elif manifold.kind == "torus" and manifold.dim == 2:
        plotting.plot_torus_estimate(path, points, region)
    else:
        log.warning("no figure for %s", manifold.tag)
        return
    log.info("wrote %s", path)


def cmd_level(args) -> int:
    manifold, points = datasets.read_sample(args.sample)
    density = _density_for(args, manifold, points)
    values = np.asarray(density.pdf(points))
    out = {"gamma": args.gamma, "lambda_hat": estimate_level(values, args.gamma), "n": len(points), "density": density.to_dict()}
    _emit(out, args.out)
    return EXIT_OK


def _run_config(args, study: str | None) -> int:
    cfg = io.read_json(args.config)
    for key, flag in (("seed", args.seed), ("reps", args.reps), ("grid_res", args.grid_res)):
        if flag is not None:
            cfg[key] = flag
    cfg.setdefault("grid_res", default_grid_res())
    if study is not None:
        cfg["study"] = study
    config = ExperimentConfig.from_dict(cfg)
    record = run_study(config)
    output = args.out or config.output
    if output:
        csv_path, json_path = record.write(output)
        log.info("wrote %s and %s", csv_path, json_path)
        if args.plot and record.rows and "d_H" in record.rows[0]:
            from . import plotting

            plotting.plot_convergence(args.plot, record)
    print(json.dumps(record.summary(), indent=2, sort_keys=True, default=float))
    return EXIT_OK


def cmd_simulate(args) -> int:
    return _run_config(args, None)


def cmd_convergence(args) -> int:
    return _run_config(args, "convergence")


def cmd_ingest(args) -> int:
    from .manifolds import Manifold

    if args.kind == "comets":
        points = datasets.ingest_comets(args.input, angle_unit=args.angle_unit)
        manifold = Manifold.sphere()
    else:
        points = datasets.ingest_phases(args.input)
        manifold = Manifold.torus(2)
    datasets.write_sample(args.out, manifold, points)
    print(json.dumps({"manifold": manifold.tag, "n": len(points), "out": str(args.out)}, sort_keys=True))
    return EXIT_OK


def cmd_export_boundary(args) -> int:
    est = io.read_estimate(args.estimate)
    grid = grid_for(est.manifold, args.grid_res or default_grid_res())
    region = est.set.discretize(grid)
    io.write_boundary(args.out, region)
    if args.plot:
        points = datasets.read_sample(args.sample)[1] if args.sample else est.centers
        _plot(args.plot, est.manifold, points, region)
    print(json.dumps({"out": str(args.out), "grid_nodes": len(grid), "dispersion": grid.dispersion, "boundary_nodes": len(io.boundary_nodes(region))}, sort_keys=True))
    return EXIT_OK


def cmd_components(args) -> int:
    est = io.read_estimate(args.estimate)
    count, labels = connected_components(est)
    sizes = np.bincount(labels, minlength=count).tolist() if count else []
    _emit({"n_components": count, "component_sizes": sizes, "component_labels": labels.tolist()}, args.out)
    return EXIT_OK


def _kappa_grid(text: str) -> list[float]:
    try:
        return sorted(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("kappa grid must be comma-separated numbers") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="manifold-hdr", description="Highest density region estimation on the sphere, torus and R^d.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def density_flags(sp):
        sp.add_argument("--sample", required=True, help="sample file (CSV manifold,dim,c1..ck or JSON)")
        sp.add_argument("--density", help="analytic density JSON instead of a KDE")
        sp.add_argument("--kernel", choices=["vmf", "von_mises", "gaussian"])
        sp.add_argument("--kappa", type=float, help="fixed concentration / bandwidth (skips CV)")
        sp.add_argument("--kappa-grid", type=_kappa_grid, help="comma-separated CV grid")
        sp.add_argument("--out", help="write JSON here instead of stdout")

    sp = sub.add_parser("estimate", help="estimate a highest density region")
    density_flags(sp)
    level = sp.add_mutually_exclusive_group(required=True)
    level.add_argument("--lam", type=float, help="density level")
    level.add_argument("--gamma", type=float, help="probability level; region content is 1 - gamma")
    sp.add_argument("--rn", type=float, required=True, help="ball radius")
    sp.add_argument("--grid-res", type=int, default=None, help="grid for diagnostics / plot")
    sp.add_argument("--plot", help="write a PNG of the estimate")
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("level", help="empirical level for a probability gamma")
    density_flags(sp)
    sp.add_argument("--gamma", type=float, required=True)
    sp.set_defaults(func=cmd_level)

    for name, func, text in (
        ("simulate", cmd_simulate, "run the study named in a config JSON"),
        ("convergence", cmd_convergence, "run a convergence study from a config JSON"),
    ):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("config")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--reps", type=int)
        sp.add_argument("--grid-res", type=int)
        sp.add_argument("--out", help="output base path (.csv and .summary.json)")
        sp.add_argument("--plot", help="write a box plot PNG")
        sp.set_defaults(func=func)

    sp = sub.add_parser("ingest", help="convert an orbit or phase table to a sample file")
    sp.add_argument("kind", choices=["comets", "phases"])
    sp.add_argument("input")
    sp.add_argument("--out", required=True)
    sp.add_argument("--angle-unit", choices=list(datasets.ANGLE_UNITS), default="deg")
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser("export-boundary", help="boundary CSV of an estimate on a grid")
    sp.add_argument("estimate")
    sp.add_argument("--out", required=True)
    sp.add_argument("--grid-res", type=int)
    sp.add_argument("--sample", help="sample file to overlay on the plot")
    sp.add_argument("--plot", help="write a PNG of the boundary")
    sp.set_defaults(func=cmd_export_boundary)

    sp = sub.add_parser("components", help="connected components of an estimate")
    sp.add_argument("estimate")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_components)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(sys.argv[1:] if argv is None else list(argv))
        if args.command is None:
            raise UsageError(parser.format_help())
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except (IngestionError, OSError) as exc:
        print(f"ingestion error: {exc}", file=sys.stderr)
        return EXIT_INGEST
    except (ValueError, KeyError, RuntimeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
