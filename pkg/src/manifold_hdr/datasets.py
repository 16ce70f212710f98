"""Ingestion of orbit and phase tables, and sample-file round trips.

Sample files are CSV with header ``manifold,dim,c1..ck`` (one point per row)
or a JSON array of coordinate arrays. Angles are stored in radians and all
coordinates are written with 17 significant digits, so a write/read cycle
reproduces the floats exactly.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .manifolds import DomainError, Manifold

ANGLE_UNITS = ("deg", "rad")

INCLINATION_COLUMNS = ("i", "inclination", "incl")
NODE_COLUMNS = ("om", "node", "ascending_node", "omega", "raan")


class IngestionError(ValueError):
    """Malformed input table; ``row`` is the 1-based data row when known."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        super().__init__(message if row is None else f"row {row}: {message}")


def _read_table(path) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise IngestionError(f"{path}: empty file")
            rows = [r for r in reader if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise IngestionError(f"{path}: {exc}") from exc
    return [h.strip() for h in header], rows


def _find_column(header: list[str], wanted: str | None, candidates) -> int:
    lower = [h.lower() for h in header]
    names = [wanted] if wanted else candidates
    for name in names:
        if name.lower() in lower:
            return lower.index(name.lower())
    raise IngestionError(f"missing column; looked for {list(names)} in {header}")


def _number(cell: str, row: int, what: str) -> float:
    try:
        v = float(cell)
    except (TypeError, ValueError):
        raise IngestionError(f"non-numeric {what} {cell!r}", row) from None
    if not math.isfinite(v):
        raise IngestionError(f"non-finite {what}", row)
    return v


def orbit_normal(inclination, node) -> np.ndarray:
    """Unit normal of the orbital plane, (sin i sin O, -sin i cos O, cos i), angles in radians."""
    i = np.asarray(inclination, dtype=float)
    om = np.asarray(node, dtype=float)
    return np.stack([np.sin(i) * np.sin(om), -np.sin(i) * np.cos(om), np.cos(i)], axis=-1)


def ingest_comets(
    path,
    angle_unit: str = "deg",
    inclination_column: str | None = None,
    node_column: str | None = None,
) -> np.ndarray:
    """Read orbit inclination/ascending-node pairs and return orbit normals on S^2.

    Rows whose (i, node) agree after rounding to two decimals in the source
    unit are duplicates; the first occurrence is kept.
    """
    if angle_unit not in ANGLE_UNITS:
        raise IngestionError(f"angle unit must be one of {ANGLE_UNITS}")
    header, rows = _read_table(path)
    ci = _find_column(header, inclination_column, INCLINATION_COLUMNS)
    co = _find_column(header, node_column, NODE_COLUMNS)
    i_max, o_max = (180.0, 360.0) if angle_unit == "deg" else (math.pi, 2 * math.pi)
    seen = set()
    incl, node = [], []
    for k, r in enumerate(rows, start=1):
        if max(ci, co) >= len(r):
            raise IngestionError("too few fields", k)
        i = _number(r[ci], k, "inclination")
        o = _number(r[co], k, "ascending node")
        if not 0.0 <= i <= i_max:
            raise IngestionError(f"inclination {i} outside [0, {i_max:g}]", k)
        if not 0.0 <= o <= o_max:
            raise IngestionError(f"ascending node {o} outside [0, {o_max:g}]", k)
        key = (round(i, 2), round(o, 2))
        if key in seen:
            continue
        seen.add(key)
        incl.append(i)
        node.append(o)
    if angle_unit == "deg":
        incl, node = np.radians(incl), np.radians(node)
    return orbit_normal(incl, np.mod(node, 2 * np.pi)).reshape(-1, 3)


def ingest_phases(path, columns: tuple[str, str] | None = None) -> np.ndarray:
    """Read two phase columns in hours and map them to angles on the 2-torus."""
    header, rows = _read_table(path)
    if columns is None:
        numeric = [j for j, h in enumerate(header) if h.lower() not in ("gene", "name", "id", "symbol")]
        if len(numeric) < 2:
            raise IngestionError(f"need two phase columns, found {header}")
        cols = numeric[:2]
    else:
        cols = [_find_column(header, c, ()) for c in columns]
    out = np.empty((len(rows), 2))
    for k, r in enumerate(rows, start=1):
        if max(cols) >= len(r):
            raise IngestionError("too few fields", k)
        for j, c in enumerate(cols):
            out[k - 1, j] = _number(r[c], k, f"phase {header[c]!r}")
    return hours_to_angles(out)


def hours_to_angles(hours) -> np.ndarray:
    return 2.0 * np.pi * np.mod(np.asarray(hours, dtype=float), 24.0) / 24.0


def angles_to_hours(angles) -> np.ndarray:
    return np.mod(np.asarray(angles, dtype=float), 2 * np.pi) * 24.0 / (2 * np.pi)


# -- sample files ------------------------------------------------------------


def write_sample(path, manifold: Manifold, points) -> Path:
    """Write points as CSV (``manifold,dim,c1..ck``) or JSON, chosen by suffix."""
    path = Path(path)
    pts = manifold.canonicalize(points)
    if path.suffix.lower() == ".json":
        path.write_text(json.dumps({"manifold": manifold.tag, "points": pts.tolist()}))
        return path
    k = manifold.ambient_dim
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["manifold", "dim", *[f"c{j + 1}" for j in range(k)]])
        for p in pts:
            w.writerow([manifold.tag, manifold.dim, *[repr(float(c)) for c in p]])
    return path


def read_sample(path, manifold: Manifold | None = None) -> tuple[Manifold, np.ndarray]:
    """Read a sample file written by :func:`write_sample` (or a bare JSON array)."""
    path = Path(path)
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(path.read_text())
            if isinstance(data, dict):
                manifold = manifold or Manifold.parse(data["manifold"])
                data = data["points"]
            if manifold is None:
                raise IngestionError("bare JSON arrays need an explicit manifold")
            pts = np.asarray(data, dtype=float).reshape(-1, manifold.ambient_dim)
            return manifold, manifold.canonicalize(pts)
    except (OSError, ValueError, KeyError) as exc:
        if isinstance(exc, IngestionError):
            raise
        raise IngestionError(f"{path}: {exc}") from exc
    header, rows = _read_table(path)
    if header[:2] != ["manifold", "dim"]:
        raise IngestionError(f"sample CSV header must start with manifold,dim; got {header}")
    k = len(header) - 2
    pts = np.empty((len(rows), k))
    for r, row in enumerate(rows, start=1):
        if len(row) != k + 2:
            raise IngestionError("wrong field count", r)
        try:
            man = Manifold.parse(row[0], int(row[1]))
        except (ValueError, DomainError) as exc:
            raise IngestionError(str(exc), r) from None
        if manifold is None:
            manifold = man
        elif man != manifold:
            raise IngestionError(f"manifold {man.tag} differs from {manifold.tag}", r)
        pts[r - 1] = [_number(c, r, "coordinate") for c in row[2:]]
    if manifold is None:
        raise IngestionError(f"{path}: no points")
    if manifold.ambient_dim != k:
        raise IngestionError(f"{manifold.tag} needs {manifold.ambient_dim} coordinates, file has {k}")
    try:
        return manifold, manifold.canonicalize(pts)
    except DomainError as exc:
        raise IngestionError(str(exc)) from exc
