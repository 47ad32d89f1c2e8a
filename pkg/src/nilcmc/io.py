"""File emission: solution CSV, VTK legacy polydata, JSON reports.

CSV files use LF line endings and 17 significant digits so regression files
are bit-stable.
"""
from __future__ import annotations

import csv
import json
import math

import numpy as np

from .domain import ScalarField

__all__ = ["fmt", "write_csv", "write_solution_csv", "read_solution_csv", "lattice_quads",
           "write_vtk", "write_json", "to_jsonable"]


def fmt(v) -> str:
    return format(float(v), ".17g")


def write_csv(path, header, rows):
    """Write rows with floats at 17 significant digits; strings pass through."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating, int, np.integer))
                        and not isinstance(v, bool) else v for v in row])


def write_solution_csv(path, u: ScalarField):
    """``x,y,u`` for interior nodes followed by the boundary intersection points."""
    write_csv(path, ("x", "y", "u"), u.all_points().tolist())


def read_solution_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def lattice_quads(u: ScalarField) -> np.ndarray:
    """Node-index quadruples (counter-clockwise) of lattice cells with four interior corners."""
    idx = u.grid.index_of()
    quads = []
    for i, j in sorted(idx):
        corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
        if all(c in idx for c in corners):
            quads.append([idx[c] for c in corners])
    return np.array(quads, dtype=int).reshape(-1, 4)


def write_vtk(path, u: ScalarField, title: str = "nilcmc graph"):
    """VTK legacy ASCII 3.0 polydata: every point as a vertex plus lattice quads.

    Points are the interior nodes followed by the boundary points, lifted
    to (x, y, u); the height is also attached as point scalars.
    """
    pts = u.all_points()
    quads = lattice_quads(u)
    n = len(pts)
    lines = ["# vtk DataFile Version 3.0", title.replace("\n", " ")[:255], "ASCII",
             "DATASET POLYDATA", f"POINTS {n} double"]
    lines += [f"{fmt(x)} {fmt(y)} {fmt(z)}" for x, y, z in pts]
    lines.append(f"VERTICES {n} {2 * n}")
    lines += [f"1 {k}" for k in range(n)]
    lines.append(f"POLYGONS {len(quads)} {5 * len(quads)}")
    lines += ["4 " + " ".join(str(int(k)) for k in q) for q in quads]
    lines += [f"POINT_DATA {n}", "SCALARS u double 1", "LOOKUP_TABLE default"]
    lines += [fmt(z) for z in pts[:, 2]]
    _write_lf(path, "\n".join(lines) + "\n")


def _write_lf(path, text):
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if hasattr(obj, "as_dict"):
        return to_jsonable(obj.as_dict())
    return obj


def write_json(path, payload: dict):
    _write_lf(path, json.dumps(to_jsonable(payload), indent=2, sort_keys=False) + "\n")
