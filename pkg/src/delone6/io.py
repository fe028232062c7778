"""Point-file reading and writing (CSV with an ``x,y,z`` header, or JSON)."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .pointset import PointSetError, lexicographic_order


def read_points(path) -> np.ndarray:
    """Load an (N, 3) array from ``.csv`` or ``.json``.

    JSON is either ``[[x, y, z], ...]`` or ``[{"x": .., "y": .., "z": ..}, ...]``.
    """
    path = Path(path)
    if path.suffix.lower() == ".json":
        with open(path) as fh:
            data = json.load(fh)
        if not isinstance(data, list):
            raise PointSetError(f"{path}: expected a JSON array of points")
        rows = [[p["x"], p["y"], p["z"]] if isinstance(p, dict) else p for p in data]
    else:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = [h.strip() for h in next(reader, [])]
            if header != ["x", "y", "z"]:
                raise PointSetError(f"{path}: CSV header must be 'x,y,z', got {','.join(header)!r}")
            rows = [row for row in reader if row]
    try:
        pts = np.array(rows, dtype=float).reshape(-1, 3)
    except ValueError as exc:
        raise PointSetError(f"{path}: malformed point data ({exc})") from None
    return pts


def write_points(path, points) -> None:
    """Write points in canonical order; format follows the file suffix."""
    path = Path(path)
    pts = np.asarray(points, dtype=float)
    pts = pts[lexicographic_order(pts)]
    if path.suffix.lower() == ".json":
        with open(path, "w") as fh:
            json.dump(pts.tolist(), fh)
            fh.write("\n")
        return
    with open(path, "w", newline="") as fh:
        fh.write("x,y,z\n")
        for x, y, z in pts.tolist():
            fh.write(f"{x!r},{y!r},{z!r}\n")
