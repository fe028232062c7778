"""Packing and covering radii of point samples and their subsets.

The covering radius is the largest distance from a point of the window to
the nearest sample point.  It is bracketed by hierarchical grid refinement:
``d(z, X)`` is 1-Lipschitz, so the value at a cell center plus the cell's
half-diagonal bounds it over the whole cell, and cells whose bound cannot
beat the best sampled value are dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from .pointset import Box, PointSet, PointSetError

_BRUTE_FORCE_LIMIT = 64
_MAX_SEED_CELLS = 200_000


class EmptySubsetError(PointSetError):
    pass


@dataclass(frozen=True)
class DeloneParams:
    """Estimated ``(r, R)`` of a point sample.

    ``R`` is certified to lie in ``[R, R + R_error]`` over ``window``.
    ``r`` is ``inf`` when fewer than two points are present.
    """

    r: float
    R: float
    R_error: float = 0.0
    method: str = "grid-refined"
    window: Box | None = None
    n_points: int = 0
    exceeds_ceiling: bool = False

    def __post_init__(self):
        if self.R_error < 0:
            raise ValueError("R_error must be >= 0")
        if self.method not in ("analytic", "grid-refined"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method == "analytic" and self.R_error != 0:
            raise ValueError("analytic parameters carry no estimator error")

    @property
    def R_upper(self) -> float:
        return self.R + self.R_error

    def to_dict(self) -> dict:
        return {
            "r": None if math.isinf(self.r) else self.r,
            "R": self.R,
            "R_error": self.R_error,
            "method": self.method,
            "window": None if self.window is None else self.window.to_dict(),
            "n_points": self.n_points,
            "exceeds_ceiling": self.exceeds_ceiling,
        }


def min_pairwise_distance(pts: np.ndarray) -> float:
    if len(pts) < 2:
        raise PointSetError("need at least 2 points for a pairwise distance")
    if len(pts) <= _BRUTE_FORCE_LIMIT:
        return float(pdist(pts).min())
    d, _ = cKDTree(pts).query(pts, k=2)
    return float(d[:, 1].min())


def packing_radius(pset: PointSet) -> float:
    """Half the minimum inter-point distance."""
    if len(pset) < 2:
        raise PointSetError("packing radius needs at least 2 points")
    if len(pset) <= _BRUTE_FORCE_LIMIT:
        return float(pdist(pset.points).min()) / 2
    d, _ = pset.tree.query(pset.points, k=2)
    return float(d[:, 1].min()) / 2


def _seed_grid(window: Box, h: float):
    ext = window.extent
    counts = np.maximum(1, np.ceil(ext / h - 1e-9)).astype(int)
    while np.prod(counts) > _MAX_SEED_CELLS:
        counts = np.maximum(1, counts // 2)
    sizes = ext / counts
    axes = [window.lo[k] + (np.arange(counts[k]) + 0.5) * sizes[k] for k in range(3)]
    centers = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    return centers, sizes


def _split(centers: np.ndarray, sizes: np.ndarray):
    # Halve only the axes with positive size; a flat window stays flat.
    offsets = [np.array([-0.25, 0.25]) * s if s > 0 else np.zeros(1) for s in sizes]
    grid = np.stack(np.meshgrid(*offsets, indexing="ij"), axis=-1).reshape(-1, 3)
    children = (centers[:, None, :] + grid[None, :, :]).reshape(-1, 3)
    return children, np.where(sizes > 0, sizes / 2, 0.0)


def covering_radius(pset: PointSet, target_error: float | None = None, sites: np.ndarray | None = None,
                    window: Box | None = None, seed_size: float | None = None) -> tuple[float, float]:
    """Certified bracket of ``max_{z in window} d(z, sites)``.

    Returns ``(R, R_error)`` with the true value in ``[R, R + R_error]`` and
    ``R_error <= target_error``.  ``sites`` defaults to all points of the
    set, ``window`` to the set's window.
    """
    if sites is None:
        sites = pset.points
        tree = pset.tree
    else:
        sites = np.asarray(sites, dtype=float).reshape(-1, 3)
        if len(sites) == 0:
            raise EmptySubsetError("no sites to measure the covering radius against")
        tree = cKDTree(sites)
    window = pset.window if window is None else window
    if window.is_empty:
        raise PointSetError("covering radius needs a nonempty window")
    if target_error is None:
        target_error = 1e-3 * (packing_radius(pset) if len(pset) > 1 else 1.0)
    if not target_error > 0:
        raise ValueError("target_error must be positive")

    if seed_size is None:
        ext = window.extent
        n_in = max(1, int(np.count_nonzero(window.contains(sites))))
        vol = float(np.prod(np.where(ext > 0, ext, 1.0)))
        spacing = (vol / n_in) ** (1 / 3)
        seed_size = max(min(spacing / 2, float(ext.max()) or 1.0), 1e-12)

    centers, sizes = _seed_grid(window, seed_size)
    best = -np.inf
    settled_upper = -np.inf
    while len(centers):
        f, j = tree.query(centers)
        half_diag = 0.5 * float(np.linalg.norm(sizes))
        best = max(best, float(f.max()))
        # Farthest cell corner from the center's nearest site: never above
        # f + half_diag, and much tighter where the site is well off-center.
        upper = np.sqrt(np.sum((np.abs(centers - sites[j]) + 0.5 * sizes) ** 2, axis=1))
        open_ = upper - best > target_error
        done = upper[~open_]
        # Cells that cannot reach `best` drop out; the rest bound the error.
        done = done[done > best]
        if len(done):
            settled_upper = max(settled_upper, float(done.max()))
        if not np.any(open_) or half_diag == 0:
            if half_diag == 0 and np.any(open_):
                settled_upper = max(settled_upper, float(upper[open_].max()))
            break
        centers, sizes = _split(centers[open_], sizes)
    err = max(0.0, settled_upper - best)
    return best, err


def covering_radius_bruteforce(sites: np.ndarray, window: Box, n: int = 40) -> float:
    """Max over an ``n^3`` probe grid spanning the window (a lower bound)."""
    axes = [np.linspace(window.lo[k], window.hi[k], n) for k in range(3)]
    probes = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    d, _ = cKDTree(np.asarray(sites, float)).query(probes)
    return float(d.max())


def estimate_params(pset: PointSet, target_error: float | None = None) -> DeloneParams:
    r = packing_radius(pset)
    if target_error is None:
        target_error = 1e-3 * r
    R, err = covering_radius(pset, target_error)
    return DeloneParams(r, R, err, "grid-refined", pset.window, len(pset))


def verify_delone(pset: PointSet, subset_mask, target_error: float | None = None,
                  ceiling: float | None = None) -> DeloneParams:
    """Delone parameters of a masked subset, with R measured over the host window.

    ``ceiling`` flags (without raising) a covering radius beyond a sanity
    limit, the signature of a subset that is not Delone at that scale.
    """
    mask = np.asarray(subset_mask, dtype=bool)
    if mask.shape != (len(pset),):
        raise ValueError("subset mask must have one entry per point")
    if not np.any(mask & pset.window_mask):
        raise EmptySubsetError("subset has no points inside the window")
    sub = pset.points[mask]
    r = min_pairwise_distance(sub) / 2 if len(sub) >= 2 else math.inf
    if target_error is None:
        target_error = 1e-3 * (r if math.isfinite(r) else packing_radius(pset))
    R, err = covering_radius(pset, target_error, sites=sub)
    over = ceiling is not None and R > ceiling
    return DeloneParams(r, R, err, "grid-refined", pset.window, len(sub), bool(over))
