"""Finite point samples, clusters and distance shells.

A :class:`PointSet` is a finite, boxed sample of an (in principle infinite)
Delone set.  It carries two boxes: ``bbox`` encloses every point, ``window``
is the sub-box where analysis results are trusted.  Neighbour queries go
through a k-d tree built lazily on first use.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree


class PointSetError(ValueError):
    """Invalid input to point-set construction or queries."""


class BoundaryError(RuntimeError):
    """A query needs data from outside the sampled box."""


@dataclass(frozen=True)
class ToleranceModel:
    """Length tolerances used by every geometric predicate.

    eps_match is the coincidence radius for symmetry matching, eps_shell the
    width used to group equal distances, eps_line the distance below which a
    point counts as lying on a line.
    """

    eps_match: float = 1e-6
    eps_shell: float = 1e-6
    eps_line: float = 1e-5

    def __post_init__(self):
        if not self.eps_match > 0:
            raise PointSetError("eps_match must be positive")
        if self.eps_shell < self.eps_match:
            raise PointSetError("eps_shell must be >= eps_match")
        if self.eps_line < self.eps_match:
            raise PointSetError("eps_line must be >= eps_match")

    @classmethod
    def for_scale(cls, r: float, rel: float = 1e-6) -> "ToleranceModel":
        """Defaults relative to a packing radius ``r``."""
        eps = rel * r
        return cls(eps_match=eps, eps_shell=max(rel * min(1.0, r), eps), eps_line=10 * eps)

    @classmethod
    def from_points(cls, points, rel: float = 1e-6) -> "ToleranceModel":
        """Defaults from the median nearest-neighbour distance.

        The median rather than the minimum keeps near-duplicate pairs (which
        deduplication is about to remove) from shrinking the scale.
        """
        pts = _as_points(points)
        if len(pts) < 2:
            return cls()
        d, _ = cKDTree(pts).query(pts, k=2)
        scale = float(np.median(d[:, 1])) / 2
        if scale <= 0:
            scale = 1.0
        return cls.for_scale(scale, rel)

    def to_dict(self) -> dict:
        return {"eps_match": self.eps_match, "eps_shell": self.eps_shell, "eps_line": self.eps_line}


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box ``[lo, hi]``."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float).reshape(3))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float).reshape(3))

    @classmethod
    def around(cls, points: np.ndarray) -> "Box":
        return cls(points.min(axis=0), points.max(axis=0))

    @property
    def extent(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def is_empty(self) -> bool:
        return bool(np.any(self.hi < self.lo))

    def eroded(self, margin: float) -> "Box":
        return Box(self.lo + margin, self.hi - margin)

    def contains(self, pts, pad: float = 0.0) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return np.all((pts >= self.lo - pad) & (pts <= self.hi + pad), axis=-1)

    def contains_box(self, other: "Box", pad: float = 0.0) -> bool:
        return bool(np.all(other.lo >= self.lo - pad) and np.all(other.hi <= self.hi + pad))

    def contains_ball(self, center, radius: float, pad: float = 0.0) -> bool:
        c = np.asarray(center, dtype=float)
        return bool(np.all(c - radius >= self.lo - pad) and np.all(c + radius <= self.hi + pad))

    def max_erosion(self) -> float:
        """Largest margin that still leaves a nonempty box."""
        return float(self.extent.min() / 2)

    def to_dict(self) -> dict:
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1 and pts.size == 3:
        pts = pts.reshape(1, 3)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise PointSetError(f"expected an (N, 3) array of points, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise PointSetError("point coordinates must be finite")
    return pts


def lexicographic_order(pts: np.ndarray) -> np.ndarray:
    """Indices sorting rows by (x, y, z)."""
    return np.lexsort((pts[:, 2], pts[:, 1], pts[:, 0]))


@dataclass(frozen=True, eq=False)
class PointSet:
    """Immutable boxed point sample in canonical (lexicographic) order."""

    points: np.ndarray
    bbox: Box
    window: Box
    tol: ToleranceModel = field(default_factory=ToleranceModel)

    def __post_init__(self):
        self.points.setflags(write=False)

    def __len__(self) -> int:
        return len(self.points)

    @cached_property
    def tree(self) -> cKDTree:
        return cKDTree(self.points)

    @cached_property
    def window_mask(self) -> np.ndarray:
        m = self.window.contains(self.points)
        m.setflags(write=False)
        return m

    @property
    def window_indices(self) -> np.ndarray:
        return np.flatnonzero(self.window_mask)

    def with_window(self, window: Box) -> "PointSet":
        if window.is_empty:
            raise PointSetError("window is empty")
        if not self.bbox.contains_box(window):
            raise PointSetError("window must lie inside bbox")
        ps = PointSet(self.points, self.bbox, window, self.tol)
        if "tree" in self.__dict__:
            ps.__dict__["tree"] = self.tree
        return ps

    def with_margin(self, margin: float) -> "PointSet":
        return self.with_window(_eroded_window(self.bbox, margin))

    def within(self, center, radius: float) -> np.ndarray:
        """Indices of points with ``|p - center| <= radius``, unsorted."""
        return np.asarray(self.tree.query_ball_point(np.asarray(center, float), radius), dtype=np.intp)


def _eroded_window(bbox: Box, margin: float) -> Box:
    if margin < 0:
        raise PointSetError("window margin must be >= 0")
    window = bbox.eroded(margin)
    if window.is_empty:
        raise PointSetError(
            f"window margin {margin:g} empties the window; margin must be <= "
            f"{bbox.max_erosion():g} for bbox extent {bbox.extent.tolist()} "
            f"(or the box must be at least {2 * margin:g} wide on every axis)"
        )
    return window


def build_point_set(points, window_margin: float = 0.0, tol: ToleranceModel | None = None,
                    bbox: Box | None = None) -> PointSet:
    """Deduplicate, canonically order and box a list of points.

    Points closer than ``2 * tol.eps_match`` are merged, keeping the
    lexicographically first.  ``bbox`` defaults to the tight bounding box of
    the points; the window is ``bbox`` eroded by ``window_margin``.
    """
    pts = _as_points(points)
    if len(pts) == 0:
        raise PointSetError("point list is empty")
    if tol is None:
        tol = ToleranceModel.from_points(pts)
    pts = pts[lexicographic_order(pts)]
    pts = _deduplicate(pts, 2 * tol.eps_match)
    if bbox is None:
        bbox = Box.around(pts)
    elif not np.all(bbox.contains(pts, pad=tol.eps_match)):
        raise PointSetError("points outside the supplied bbox")
    window = _eroded_window(bbox, window_margin)
    return PointSet(np.ascontiguousarray(pts), bbox, window, tol)


def _deduplicate(pts: np.ndarray, radius: float) -> np.ndarray:
    # pts is lexicographically sorted; within each group of near-coincident
    # points keep the lowest index.
    pairs = cKDTree(pts).query_pairs(radius, output_type="ndarray")
    if len(pairs) == 0:
        return pts
    parent = np.arange(len(pts))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in pairs:
        a, b = find(i), find(j)
        if a != b:
            parent[max(a, b)] = min(a, b)
    roots = np.array([find(i) for i in range(len(pts))])
    return pts[roots == np.arange(len(pts))]


# -- clusters and shells -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Cluster:
    """Points of a set within ``radius`` of one of its points.

    ``members`` index into the host set, ordered by (shell, x, y, z); the
    center comes first.  ``positions`` and ``distances`` follow the same
    order and ``shell_ids`` labels each member's distance shell (0 is the
    center).
    """

    center_index: int
    center: np.ndarray
    radius: float
    members: np.ndarray
    positions: np.ndarray
    distances: np.ndarray
    shell_ids: np.ndarray
    tol: ToleranceModel

    def __len__(self) -> int:
        return len(self.members)

    @property
    def offsets(self) -> np.ndarray:
        return self.positions - self.center

    def rank(self) -> int:
        """Affine rank of the member positions about the center."""
        off = self.offsets
        if len(off) < 2:
            return 0
        s = np.linalg.svd(off, compute_uv=False)
        return int(np.sum(s > self.tol.eps_line))


def group_distances(d: np.ndarray, width: float) -> np.ndarray:
    """Label sorted-or-not distances with shell ids, merging gaps <= width.

    Labels are ranks of the shells by increasing distance, starting at 0.
    """
    order = np.argsort(d, kind="stable")
    ds = d[order]
    new = np.empty(len(ds), dtype=bool)
    if len(ds):
        new[0] = False
        new[1:] = np.diff(ds) > width
    labels = np.empty(len(d), dtype=np.intp)
    labels[order] = np.cumsum(new)
    return labels


def canonical_order(d: np.ndarray, pts: np.ndarray, width: float) -> tuple[np.ndarray, np.ndarray]:
    """Order by (distance shell, lexicographic coordinates).

    Returns the permutation and the shell labels (in original order).
    """
    labels = group_distances(d, width)
    order = np.lexsort((pts[:, 2], pts[:, 1], pts[:, 0], labels))
    return order, labels


def cluster_at(pset: PointSet, center_index: int, rho: float) -> Cluster:
    """The cluster of radius ``rho`` about point ``center_index``.

    Includes every point within ``rho + eps_match`` of the center.
    """
    if not 0 <= center_index < len(pset):
        raise IndexError(f"center index {center_index} out of range for {len(pset)} points")
    if rho < 0:
        raise PointSetError("cluster radius must be >= 0")
    tol = pset.tol
    c = pset.points[center_index]
    idx = pset.within(c, rho + tol.eps_match)
    pos = pset.points[idx]
    d = np.linalg.norm(pos - c, axis=1)
    # The center must sort first even when another point is within eps_shell.
    d[idx == center_index] = -np.inf
    order, labels = canonical_order(d, pos, tol.eps_shell)
    d[idx == center_index] = 0.0
    idx, pos, d = idx[order], pos[order], d[order]
    labels = labels[order]
    return Cluster(int(center_index), c.copy(), float(rho), idx, pos, d, labels, tol)


@dataclass(frozen=True, eq=False)
class Shell:
    radius: float
    members: np.ndarray


def shells_of(cluster: Cluster) -> list[Shell]:
    """Non-center members grouped by distance, innermost first."""
    shells = []
    for sid in np.unique(cluster.shell_ids):
        if sid == 0:
            continue
        sel = cluster.shell_ids == sid
        shells.append(Shell(float(cluster.distances[sel].mean()), cluster.members[sel]))
    return shells


def point_line_distance(p, anchor, direction) -> np.ndarray | float:
    """Distance from ``p`` (one point or an array of them) to a line."""
    u = np.asarray(direction, dtype=float)
    n = np.linalg.norm(u)
    if n == 0:
        raise PointSetError("line direction is the zero vector")
    u = u / n
    v = np.asarray(p, dtype=float) - np.asarray(anchor, dtype=float)
    perp = v - np.multiply.outer(v @ u, u)
    out = np.linalg.norm(perp, axis=-1)
    return float(out) if out.ndim == 0 else out
