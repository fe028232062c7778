"""Off-axial chains and the geometric decay of their links.

From a point whose local group has a principal axis, the next chain point is
the nearest sample point off that axis.  While every point visited has an
axis of order seven or more, consecutive links shrink by at least
``2 sin(pi/7) < 0.87``, so the walk must reach a point with ``n_max <= 6``
within ``log(R/r) / log(1/0.87)`` steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .delone import EmptySubsetError
from .pointset import BoundaryError, PointSet, point_line_distance
from .symmetry import LocalGroupInfo, local_group

DECAY = 0.87
CHAIN_SPAN = 15.4   # |x_1, x_m| < 15.4 R
SUBSET_BOUND = 16.4  # d(z, X6) <= R + 15.4 R

TERMINATED = "terminated_in_X6"
TRUNCATED = "truncated_at_boundary"
VIOLATED = "bound_violated"


class ChainError(ValueError):
    pass


def chain_length_bound(r: float, R: float) -> float:
    """Upper bound on the number of chain points before reaching X6."""
    return math.log(R / r) / math.log(1 / DECAY)


def default_max_steps(r: float, R: float) -> int:
    return math.ceil(chain_length_bound(r, R)) + 2


@dataclass
class Chain:
    indices: list
    link_lengths: list
    status: str
    M_bound: float
    orders: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.link_lengths) != max(0, len(self.indices) - 1):
            raise ChainError("a chain of m points has m - 1 links")

    @property
    def m(self) -> int:
        return len(self.indices)

    def to_record(self, decay: "DecayReport | None" = None) -> dict:
        return {
            "start": self.indices[0],
            "indices": list(self.indices),
            "link_lengths": list(self.link_lengths),
            "decay_ok": None if decay is None else decay.ok,
            "status": self.status,
            "M_bound": self.M_bound,
        }


class GroupCache:
    """Local groups of a set, computed on first request and kept."""

    def __init__(self, pset: PointSet, R: float, known: dict | None = None):
        self.pset = pset
        self.R = R
        self._infos: dict[int, LocalGroupInfo] = dict(known or {})

    def __call__(self, index: int) -> LocalGroupInfo:
        info = self._infos.get(index)
        if info is None:
            info = local_group(self.pset, index, self.R)
            self._infos[index] = info
        return info


def _nearest_where(pset: PointSet, current: int, accept) -> int:
    x = pset.points[current]
    n = len(pset)
    k = min(n, 16)
    eps = pset.tol.eps_shell
    while True:
        d, j = pset.tree.query(x, k=k)
        d, j = np.atleast_1d(d), np.atleast_1d(j)
        keep = (j != current) & (j < n)
        d, j = d[keep], j[keep]
        ok = accept(pset.points[j]) if len(j) else np.zeros(0, bool)
        if np.any(ok):
            dmin = d[ok].min()
            # Only decide once every point tied with the best has been seen.
            if k == n or d[-1] > dmin + eps:
                tied = j[ok & (d <= dmin + eps)]
                pts = pset.points[tied]
                return int(tied[np.lexsort((pts[:, 2], pts[:, 1], pts[:, 0]))[0]])
        if k == n:
            raise BoundaryError(f"no admissible next chain point for point {current} in the sample")
        k = min(n, 2 * k)


def next_chain_point(pset: PointSet, current: int, info: LocalGroupInfo) -> int:
    """Nearest point off the principal axis (any nearest point if there is none).

    Ties within ``eps_shell`` go to the lexicographically smallest point.
    """
    if info.n_max >= 2:
        x = pset.points[current]
        u = info.principal_axis.direction
        eps_line = pset.tol.eps_line
        return _nearest_where(pset, current, lambda q: point_line_distance(q, x, u) > eps_line)
    return _nearest_where(pset, current, lambda q: np.ones(len(q), bool))


def build_chain(pset: PointSet, start: int, R: float, r: float, max_steps: int | None = None,
                groups: GroupCache | None = None) -> Chain:
    """Walk the off-axial chain from ``start`` until it enters X6.

    ``R`` is the covering radius used for 2R-clusters (pass an upper bound)
    and, with ``r``, fixes the length bound recorded on the chain.  The walk
    stops as truncated when a point's 2R-ball leaves the sample, and as
    bound-violating after ``max_steps`` links.
    """
    if not 0 <= start < len(pset):
        raise IndexError(f"start index {start} out of range")
    M = chain_length_bound(r, R)
    if max_steps is None:
        max_steps = math.ceil(M) + 2
    groups = groups or GroupCache(pset, R)
    indices, links, orders = [start], [], []
    try:
        info = groups(start)
    except BoundaryError:
        return Chain(indices, links, TRUNCATED, M, orders)
    orders.append(info.n_max)
    status = TERMINATED
    while info.n_max >= 7:
        if len(links) >= max_steps:
            status = VIOLATED
            break
        try:
            nxt = next_chain_point(pset, indices[-1], info)
        except BoundaryError:
            status = TRUNCATED
            break
        links.append(float(np.linalg.norm(pset.points[nxt] - pset.points[indices[-1]])))
        indices.append(nxt)
        try:
            info = groups(nxt)
        except BoundaryError:
            status = TRUNCATED
            break
        orders.append(info.n_max)
    return Chain(indices, links, status, M, orders)


@dataclass
class DecayReport:
    link_ok: list     # r*_i < 0.87^(i-1) * 2R
    ratio_ok: list    # r*_{i+1} < 0.87 * r*_i
    total_length: float
    span: float
    total_ok: bool    # sum of links < 15.4 R
    span_ok: bool     # |x_1, x_m| < 15.4 R

    @property
    def ok(self) -> bool:
        return all(self.link_ok) and all(self.ratio_ok) and self.total_ok and self.span_ok

    def to_dict(self) -> dict:
        return {"link_ok": self.link_ok, "ratio_ok": self.ratio_ok, "total_length": self.total_length,
                "span": self.span, "total_ok": self.total_ok, "span_ok": self.span_ok, "ok": self.ok}


def verify_decay(chain: Chain, R: float, positions: np.ndarray | None = None) -> DecayReport:
    """Check the link inequalities of a chain that ran through high-order points.

    ``R`` should be a lower bound on the covering radius so a pass is never
    an artefact of estimator error.  ``positions`` (the host points) lets
    the end-to-end span be measured; otherwise the link sum stands in.
    """
    if chain.status != TERMINATED or not chain.link_lengths:
        raise ChainError("only terminated chains with at least one link are eligible")
    if chain.orders and any(n <= 6 for n in chain.orders[:-1]):
        raise ChainError("chain passes through an X6 point before its end")
    r = chain.link_lengths
    link_ok = [bool(ri < DECAY ** i * 2 * R) for i, ri in enumerate(r)]
    ratio_ok = [bool(r[i + 1] < DECAY * r[i]) for i in range(len(r) - 1)]
    total = float(sum(r))
    if positions is not None:
        span = float(np.linalg.norm(positions[chain.indices[-1]] - positions[chain.indices[0]]))
    else:
        span = total
    return DecayReport(link_ok, ratio_ok, total, span, total < CHAIN_SPAN * R, span < CHAIN_SPAN * R)


def nearest_set_distance_bound(pset: PointSet, z, subset_mask, R: float) -> tuple[float, bool]:
    """Distance from ``z`` to the masked subset, and whether it is <= 16.4 R."""
    d = float(subset_distances(pset, np.asarray(z, float).reshape(1, 3), subset_mask)[0])
    return d, d <= SUBSET_BOUND * R


def subset_distances(pset: PointSet, Z: np.ndarray, subset_mask) -> np.ndarray:
    mask = np.asarray(subset_mask, dtype=bool)
    if not np.any(mask):
        raise EmptySubsetError("X6 has no points in range; this would contradict the subset bound")
    d, _ = cKDTree(pset.points[mask]).query(np.asarray(Z, float).reshape(-1, 3))
    return d
