"""Proper rotation axes of a cluster about its center.

Every rotation fixing the center permutes each distance shell, so a finite
list of candidate directions can be read off a single shell: directions to
the shell points, sums of pairs, and normals of triples.  Each candidate is
then verified by rotating the whole cluster and requiring a one-to-one match
of member positions within ``eps_match``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .pointset import BoundaryError, Cluster, PointSet, cluster_at

DEDUP_ANGLE = 1e-8
_ZERO_COMPONENT = 1e-9


class RankDeficientError(ValueError):
    """The cluster does not span 3D space, so its rotation group is infinite."""


class SymmetryError(RuntimeError):
    """An internal consistency check on a detected group failed."""


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # np.cross carries enough per-call overhead to dominate small inputs.
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
    return np.stack([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0], axis=-1)


def canonical_direction(u) -> np.ndarray:
    """Unit vector with its first non-negligible component positive."""
    u = np.asarray(u, dtype=float)
    u = u / np.linalg.norm(u)
    for c in u:
        if abs(c) > _ZERO_COMPONENT:
            # Adding 0.0 clears negative zeros from the output.
            return (u if c > 0 else -u) + 0.0
    return u + 0.0


def _canonical_rows(U: np.ndarray) -> np.ndarray:
    U = U / np.linalg.norm(U, axis=1, keepdims=True)
    big = np.abs(U) > _ZERO_COMPONENT
    first = np.argmax(big, axis=1)
    sign = np.sign(U[np.arange(len(U)), first])
    sign[sign == 0] = 1.0
    return U * sign[:, None] + 0.0


def rotation_matrix(direction, angle: float) -> np.ndarray:
    """Right-handed rotation by ``angle`` about ``direction``."""
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    x, y, z = u
    c, s = math.cos(angle), math.sin(angle)
    C = 1 - c
    return np.array([
        [c + x * x * C, x * y * C - z * s, x * z * C + y * s],
        [y * x * C + z * s, c + y * y * C, y * z * C - x * s],
        [z * x * C - y * s, z * y * C + x * s, c + z * z * C],
    ])


@dataclass(frozen=True, eq=False)
class Axis:
    direction: np.ndarray
    order: int

    def __post_init__(self):
        object.__setattr__(self, "direction", canonical_direction(self.direction))
        if self.order < 2:
            raise ValueError("an axis has order >= 2")

    def to_dict(self) -> dict:
        return {"dir": self.direction.tolist(), "order": self.order}


@dataclass(frozen=True, eq=False)
class LocalGroupInfo:
    center_index: int
    axes: tuple
    n_max: int
    principal_axis: Axis | None

    def orders(self) -> list[int]:
        return [a.order for a in self.axes]

    def has_order(self, n: int) -> bool:
        return any(a.order == n for a in self.axes)


@dataclass(frozen=True)
class Membership:
    in_X6: bool
    in_K: bool
    in_Y: bool


# -- matching ------------------------------------------------------------------

def bijective_match(images: np.ndarray, targets: np.ndarray, eps: float,
                    tree: cKDTree | None = None) -> bool:
    """True if every image can be paired with a distinct target within ``eps``."""
    if len(images) != len(targets):
        return False
    if tree is None:
        tree = cKDTree(targets)
    d, j = tree.query(images, distance_upper_bound=eps)
    if not np.all(np.isfinite(d)):
        return False
    if len(np.unique(j)) == len(j):
        return True
    # Nearest targets collide: greedy over all close pairs, then optimal.
    D = cdist(images, targets)
    rows, cols = np.nonzero(D <= eps)
    order = np.argsort(D[rows, cols], kind="stable")
    used_r, used_c = set(), set()
    for k in order:
        a, b = rows[k], cols[k]
        if a not in used_r and b not in used_c:
            used_r.add(a)
            used_c.add(b)
    if len(used_r) == len(images):
        return True
    cost = np.where(D <= eps, D, 1e6 * (1 + D))
    ri, ci = linear_sum_assignment(cost)
    return bool(np.all(D[ri, ci] <= eps))


def is_rotation_symmetry(cluster: Cluster, direction, angle: float, tree: cKDTree | None = None) -> bool:
    off = cluster.offsets
    Rm = rotation_matrix(direction, angle)
    return bijective_match(off @ Rm.T, off, cluster.tol.eps_match, tree)


# -- candidates ------------------------------------------------------------------

def _shell_groups(cluster: Cluster) -> list[np.ndarray]:
    off = cluster.offsets
    ids = cluster.shell_ids
    return [off[ids == s] for s in np.unique(ids) if s != 0]


def _is_collinear(P: np.ndarray, eps: float) -> bool:
    if len(P) < 2:
        return True
    return np.linalg.svd(P, compute_uv=False)[1] <= eps


@lru_cache(maxsize=None)
def _triples(k: int) -> np.ndarray:
    t = np.array(list(combinations(range(k), 3)), dtype=np.intp)
    t.setflags(write=False)
    return t


def shell_candidates(P: np.ndarray, eps_line: float) -> np.ndarray:
    """Axis-direction candidates from one shell (offset vectors ``P``)."""
    out = [P]
    k = len(P)
    if k >= 2:
        i, j = np.triu_indices(k, 1)
        S = P[i] + P[j]
        out.append(S[np.linalg.norm(S, axis=1) > eps_line])
    if k >= 3:
        t = _triples(k)
        a, b, c = P[t[:, 0]], P[t[:, 1]], P[t[:, 2]]
        ab, ac = b - a, c - a
        N = _cross(ab, ac)
        nn = np.einsum("ij,ij->i", N, N)
        ok = nn > eps_line ** 2 * np.einsum("ij,ij->i", ab, ab)
        a, ab, ac, N, nn = a[ok], ab[ok], ac[ok], N[ok], nn[ok]
        # Circumcenter of each triple; its axis must pass through the center.
        cc = a + (_cross(N, ab) * np.einsum("ij,ij->i", ac, ac)[:, None]
                  + _cross(ac, N) * np.einsum("ij,ij->i", ab, ab)[:, None]) / (2 * nn[:, None])
        n_hat = N / np.sqrt(nn)[:, None]
        miss = cc - np.einsum("ij,ij->i", cc, n_hat)[:, None] * n_hat
        out.append(N[np.linalg.norm(miss, axis=1) <= eps_line])
    C = np.concatenate(out)
    return C[np.linalg.norm(C, axis=1) > eps_line]


def _rough_unique(U: np.ndarray) -> np.ndarray:
    if len(U) == 0:
        return U.reshape(0, 3)
    U = _canonical_rows(U)
    _, keep = np.unique(np.round(U * 1e7), axis=0, return_index=True)
    return U[np.sort(keep)]


def candidate_axes(cluster: Cluster) -> np.ndarray:
    """Unit directions guaranteed to include every rotation axis of the cluster.

    Built from the shell with fewest points (innermost on ties).  If that
    shell is an antipodal pair it cannot pin down two-fold axes
    perpendicular to it, so the smallest non-collinear shell is added.
    """
    tol = cluster.tol
    if cluster.rank() < 3:
        raise RankDeficientError(
            f"cluster at point {cluster.center_index} (radius {cluster.radius:g}) is not full-dimensional")
    shells = _shell_groups(cluster)
    order = sorted(range(len(shells)), key=lambda s: (len(shells[s]), s))
    star = shells[order[0]]
    chosen = [star]
    if len(star) == 2 and _is_collinear(star, tol.eps_line):
        # An antipodal pair also admits two-fold axes perpendicular to it.
        flat = next((shells[s] for s in order if not _is_collinear(shells[s], tol.eps_line)), None)
        if flat is not None:
            chosen.append(flat)
        else:
            # Every shell is a pair or a single point; the first one off the
            # pair's line fixes the perpendicular axis up to these choices.
            p = star[0]
            q = next(P[0] for P in shells if np.linalg.norm(_cross(p[None], P[:1])) > tol.eps_line * np.linalg.norm(P[0]))
            chosen.append(np.array([q, _cross(p[None], q[None])[0]]))
    return _rough_unique(np.concatenate([shell_candidates(P, tol.eps_line) for P in chosen]))


# -- axis order ----------------------------------------------------------------

def axis_order(cluster: Cluster, direction) -> int:
    """Order of the largest cyclic rotation group about ``direction``.

    Returns 1 when only the identity maps the cluster onto itself.
    """
    u = np.asarray(direction, dtype=float).reshape(1, 3)
    return int(_axis_orders(cluster, u / np.linalg.norm(u))[0])


def _rotation_matrices(U: np.ndarray, angles: np.ndarray) -> np.ndarray:
    x, y, z = U[:, 0], U[:, 1], U[:, 2]
    c, s = np.cos(angles), np.sin(angles)
    C = 1 - c
    return np.stack([
        np.stack([c + x * x * C, x * y * C - z * s, x * z * C + y * s], -1),
        np.stack([y * x * C + z * s, c + y * y * C, y * z * C - x * s], -1),
        np.stack([z * x * C - y * s, z * y * C + x * s, c + z * z * C], -1),
    ], 1)


def _verify_batch(cluster: Cluster, U: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Which rotations by 2*pi/n about the rows of U are cluster symmetries."""
    off = cluster.offsets
    eps = cluster.tol.eps_match
    Rs = _rotation_matrices(U, 2 * np.pi / n)
    img = np.einsum("cij,nj->cni", Rs, off)
    sq = np.einsum("ij,ij->i", off, off)
    D2 = sq[None, :, None] + sq[None, None, :] - 2 * np.einsum("cni,mi->cnm", img, off)
    # D2 only ranks targets: it cancels badly when eps is tiny next to |x|^2.
    # Members are at least 2 eps apart, so the nearest target is the only
    # candidate and its distance is recomputed exactly.
    j = np.argmin(D2, axis=2)
    diff = img - off[j]
    close = np.einsum("cni,cni->cn", diff, diff) <= eps * eps
    perm = np.all(np.diff(np.sort(j, axis=1), axis=1) > 0, axis=1)
    ok = np.all(close, axis=1) & perm
    # Near-coincident targets (only possible with hand-built tolerances).
    for c in np.flatnonzero(np.all(close, axis=1) & ~perm):
        ok[c] = bijective_match(img[c], off, eps)
    return ok


def _axis_orders(cluster: Cluster, U: np.ndarray) -> np.ndarray:
    # The member farthest from the axis and the members sharing its height
    # and axial radius give the only possible rotation angles; the smallest
    # one that verifies generates the cyclic group.
    tol = cluster.tol
    off = cluster.offsets
    H = off @ U.T
    rho = np.sqrt(np.maximum(np.einsum("ij,ij->i", off, off)[:, None] - H * H, 0.0))
    cols = np.arange(U.shape[0])
    p = np.argmax(rho, axis=0)
    rho_p, h_p = rho[p, cols], H[p, cols]
    if np.any(rho_p <= tol.eps_line):
        raise RankDeficientError("every cluster member lies on the axis")
    same = (np.abs(rho - rho_p) <= tol.eps_match) & (np.abs(H - h_p) <= tol.eps_match)
    same[p, cols] = False
    orders = np.ones(U.shape[0], dtype=int)
    todo = np.flatnonzero(same.any(axis=0))
    if len(todo) == 0:
        return orders
    cap = int(np.bincount(cluster.shell_ids).max())
    two_pi = 2 * np.pi
    RP = off[p[todo]] - h_p[todo][:, None] * U[todo]
    W = _cross(U[todo], RP)
    theta = np.mod(np.arctan2(off @ W.T, off @ RP.T), two_pi)
    valid = same[:, todo] & (theta > 0)
    with np.errstate(divide="ignore"):
        nmat = np.rint(np.where(valid, two_pi / np.where(valid, theta, 1.0), 0.0)).astype(int)
        slack = np.abs(theta - two_pi / np.maximum(nmat, 1)) * rho_p[todo]
    valid &= (nmat >= 2) & (nmat <= cap) & (slack <= 2 * tol.eps_match)
    queue: dict[int, list[int]] = {}
    for k, c in enumerate(todo):
        ns = set(nmat[valid[:, k], k].tolist())
        if ns:
            # Larger n means a smaller angle: try those first.
            queue[int(c)] = sorted(ns, reverse=True)
    while queue:
        cs = np.fromiter(queue, dtype=np.intp)
        ns = np.array([queue[c][0] for c in cs])
        ok = _verify_batch(cluster, U[cs], ns.astype(float))
        for c, n, good in zip(cs, ns, ok):
            rest = queue.pop(c)[1:]
            if good:
                orders[c] = n
            elif rest:
                queue[c] = rest
    return orders


def _dedup_axes(axes: list[Axis]) -> list[Axis]:
    if len(axes) < 2:
        return list(axes)
    D = np.array([a.direction for a in axes])
    sin = np.linalg.norm(_cross(D[:, None, :], D[None, :, :]), axis=-1)
    kept: list[int] = []
    for i in range(len(axes)):
        dup = [k for k in kept if sin[i, k] < DEDUP_ANGLE]
        if not dup:
            kept.append(i)
        elif axes[i].order > axes[dup[0]].order:
            kept[kept.index(dup[0])] = i
    return [axes[i] for i in kept]


def _sort_axes(axes: list[Axis]) -> list[Axis]:
    return sorted(axes, key=lambda a: (-a.order, *(-a.direction)))


def detect_axes(cluster: Cluster) -> list[Axis]:
    """All rotation axes of order >= 2, highest order first."""
    U = candidate_axes(cluster)
    orders = _axis_orders(cluster, U)
    found = [Axis(u, int(n)) for u, n in zip(U, orders) if n >= 2]
    return _sort_axes(_dedup_axes(found))


def brute_force_axes(cluster: Cluster) -> list[Axis]:
    """Oracle: candidates from every shell, orders by trying each n directly."""
    tol = cluster.tol
    if cluster.rank() < 3:
        raise RankDeficientError("cluster is not full-dimensional")
    shells = _shell_groups(cluster)
    cap = max(len(P) for P in shells)
    cands = _rough_unique(np.concatenate([shell_candidates(P, tol.eps_line) for P in shells]))
    tree = cKDTree(cluster.offsets)
    found = []
    for u in cands:
        for n in range(cap, 1, -1):
            if is_rotation_symmetry(cluster, u, 2 * np.pi / n, tree):
                found.append(Axis(u, n))
                break
    return _sort_axes(_dedup_axes(found))


def group_info(cluster: Cluster) -> LocalGroupInfo:
    axes = detect_axes(cluster)
    n_max = axes[0].order if axes else 1
    top = [a for a in axes if a.order == n_max]
    if n_max >= 7 and len(top) != 1:
        raise SymmetryError(
            f"point {cluster.center_index}: {len(top)} axes of order {n_max}; "
            "a finite rotation group has at most one axis of order above 5")
    principal = max(top, key=lambda a: tuple(a.direction)) if top else None
    return LocalGroupInfo(cluster.center_index, tuple(axes), n_max, principal)


def local_group(pset: PointSet, center_index: int, R: float) -> LocalGroupInfo:
    """Rotation axes of the 2R-cluster at a point.

    ``R`` is the covering radius to use; pass a certified upper bound so the
    cluster is never smaller than the true 2R-ball.
    """
    rho = 2 * R
    c = pset.points[center_index]
    if not pset.bbox.contains_ball(c, rho, pad=pset.tol.eps_match):
        raise BoundaryError(f"2R-ball of point {center_index} leaves the sampled box")
    return group_info(cluster_at(pset, center_index, rho))


def classify_point(info: LocalGroupInfo) -> Membership:
    five = info.has_order(5)
    x6 = info.n_max <= 6
    return Membership(in_X6=x6, in_K=x6 and not five, in_Y=not five)


def point_record(info: LocalGroupInfo, flags: Membership | None = None) -> dict:
    flags = flags or classify_point(info)
    return {
        "index": info.center_index,
        "n_max": info.n_max,
        "axes": [a.to_dict() for a in info.axes],
        "in_X6": flags.in_X6,
        "in_K": flags.in_K,
        "in_Y": flags.in_Y,
    }
