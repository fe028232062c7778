"""Shared test fixtures that are plain functions rather than pytest fixtures."""

import numpy as np

from delone6 import build_point_set, cluster_at
from delone6.generators import PHI
from delone6.pointset import ToleranceModel
from delone6.symmetry import rotation_matrix

# One line per acceptance criterion, printed in the pytest terminal summary.
ACCEPTANCE_LINES: list[str] = []


def make_cluster(points, rho=None, eps=1e-9):
    """Cluster about the origin of ``points`` (the origin is added)."""
    pts = np.vstack([np.zeros((1, 3)), np.asarray(points, float)])
    pset = build_point_set(pts, tol=ToleranceModel(eps, eps, 10 * eps))
    i = int(pset.tree.query(np.zeros(3))[1])
    if rho is None:
        rho = float(np.linalg.norm(pts, axis=1).max()) + 1e-6
    return cluster_at(pset, i, rho)


def heptagon_with_poles(radius=1.0, pole=1.3):
    t = 2 * np.pi * np.arange(7) / 7
    ring = np.column_stack([radius * np.cos(t), radius * np.sin(t), np.zeros(7)])
    poles = np.array([[0, 0, pole], [0, 0, -pole]])
    return np.vstack([ring, poles])


def close_group(generators, limit=200):
    """All products of the generator matrices (a finite rotation group)."""
    group = [np.eye(3)]
    frontier = [np.eye(3)]
    while frontier:
        nxt = []
        for g in frontier:
            for h in generators:
                m = h @ g
                if not any(np.allclose(m, q, atol=1e-9) for q in group):
                    group.append(m)
                    nxt.append(m)
        frontier = nxt
        if len(group) > limit:
            raise ValueError("group does not close")
    return np.array(group)


def point_group(name, n=None):
    z = np.array([0.0, 0.0, 1.0])
    if name == "C":
        return close_group([rotation_matrix(z, 2 * np.pi / n)])
    if name == "D":
        return close_group([rotation_matrix(z, 2 * np.pi / n), rotation_matrix([1, 0, 0], np.pi)])
    if name == "T":
        return close_group([rotation_matrix([1, 1, 1], 2 * np.pi / 3), rotation_matrix(z, np.pi)])
    if name == "O":
        return close_group([rotation_matrix(z, np.pi / 2), rotation_matrix([1, 1, 1], 2 * np.pi / 3)])
    if name == "I":
        return close_group([rotation_matrix([0, 1, PHI], 2 * np.pi / 5), rotation_matrix(z, np.pi)])
    raise ValueError(name)


def orbit(group, p):
    pts = group @ np.asarray(p, float)
    keep = []
    for q in pts:
        if not any(np.linalg.norm(q - k) < 1e-9 for k in keep):
            keep.append(q)
    return np.array(keep)


def random_rotation(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    a, b, c, d = q
    return np.array([
        [a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)],
        [2 * (b * c + a * d), a * a - b * b + c * c - d * d, 2 * (c * d - a * b)],
        [2 * (b * d - a * c), 2 * (c * d + a * b), a * a - b * b - c * c + d * d],
    ])


def axes_match(found, expected, tol=1e-8):
    """Same number of axes, pairwise parallel within ``tol`` and equal orders."""
    if len(found) != len(expected):
        return False
    used = set()
    for a in found:
        hit = None
        for j, b in enumerate(expected):
            if j in used or a.order != b.order:
                continue
            if np.linalg.norm(np.cross(a.direction, b.direction)) <= tol:
                hit = j
                break
        if hit is None:
            return False
        used.add(hit)
    return True
