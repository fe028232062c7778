"""Point samples with known structure: lattices, perturbed lattices,
an icosahedral quasicrystal and a column with a seven-fold axis point.

Every generator returns a :class:`Sample` wrapping a :class:`PointSet`
together with whatever is known analytically about it.
"""

from __future__ import annotations

import configparser
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .io import read_points
from .pointset import Box, PointSet, ToleranceModel, build_point_set

KINDS = ("cubic", "bcc", "fcc", "hexagonal", "perturbed", "cut_project_icosahedral",
         "heptagonal_column", "custom_file")

PHI = (1 + math.sqrt(5)) / 2

# Free parameters tried, in order, by the heptagonal column search:
# (radial spacing of the rings, gap between column and filler, rings).
_HEPTAGONAL_TRIALS = [(1.0, g, k) for k in (3, 4) for g in (0.7, 0.75, 0.8, 0.65, 0.85, 0.6)]


class SpecError(ValueError):
    """A generator spec is malformed; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class GeneratorSpec:
    kind: str
    extent: tuple = (20.0, 20.0, 20.0)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError("kind", f"unknown generator kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        ext = tuple(float(e) for e in np.broadcast_to(np.asarray(self.extent, float), (3,)))
        if not all(e > 0 for e in ext):
            raise SpecError("extent", "every box dimension must be positive")
        self.extent = ext

    def param(self, key: str, default=None, kind=float):
        if key not in self.params:
            return default
        value = self.params[key]
        try:
            return kind(value)
        except (TypeError, ValueError):
            raise SpecError(key, f"cannot interpret {value!r} as {kind.__name__}") from None

    @classmethod
    def from_file(cls, path) -> "GeneratorSpec":
        """Read an INI-style spec.

        ``[generator]`` holds ``kind`` and ``extent`` (one or three numbers),
        ``[params]`` the kind-specific keys.
        """
        cp = configparser.ConfigParser()
        try:
            if not cp.read(path):
                raise SpecError("file", f"cannot read spec file {path}")
        except configparser.Error as exc:
            raise SpecError("file", f"malformed spec file: {exc}") from None
        if not cp.has_section("generator"):
            raise SpecError("generator", "missing [generator] section")
        gen = cp["generator"]
        if "kind" not in gen:
            raise SpecError("kind", "missing generator kind")
        extent = gen.get("extent", "20")
        try:
            ext = [float(v) for v in extent.replace(",", " ").split()]
        except ValueError:
            raise SpecError("extent", f"cannot parse {extent!r}") from None
        if len(ext) not in (1, 3):
            raise SpecError("extent", "give one or three numbers")
        params = dict(cp["params"]) if cp.has_section("params") else {}
        return cls(gen["kind"].strip(), tuple(ext * 3 if len(ext) == 1 else ext), params)


@dataclass(eq=False)
class Sample:
    pset: PointSet
    kind: str
    r_analytic: float | None = None
    R_analytic: float | None = None
    info: dict = field(default_factory=dict)


# -- lattices -------------------------------------------------------------------

def _lattice_frame(kind: str, a: float, c: float):
    """(basis rows, motif, r, R) of a lattice kind."""
    I = np.eye(3)
    if kind == "cubic":
        return a * I, np.zeros((1, 3)), a / 2, a * math.sqrt(3) / 2
    if kind == "bcc":
        return a * I, a * np.array([[0, 0, 0], [0.5, 0.5, 0.5]]), a * math.sqrt(3) / 4, a * math.sqrt(5) / 4
    if kind == "fcc":
        motif = a * np.array([[0, 0, 0], [0.5, 0.5, 0], [0.5, 0, 0.5], [0, 0.5, 0.5]])
        return a * I, motif, a * math.sqrt(2) / 4, a / 2
    if kind == "hexagonal":
        basis = np.array([[a, 0, 0], [a / 2, a * math.sqrt(3) / 2, 0], [0, 0, c]])
        # Deepest hole: center of the triangular prism.
        return basis, np.zeros((1, 3)), min(a, c) / 2, math.sqrt(a * a / 3 + c * c / 4)
    raise ValueError(kind)


def lattice_points(kind: str, extent, a: float = 1.0, c: float | None = None) -> np.ndarray:
    """Lattice points inside ``[0, extent]`` (inclusive, to 1e-9 relative)."""
    basis, motif, _, _ = _lattice_frame(kind, a, a if c is None else c)
    ext = np.asarray(extent, dtype=float)
    corners = np.array(list(itertools.product(*[(0.0, e) for e in ext])))
    frac = corners @ np.linalg.inv(basis)
    lo = np.floor(frac.min(axis=0)) - 1
    hi = np.ceil(frac.max(axis=0)) + 1
    grids = [np.arange(lo[k], hi[k] + 1) for k in range(3)]
    ijk = np.stack(np.meshgrid(*grids, indexing="ij"), axis=-1).reshape(-1, 3)
    pts = (ijk @ basis)[:, None, :] + motif[None, :, :]
    pts = pts.reshape(-1, 3)
    slack = 1e-9 * max(1.0, float(ext.max()))
    keep = np.all((pts >= -slack) & (pts <= ext + slack), axis=1)
    pts = pts[keep]
    # Snap values that are integers up to rounding so canonical output is clean.
    snapped = np.round(pts, 12)
    return np.clip(snapped, 0.0, ext)


def _default_margin(spec: GeneratorSpec) -> float:
    return spec.param("margin", min(spec.extent) / 5)


def _lattice(spec: GeneratorSpec) -> Sample:
    a = spec.param("a", 1.0)
    c = spec.param("c", a)
    if a <= 0 or c <= 0:
        raise SpecError("a", "lattice constants must be positive")
    _, _, r, R = _lattice_frame(spec.kind, a, c)
    pts = lattice_points(spec.kind, spec.extent, a, c)
    tol = ToleranceModel.for_scale(r)
    pset = build_point_set(pts, _default_margin(spec), tol, bbox=Box(np.zeros(3), spec.extent))
    return Sample(pset, spec.kind, r, R)


def _perturbed(spec: GeneratorSpec) -> Sample:
    base = spec.params.get("base", "cubic")
    if base not in ("cubic", "bcc", "fcc", "hexagonal"):
        raise SpecError("base", f"perturbed base must be a lattice kind, got {base!r}")
    a = spec.param("a", 1.0)
    c = spec.param("c", a)
    _, _, r, R = _lattice_frame(base, a, c)
    delta = spec.param("delta", 0.1 * r)
    if not 0 <= delta < r / 4:
        raise SpecError("delta", f"perturbation must satisfy 0 <= delta < r/4 = {r / 4:g}")
    seed = spec.param("seed", 0, int)
    rng = np.random.default_rng(seed)
    pts = lattice_points(base, spec.extent, a, c)
    # Uniform displacement in the ball of radius delta.
    v = rng.normal(size=pts.shape)
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    v *= delta * rng.random(len(pts))[:, None] ** (1 / 3)
    pts = pts + v
    tol = ToleranceModel.for_scale(r - delta)
    bbox = Box(np.full(3, -delta), np.asarray(spec.extent) + delta)
    pset = build_point_set(pts, _default_margin(spec) + delta, tol, bbox=bbox)
    return Sample(pset, "perturbed", None, None,
                  {"base": base, "delta": delta, "seed": seed, "r_base": r, "R_base": R})


# -- icosahedral cut and project -------------------------------------------------

def icosahedral_projections() -> tuple[np.ndarray, np.ndarray]:
    """(physical, internal) 3x6 projections of Z^6 with orthonormal rows.

    Columns of the physical projection point along the six five-fold axes of
    an icosahedron; the internal one is its Galois conjugate (phi -> -1/phi).
    """
    def axes(t):
        return np.array([[1, t, 0], [-1, t, 0], [0, 1, t], [0, -1, t], [t, 0, 1], [-t, 0, 1]], float)

    par = axes(PHI).T / math.sqrt(2 * (1 + PHI ** 2))
    perp = axes(-1 / PHI).T / math.sqrt(2 * (1 + PHI ** -2))
    return par, perp


def cut_project_icosahedral(extent, window_radius: float = 0.85, seed: int | None = None,
                            a: float = 1.0, shift: float = 0.0) -> np.ndarray:
    """Vertices of an icosahedral quasicrystal centered in ``[0, extent]``.

    Z^6 points whose internal-space image lies in a ball of
    ``window_radius`` are projected to physical space and scaled so the
    shortest projected basis vector has length ``a``.  With ``shift > 0``
    the ball center is displaced by a seeded random vector of that length.
    """
    if not window_radius > 0:
        raise SpecError("window_radius", "must be positive")
    ext = np.asarray(extent, dtype=float)
    par, perp = icosahedral_projections()
    scale = a * math.sqrt(2)
    half = ext / (2 * scale)
    center = np.zeros(3)
    if shift > 0:
        rng = np.random.default_rng(seed)
        d = rng.normal(size=3)
        center = shift * d / np.linalg.norm(d)
    # |n|^2 = |par n|^2 + |perp n|^2 bounds the search to a 6-ball.
    rad2 = float(half @ half) + (window_radius + np.linalg.norm(center)) ** 2
    k = int(math.floor(math.sqrt(rad2)))
    rng1 = np.arange(-k, k + 1)
    tri = np.array(list(itertools.product(rng1, repeat=3)), dtype=float)
    tn = np.einsum("ij,ij->i", tri, tri)
    order = np.argsort(tn, kind="stable")
    tri, tn = tri[order], tn[order]
    heads = tri[tn <= rad2]
    out = []
    for h in heads:
        m = int(np.searchsorted(tn, rad2 - h @ h, side="right"))
        if m == 0:
            continue
        tails = tri[:m]
        q = perp[:, :3] @ h + tails @ perp[:, 3:].T
        sel = np.einsum("ij,ij->i", q - center, q - center) <= window_radius ** 2
        if not np.any(sel):
            continue
        x = par[:, :3] @ h + tails[sel] @ par[:, 3:].T
        x = x[np.all(np.abs(x) <= half, axis=1)]
        if len(x):
            out.append(x)
    if not out:
        raise SpecError("window_radius", f"window radius {window_radius:g} yields no points")
    pts = np.concatenate(out) * scale + ext / 2
    return pts


def _quasicrystal(spec: GeneratorSpec) -> Sample:
    w = spec.param("window_radius", 0.85)
    a = spec.param("a", 1.0)
    seed = spec.param("seed", None, int)
    shift = spec.param("shift", 0.0)
    pts = cut_project_icosahedral(spec.extent, w, seed, a, shift)
    if len(pts) < 8:
        raise SpecError("window_radius", f"window radius {w:g} gives a sparse sample ({len(pts)} points)")
    eps = 1e-9 * a
    tol = ToleranceModel(eps_match=eps, eps_shell=eps, eps_line=10 * eps)
    pset = build_point_set(pts, _default_margin(spec), tol, bbox=Box(np.zeros(3), spec.extent))
    return Sample(pset, spec.kind, None, None, {"window_radius": w, "a": a, "shift": shift, "seed": seed})


# -- heptagonal column ----------------------------------------------------------------

def heptagonal_column_points(extent, spacing: float = 1.0, gap: float = 0.7, rings: int = 3,
                             layer: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """A column with an exact seven-fold axis inside a cubic filler lattice.

    The column, centred on the vertical line through the middle of the box,
    holds an axis point per layer plus rings of ``7 k`` points at radius
    ``k * spacing``; the ring offsets alternate between layers so only the
    seven-fold rotation survives.  Filler points come from a unit cubic
    lattice kept ``gap`` beyond the outermost ring.  Returns the points and
    the positions of the axis points.
    """
    ext = np.asarray(extent, dtype=float)
    cx, cy = ext[0] / 2, ext[1] / 2
    n_layers = int(math.floor(ext[2] / layer))
    z0 = (ext[2] - n_layers * layer) / 2
    zs = z0 + layer * np.arange(n_layers + 1)
    col = []
    axis_pts = np.column_stack([np.full(len(zs), cx), np.full(len(zs), cy), zs])
    col.append(axis_pts)
    for li, z in enumerate(zs):
        for k in range(1, rings + 1):
            m = 7 * k
            phase = (li % 2) * math.pi / m
            t = 2 * math.pi * np.arange(m) / m + phase
            rk = k * spacing
            col.append(np.column_stack([cx + rk * np.cos(t), cy + rk * np.sin(t), np.full(m, z)]))
    col = np.concatenate(col)
    filler = lattice_points("cubic", ext)
    radial = np.hypot(filler[:, 0] - cx, filler[:, 1] - cy)
    filler = filler[radial >= rings * spacing + gap]
    return np.concatenate([col, filler]), axis_pts


def _heptagonal(spec: GeneratorSpec) -> Sample:
    # Local imports: the search runs the analysis it is meant to exercise.
    from .delone import estimate_params
    from .symmetry import local_group

    trials = _HEPTAGONAL_TRIALS
    if "gap" in spec.params or "rings" in spec.params or "spacing" in spec.params:
        trials = [(spec.param("spacing", 1.0), spec.param("gap", 0.7), spec.param("rings", 3, int))]
    tried = []
    for spacing, gap, rings in trials:
        pts, axis_pts = heptagonal_column_points(spec.extent, spacing, gap, rings)
        r_guess = min(gap, 2 * spacing * math.sin(math.pi / 7)) / 2
        tol = ToleranceModel.for_scale(r_guess)
        pset = build_point_set(pts, _default_margin(spec), tol, bbox=Box(np.zeros(3), spec.extent))
        params = estimate_params(pset)
        R_up = params.R_upper
        # The 2R-ball about the axis must stay clear of the filler.
        clear = 2 * R_up + tol.eps_match < rings * spacing + gap
        mid = axis_pts[len(axis_pts) // 2]
        idx = int(pset.tree.query(mid)[1])
        n = None
        if clear and pset.bbox.contains_ball(mid, 2 * R_up):
            n = local_group(pset, idx, R_up).n_max
        tried.append({"spacing": spacing, "gap": gap, "rings": rings, "R": params.R, "n_max": n})
        if n == 7:
            return Sample(pset, spec.kind, None, None, {
                "spacing": spacing, "gap": gap, "rings": rings, "seven_fold_index": idx,
                "r": params.r, "R": params.R, "R_error": params.R_error, "trials": tried})
    raise SpecError("heptagonal_column", f"no parameter set produced a verified 7-fold point: {tried}")


def _custom(spec: GeneratorSpec) -> Sample:
    path = spec.params.get("path")
    if not path:
        raise SpecError("path", "custom_file needs a path")
    pts = read_points(Path(path))
    tol = None
    if "eps_match" in spec.params:
        eps = spec.param("eps_match")
        tol = ToleranceModel(eps, eps, 10 * eps)
    pset = build_point_set(pts, spec.param("margin", 0.0), tol)
    return Sample(pset, spec.kind)


_DISPATCH = {
    "cubic": _lattice, "bcc": _lattice, "fcc": _lattice, "hexagonal": _lattice,
    "perturbed": _perturbed, "cut_project_icosahedral": _quasicrystal,
    "heptagonal_column": _heptagonal, "custom_file": _custom,
}


def generate(spec: GeneratorSpec) -> Sample:
    return _DISPATCH[spec.kind](spec)
