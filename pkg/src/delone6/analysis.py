"""End-to-end analysis: local groups over a window, the X6 / K / Y subsets
and their Delone parameters, chain sweeps and random probes.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .chains import (CHAIN_SPAN, SUBSET_BOUND, TERMINATED, VIOLATED, GroupCache, build_chain,
                     chain_length_bound, subset_distances, verify_decay)
from .delone import (DeloneParams, EmptySubsetError, covering_radius, estimate_params, packing_radius,
                     verify_delone)
from .pointset import PointSet, PointSetError, ToleranceModel, build_point_set
from .symmetry import LocalGroupInfo, classify_point, local_group, point_record


class AnalysisError(ValueError):
    """The sample cannot support the requested analysis."""


@dataclass
class AnalysisConfig:
    margin: float | None = None        # window erosion; None picks one from a pilot R
    target_error: float | None = None  # covering-radius bracket width; default 1e-3 r
    tol_match: float | None = None     # eps_match override (eps_shell, eps_line follow)

    def tolerance(self, points) -> ToleranceModel:
        if self.tol_match is None:
            return ToleranceModel.from_points(points)
        eps = self.tol_match
        return ToleranceModel(eps, eps, 10 * eps)


def prepare(points, config: AnalysisConfig | None = None) -> PointSet:
    """Box the points and pick a window deep enough for 2R-clusters."""
    config = config or AnalysisConfig()
    pset = build_point_set(points, 0.0, config.tolerance(points))
    if config.margin is not None:
        try:
            return pset.with_margin(config.margin)
        except PointSetError as exc:
            raise AnalysisError(str(exc)) from None
    bbox = pset.bbox
    pilot = bbox.eroded(bbox.max_erosion() / 2)
    r = packing_radius(pset)
    R0, err0 = covering_radius(pset, 0.1 * r, window=pilot)
    margin = 1.05 * 2 * (R0 + err0)
    for _ in range(5):
        if margin >= bbox.max_erosion():
            raise AnalysisError(
                f"box too small: 2R-clusters need a window margin of {margin:g}, so every box "
                f"dimension must exceed {2 * margin:g} (extent is {bbox.extent.tolist()})")
        cand = pset.with_margin(margin)
        R, err = covering_radius(cand, 0.1 * r)
        need = 2 * (R + err) + 2 * pset.tol.eps_match
        if need <= margin:
            return cand
        margin = 1.05 * need
    raise AnalysisError("could not settle on a window margin; the sample may not be Delone")


@dataclass
class SubsetReport:
    counts: dict
    fractions: dict
    params_host: DeloneParams
    params_X6: DeloneParams | None
    params_K: DeloneParams | None
    params_Y: DeloneParams | None
    bound_check: dict
    histogram: dict
    invariants: dict
    caveats: list = field(default_factory=list)

    @property
    def violations(self) -> list[str]:
        bad = [k for k, v in self.invariants.items() if not v]
        if not self.bound_check.get("R_X6_le_16.4R", False):
            bad.append("R_X6_le_16.4R")
        return bad

    def to_dict(self) -> dict:
        def params(p):
            return None if p is None else p.to_dict()

        return {
            "counts": self.counts,
            "fractions": self.fractions,
            "params_host": params(self.params_host),
            "params_X6": params(self.params_X6),
            "params_K": params(self.params_K),
            "params_Y": params(self.params_Y),
            "bound_check": self.bound_check,
            "n_max_histogram": self.histogram,
            "invariants": self.invariants,
            "caveats": self.caveats,
        }


@dataclass(eq=False)
class Analysis:
    pset: PointSet
    params: DeloneParams
    infos: dict
    in_X6: np.ndarray
    in_K: np.ndarray
    in_Y: np.ndarray
    report: SubsetReport

    @property
    def R_cluster(self) -> float:
        return self.params.R_upper

    def records(self):
        for i in sorted(self.infos):
            yield point_record(self.infos[i])


def sweep(pset: PointSet, R: float, indices=None) -> dict[int, LocalGroupInfo]:
    """Local groups for the given points (default: the window), in index order."""
    if indices is None:
        indices = pset.window_indices
    return {int(i): local_group(pset, int(i), R) for i in indices}


def analyze(pset: PointSet, target_error: float | None = None) -> Analysis:
    params = estimate_params(pset, target_error)
    R_up = params.R_upper
    need = 2 * R_up
    lo_gap = float(np.min(np.concatenate([pset.window.lo - pset.bbox.lo, pset.bbox.hi - pset.window.hi])))
    if lo_gap + pset.tol.eps_match < need:
        raise AnalysisError(
            f"window margin {lo_gap:g} is below 2R = {need:g}; erode the window by at least {need:g} "
            f"(every box dimension must exceed {2 * need + 1e-12:g})")
    infos = sweep(pset, R_up)
    n = len(pset)
    in_X6, in_K, in_Y = (np.zeros(n, bool) for _ in range(3))
    for i, info in infos.items():
        f = classify_point(info)
        in_X6[i], in_K[i], in_Y[i] = f.in_X6, f.in_K, f.in_Y
    report = _subset_report(pset, params, infos, in_X6, in_K, in_Y, target_error)
    return Analysis(pset, params, infos, in_X6, in_K, in_Y, report)


def _subset_report(pset, params, infos, in_X6, in_K, in_Y, target_error) -> SubsetReport:
    total = len(infos)
    counts = {"total_window_points": total, "X6": int(in_X6.sum()), "K": int(in_K.sum()), "Y": int(in_Y.sum())}
    fractions = {k: (v / total if total else 0.0) for k, v in counts.items() if k != "total_window_points"}
    ceiling = SUBSET_BOUND * params.R_upper
    caveats = [
        "subset covering radii use classified (window) points only, so holes near the window "
        "edge can be overestimated",
        "covering radii are measured over the sample window; voids of an infinite set outside "
        "the box are not represented",
    ]
    sub = {}
    for name, mask in (("X6", in_X6), ("K", in_K), ("Y", in_Y)):
        try:
            sub[name] = verify_delone(pset, mask, target_error, ceiling=ceiling)
        except EmptySubsetError:
            sub[name] = None
            caveats.append(f"{name} is empty in the window")
    pX6 = sub["X6"]
    if pX6 is not None:
        R6 = pX6.R
        bound = {
            "R_X6": R6,
            "R_X6_error": pX6.R_error,
            "R_host": params.R,
            "R_X6_le_16.4R": bool(R6 <= SUBSET_BOUND * params.R + pX6.R_error),
            "margin_16.4R": SUBSET_BOUND * params.R - R6,
            "R_X6_le_15.4R": bool(R6 <= CHAIN_SPAN * params.R + pX6.R_error),
            "margin_15.4R": CHAIN_SPAN * params.R - R6,
        }
    else:
        bound = {"R_X6": None, "R_host": params.R, "R_X6_le_16.4R": False, "R_X6_le_15.4R": False}
    hist = Counter(info.n_max for info in infos.values())
    invariants = {
        "X6_nonempty": counts["X6"] >= 1,
        "K_subset_Y": bool(np.all(~in_K | in_Y)),
        "K_subset_X6": bool(np.all(~in_K | in_X6)),
    }
    return SubsetReport(counts, fractions, params, sub["X6"], sub["K"], sub["Y"], bound,
                        {str(k): hist[k] for k in sorted(hist)}, invariants, caveats)


# -- chains and probes --------------------------------------------------------------

def chain_window_margin(R: float) -> float:
    """Erosion that keeps a maximal chain plus its end point's 2R-ball inside the box."""
    return (CHAIN_SPAN + 2) * R


@dataclass
class ChainSweep:
    chains: list
    decays: dict
    summary: dict

    @property
    def violations(self) -> list[str]:
        bad = []
        if self.summary["status_counts"].get(VIOLATED, 0):
            bad.append("bound_violated")
        if not self.summary["all_decay_ok"]:
            bad.append("decay")
        if not self.summary["max_m_within_bound"]:
            bad.append("chain_length")
        return bad


def run_chains(pset: PointSet, params: DeloneParams, sample: int | None = None, seed: int = 0,
               infos: dict | None = None) -> ChainSweep:
    """Chains from every point of the chain-safe window (or ``sample`` of them).

    Local groups are computed on demand, so only points a chain visits pay
    for a symmetry detection.  ``infos`` reuses groups from an earlier sweep.
    """
    R_up, r, R_lo = params.R_upper, params.r, params.R
    margin = chain_window_margin(R_up)
    win = pset.bbox.eroded(margin)
    if win.is_empty:
        raise AnalysisError(
            f"chains need a window margin of {margin:g} (15.4R + 2R); every box dimension "
            f"must exceed {2 * margin:g} but the extent is {pset.bbox.extent.tolist()}")
    starts = np.flatnonzero(win.contains(pset.points))
    if len(starts) == 0:
        raise AnalysisError(f"no points inside the chain-safe window (margin {margin:g})")
    if sample is not None and sample < len(starts):
        rng = np.random.default_rng(seed)
        starts = np.sort(rng.choice(starts, size=sample, replace=False))
    groups = GroupCache(pset, R_up, infos)
    chains, decays = [], {}
    for s in starts:
        ch = build_chain(pset, int(s), R_up, r, groups=groups)
        chains.append(ch)
        if ch.status == TERMINATED and ch.link_lengths:
            decays[int(s)] = verify_decay(ch, R_lo, pset.points)
    M = chain_length_bound(r, R_up)
    max_m = max(ch.m for ch in chains)
    summary = {
        "n_chains": len(chains),
        "status_counts": dict(sorted(Counter(ch.status for ch in chains).items())),
        "max_m": max_m,
        "M_bound": M,
        "ceil_M": math.ceil(M),
        "max_m_within_bound": bool(max_m <= math.ceil(M) + 1),
        "n_eligible": len(decays),
        "all_decay_ok": all(d.ok for d in decays.values()),
        "chain_window": win.to_dict(),
    }
    return ChainSweep(chains, decays, summary)


def run_probes(analysis: Analysis, n_probes: int, seed: int = 0) -> dict:
    """Distances from uniform random window points to X6."""
    pset = analysis.pset
    R = analysis.params.R
    out = {"n_probes": n_probes, "seed": seed, "R_host": R, "bound_16.4R": SUBSET_BOUND * R,
           "bound_15.4R": CHAIN_SPAN * R}
    if n_probes <= 0:
        out.update({"max_distance": None, "all_within_16.4R": True, "all_within_15.4R": True})
        return out
    rng = np.random.default_rng(seed)
    w = pset.window
    Z = w.lo + rng.random((n_probes, 3)) * w.extent
    d = subset_distances(pset, Z, analysis.in_X6)
    out.update({
        "max_distance": float(d.max()),
        "mean_distance": float(d.mean()),
        "all_within_16.4R": bool(np.all(d <= SUBSET_BOUND * R)),
        "margin_16.4R": float(SUBSET_BOUND * R - d.max()),
        "all_within_15.4R": bool(np.all(d <= CHAIN_SPAN * R)),
        "margin_15.4R": float(CHAIN_SPAN * R - d.max()),
    })
    return out
