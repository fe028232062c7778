"""Acceptance criteria 1-10.

Each test appends a PASS/FAIL line to the terminal summary before asserting,
so a failing criterion still reports what it measured.
"""

import math
import time
from collections import Counter

import numpy as np

from delone6 import analyze, build_chain, build_point_set, cluster_at, local_group, verify_decay
from delone6.analysis import run_probes
from delone6.chains import DECAY, SUBSET_BOUND, TERMINATED
from delone6.cli import main
from delone6.io import write_points
from delone6.symmetry import Axis, brute_force_axes, detect_axes
from helpers import ACCEPTANCE_LINES, axes_match, make_cluster, orbit, point_group, random_rotation

_T0 = time.perf_counter()
SUITE_BUDGET = 600.0
LATTICES = ("cubic", "hexagonal", "bcc", "fcc")


def report(n, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    print(ACCEPTANCE_LINES[-1])
    assert ok, detail


def test_criterion_01_decay_constant():
    v = 2 * math.sin(math.pi / 7)
    ok = v < DECAY and abs(v - 0.8677674782351162) < 1e-15
    report(1, ok, f"2 sin(pi/7) = {v:.16f} < 0.87")


def test_criterion_02_cubic_ground_truth(cubic20, cubic20_analysis):
    an = cubic20_analysis
    p = an.params
    assert len(cubic20.pset) == 9261
    expected = math.sqrt(3) / 2
    bracket = p.R <= expected <= p.R + p.R_error and p.R_error <= 1e-3
    infos = an.infos.values()
    groups = all(i.n_max == 4 and len(i.axes) == 13
                 and Counter(i.orders()) == {4: 3, 3: 4, 2: 6} for i in infos)
    c = an.report.counts
    full = c["X6"] == c["K"] == c["Y"] == c["total_window_points"] > 0
    fast = an.elapsed < 30
    ok = p.r == 0.5 and bracket and groups and full and fast
    report(2, ok, f"r = {p.r}, R in [{p.R:.6f}, {p.R + p.R_error:.6f}] (err {p.R_error:.1e}), "
                  f"{c['total_window_points']} window points with 13 axes, X6=K=Y=100%: {full}, "
                  f"{an.elapsed:.1f} s")


def test_criterion_03_hexagonal_order_six(analyses):
    an = analyses["hexagonal"]
    idx = list(an.infos)
    ok = (len(idx) > 0 and all(an.infos[i].n_max == 6 for i in idx)
          and all(an.in_X6[i] and an.in_K[i] for i in idx))
    hist = dict(Counter(i.n_max for i in an.infos.values()))
    report(3, ok, f"{len(idx)} window points, n_max histogram {hist}, all in X6 and K")


def _random_symmetric_cluster(rng):
    """Union of orbits of a random finite rotation group, randomly rotated."""
    family = rng.choice(["C", "D", "T", "O", "I"], p=[0.3, 0.3, 0.15, 0.15, 0.1])
    n = int(rng.integers(2, 9)) if family == "C" else int(rng.integers(2, 7))
    G = point_group(family, n)
    special = {"C": [[0, 0, 1]], "D": [[0, 0, 1], [1, 0, 0]], "T": [[1, 1, 1], [1, 0, 0]],
               "O": [[1, 0, 0], [1, 1, 1], [1, 1, 0]], "I": [[0, 1, 1.618033988749895], [1, 1, 1], [0, 0, 1]]}
    pts = []
    for _ in range(8):
        if len(G) <= 20 and rng.random() < 0.6:
            d = rng.normal(size=3)
        else:
            d = np.asarray(special[family][rng.integers(len(special[family]))], float)
        d = d / np.linalg.norm(d) * rng.uniform(1.0, 3.0)
        orb = orbit(G, d)
        if len(pts) + len(orb) > 39:
            continue
        pts.extend(orb)
    broken = rng.random() < 0.15 and len(pts) < 39
    if broken:
        pts.append(rng.normal(size=3))
    pts = np.array(pts) @ random_rotation(rng).T
    return pts, family, n, broken


def test_criterion_04_oracle_equivalence(cubic20_analysis, analyses, hexagonal, bcc, fcc, cubic20):
    rng = np.random.default_rng(2024)
    mismatches, done, families = 0, 0, Counter()
    while done < 200:
        pts, family, n, _ = _random_symmetric_cluster(rng)
        cl = make_cluster(pts)
        if cl.rank() < 3:
            continue
        done += 1
        families[str(family)] += 1
        if not axes_match(detect_axes(cl), brute_force_axes(cl)):
            mismatches += 1
    lattice_checked = 0
    for name, sample in (("cubic", cubic20), ("hexagonal", hexagonal), ("bcc", bcc), ("fcc", fcc)):
        an = analyses[name]
        idx = sorted(an.infos)
        for i in idx[:: max(1, len(idx) // 6)]:
            cl = cluster_at(sample.pset, i, 2 * an.params.R_upper)
            lattice_checked += 1
            if not axes_match(detect_axes(cl), brute_force_axes(cl)):
                mismatches += 1
    report(4, mismatches == 0, f"{done} random clusters {dict(families)} and {lattice_checked} lattice "
                               f"clusters, {mismatches} mismatches")


def test_criterion_05_conjugation_covariance(cubic12, cubic12_analysis):
    rng = np.random.default_rng(5)
    pset = cubic12.pset
    R = cubic12_analysis.params.R_upper
    center = pset.bbox.lo + pset.bbox.extent / 2
    ref = cubic12_analysis.infos
    ref_hist = Counter(i.n_max for i in ref.values())
    bad_axes = bad_hist = 0
    for _ in range(50):
        Q = random_rotation(rng)
        rotated = build_point_set((pset.points - center) @ Q.T + center, tol=pset.tol)
        hist = Counter()
        for i, info in ref.items():
            j = int(rotated.tree.query((pset.points[i] - center) @ Q.T + center)[1])
            got = local_group(rotated, j, R)
            hist[got.n_max] += 1
            want = [Axis(Q @ a.direction, a.order) for a in info.axes]
            if not axes_match(list(got.axes), want):
                bad_axes += 1
        bad_hist += hist != ref_hist
    report(5, bad_axes == 0 and bad_hist == 0,
           f"50 rotations x {len(ref)} points: {bad_axes} axis mismatches, {bad_hist} histogram mismatches")


def test_criterion_06_seven_fold_chains(heptagonal, heptagonal_wide):
    an = analyze(heptagonal.pset)
    sevens = [i for i, info in an.infos.items() if info.n_max == 7]
    c = an.report.counts

    w = heptagonal_wide.pset
    meta = heptagonal_wide.info
    R_lo, r = meta["R"], meta["r"]
    R_up = R_lo + meta["R_error"]
    cx, cy = w.bbox.lo[:2] + w.bbox.extent[:2] / 2
    on_axis = np.flatnonzero(np.hypot(w.points[:, 0] - cx, w.points[:, 1] - cy) < 1e-9)
    starts = [int(i) for i in on_axis if w.bbox.contains_ball(w.points[i], 2 * R_up, w.tol.eps_match)]
    M = math.log(R_up / r) / math.log(1 / DECAY)
    chains_ok, n_chains, longest = True, 0, 0
    for s in starts:
        info = local_group(w, s, R_up)
        if info.n_max != 7:
            continue
        ch = build_chain(w, s, R_up, r)
        n_chains += 1
        longest = max(longest, ch.m)
        if ch.status != TERMINATED or ch.m > math.ceil(M) + 1:
            chains_ok = False
            continue
        chains_ok &= verify_decay(ch, R_lo, w.points).ok
    ok = len(sevens) >= 1 and an.report.invariants["X6_nonempty"] and n_chains >= 1 and chains_ok and longest >= 2
    report(6, ok, f"{len(sevens)} window points with n_max = 7 (X6 count {c['X6']}); {n_chains} chains "
                  f"from 7-fold points, longest m = {longest} <= ceil(M)+1 = {math.ceil(M) + 1}, "
                  f"decay inequalities hold: {chains_ok}")


def test_criterion_07_subset_bound(analyses):
    lines, ok = [], True
    for name, an in analyses.items():
        bc = an.report.bound_check
        px6 = an.report.params_X6
        probe = run_probes(an, 1000, seed=0)
        this = (an.report.counts["X6"] >= 1 and px6 is not None
                and px6.R <= SUBSET_BOUND * an.params.R + px6.R_error and probe["all_within_16.4R"])
        ok &= bool(this)
        lines.append(f"{name}: R'={bc['R_X6']:.3f} vs 16.4R={SUBSET_BOUND * an.params.R:.2f}, "
                     f"max probe d={probe['max_distance']:.3f}")
    report(7, ok, "; ".join(lines))


def test_criterion_08_subset_inclusions(analyses):
    ok, notes = True, []
    for name, an in analyses.items():
        K, Y, X6 = an.in_K, an.in_Y, an.in_X6
        this = bool(np.all(~K | Y) and np.all(~K | X6))
        for sub in ("params_X6", "params_K", "params_Y"):
            p = getattr(an.report, sub)
            if p is None:
                continue
            # A subset's true R is at least the host's, which is at least R_hat.
            this &= p.r >= an.params.r and p.R + p.R_error >= an.params.R
        ok &= this
        c = an.report.counts
        notes.append(f"{name} X6/K/Y = {c['X6']}/{c['K']}/{c['Y']}")
    report(8, ok, "; ".join(notes))


def test_criterion_09_lattice_orders(analyses):
    worst = {name: max(i.n_max for i in analyses[name].infos.values()) for name in LATTICES}
    report(9, all(v <= 6 for v in worst.values()), f"max n_max per lattice {worst}")


def test_criterion_10_determinism(quasicrystal, tmp_path):
    src = tmp_path / "qc.csv"
    write_points(src, quasicrystal.pset.points)
    bodies, codes = [], []
    for k in range(2):
        out = tmp_path / f"run{k}"
        codes.append(main(["analyze", str(src), "--out", str(out), "--seed", "0"]))
        lines = (out / "report.json").read_bytes().splitlines(keepends=True)
        body = b"".join(ln for ln in lines if b'"generated_at"' not in ln)
        bodies.append((body, (out / "points.jsonl").read_bytes()))
    elapsed = time.perf_counter() - _T0
    ok = codes == [0, 0] and bodies[0] == bodies[1] and elapsed <= SUITE_BUDGET
    report(10, ok, f"two quasicrystal runs identical: {bodies[0] == bodies[1]}, exit codes {codes}, "
                   f"acceptance suite {elapsed:.0f} s <= {SUITE_BUDGET:.0f} s")
