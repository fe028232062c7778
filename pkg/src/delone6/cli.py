"""Command-line entry point.

    delone6 generate SPEC OUT.csv
    delone6 analyze POINTS --out DIR
    delone6 chains POINTS --out DIR [--sample-chains N]
    delone6 probe POINTS --probes N --seed S

Exit status: 0 all checks passed, 1 usage or input error, 2 a proven bound
(the 16.4R covering bound on X6, or chain decay) was violated.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .delone import estimate_params
from .analysis import AnalysisConfig, AnalysisError, analyze, prepare, run_chains, run_probes
from .generators import GeneratorSpec, SpecError, generate
from .io import read_points, write_points
from .pointset import BoundaryError, PointSetError

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2


def _header() -> dict:
    return {"tool": "delone6", "version": __version__,
            "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds")}


def _write_json(path: Path, body: dict) -> None:
    # The timestamp lives in its own header key so bodies compare byte-for-byte.
    with open(path, "w") as fh:
        json.dump({"header": _header(), **body}, fh, indent=2)
        fh.write("\n")


def _write_jsonl(path: Path, records) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec))
            fh.write("\n")


def _load_config(args) -> AnalysisConfig:
    cfg = AnalysisConfig()
    if args.config:
        cp = configparser.ConfigParser()
        if not cp.read(args.config):
            raise SpecError("config", f"cannot read config file {args.config}")
        sec = cp["analysis"] if cp.has_section("analysis") else {}
        for key in ("margin", "target_error", "tol_match"):
            if key in sec:
                try:
                    setattr(cfg, key, float(sec[key]))
                except ValueError:
                    raise SpecError(key, f"cannot interpret {sec[key]!r} as a number") from None
        if "sample_chains" in sec and args.sample_chains is None:
            args.sample_chains = int(sec["sample_chains"])
    if args.tol_match is not None:
        cfg.tol_match = args.tol_match
    if args.target_error is not None:
        cfg.target_error = args.target_error
    if args.margin is not None:
        cfg.margin = args.margin
    return cfg


def _run_analysis(args):
    cfg = _load_config(args)
    pset = prepare(read_points(args.points), cfg)
    return analyze(pset, cfg.target_error)


def cmd_generate(args) -> int:
    spec = GeneratorSpec.from_file(args.spec)
    if args.seed is not None:
        spec.params["seed"] = str(args.seed)
    sample = generate(spec)
    out = Path(args.out_file)
    write_points(out, sample.pset.points)
    print(f"wrote {len(sample.pset)} points to {out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    an = _run_analysis(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rep = an.report
    _write_json(out / "report.json", {
        "input": {"points": str(args.points), "n_points": len(an.pset), "bbox": an.pset.bbox.to_dict(),
                  "window": an.pset.window.to_dict(), "tolerance": an.pset.tol.to_dict()},
        "report": rep.to_dict(),
        "violations": rep.violations,
    })
    _write_jsonl(out / "points.jsonl", an.records())
    c = rep.counts
    print(f"window points {c['total_window_points']}: X6 {c['X6']}, K {c['K']}, Y {c['Y']}; "
          f"R = {an.params.R:.6g} (+{an.params.R_error:.2g})")
    if rep.violations:
        print("VIOLATION: " + ", ".join(rep.violations), file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_chains(args) -> int:
    cfg = _load_config(args)
    pset = prepare(read_points(args.points), cfg)
    sw = run_chains(pset, estimate_params(pset, cfg.target_error), args.sample_chains, args.seed or 0)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_jsonl(out / "chains.jsonl",
                 (ch.to_record(sw.decays.get(ch.indices[0])) for ch in sw.chains))
    _write_json(out / "chains_summary.json", {"summary": sw.summary, "violations": sw.violations})
    s = sw.summary
    print(f"{s['n_chains']} chains, max m = {s['max_m']} (ceil M = {s['ceil_M']}), "
          f"{s['n_eligible']} eligible, decay ok: {s['all_decay_ok']}")
    if sw.violations:
        print("VIOLATION: " + ", ".join(sw.violations), file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_probe(args) -> int:
    an = _run_analysis(args)
    res = run_probes(an, args.probes, args.seed or 0)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "probe.json", {"probe": res})
    if res["max_distance"] is not None:
        print(f"{res['n_probes']} probes: max d(z, X6) = {res['max_distance']:.6g}, "
              f"16.4R = {res['bound_16.4R']:.6g}")
    if not res["all_within_16.4R"]:
        print("VIOLATION: probe farther than 16.4R from X6", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="delone6", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a generated point sample as CSV or JSON")
    g.add_argument("spec", help="generator spec file ([generator] and [params] sections)")
    g.add_argument("out_file")
    g.add_argument("--seed", type=int)
    g.set_defaults(func=cmd_generate)

    def analysis_args(p):
        p.add_argument("points", help="point file (.csv with x,y,z header, or .json)")
        p.add_argument("--config", help="INI file with an [analysis] section")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--seed", type=int)
        p.add_argument("--tol-match", type=float, dest="tol_match")
        p.add_argument("--target-error", type=float, dest="target_error")
        p.add_argument("--margin", type=float, help="window erosion (default: chosen from a pilot R)")
        p.add_argument("--sample-chains", type=int, dest="sample_chains")
        p.add_argument("--probes", type=int, default=1000)

    for name, func, help_ in (("analyze", cmd_analyze, "classify points and report X6, K, Y"),
                              ("chains", cmd_chains, "walk off-axial chains and check link decay"),
                              ("probe", cmd_probe, "distances from random points to X6")):
        p = sub.add_parser(name, help=help_)
        analysis_args(p)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, AnalysisError, PointSetError, BoundaryError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
