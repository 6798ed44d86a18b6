"""Command-line entry point: ``distortionlab {gen,run,certify,doubling,report}``.

Exit codes: 0 when every bound assertion passes, 2 on a bound violation,
1 on an operational error (bad config, unreadable instance, solver failure).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import io
from .errors import DistortionLabError
from .experiment import (
    GENERATORS,
    SEEDED,
    ExperimentConfig,
    make_generated,
    read_report_csv,
    run_experiment,
)
from .metric import doubling_constant
from .worstcase import build_lp, worst_case_distortion

EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2


def _value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _params(pairs: list[str]) -> dict:
    out = {}
    for p in pairs:
        key, sep, val = p.partition("=")
        if not sep:
            raise DistortionLabError(f"parameter {p!r} is not key=value")
        out[key] = _value(val)
    return out


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> int:
    params = _params(args.params)
    seed = args.seed if args.name in SEEDED else None
    if args.seed is not None and seed is None:
        raise DistortionLabError(f"generator {args.name!r} takes no seed")
    e = make_generated(args.name, params, seed)
    _emit(io.dumps(io.election_to_dict(e)), args.output)
    return EXIT_OK


def _seed_range(text: str) -> list[int]:
    start, sep, stop = text.partition(":")
    if not sep:
        return [int(start), int(start) + 1]
    return [int(start), int(stop)]


def cmd_run(args) -> int:
    path = Path(args.config)
    try:
        obj = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DistortionLabError(f"cannot read config {path}: {exc}") from None
    if isinstance(obj, dict):
        if args.seeds:
            for src in obj.get("instances", []):
                if isinstance(src, dict) and "random" in src:
                    src["seeds"] = _seed_range(args.seeds)
        if args.operator:
            obj["operator"] = args.operator
        outputs = dict(obj.get("outputs", {}))
        if args.csv:
            outputs["csv"] = str(Path(args.csv).resolve())
        if args.json:
            outputs["json"] = str(Path(args.json).resolve())
        obj["outputs"] = outputs
    cfg = ExperimentConfig.from_dict(obj, path.parent)
    report = run_experiment(cfg)
    if "csv" not in cfg.outputs:
        sys.stdout.write(report.to_csv())
    s = report.summary()
    print(f"instances={s['instances']} violations={s['violations']} errors={s['errors']}",
          file=sys.stderr)
    return report.exit_code


def cmd_certify(args) -> int:
    e = io.load_election(args.election)
    w = e.candidate_index(int(args.candidate) if args.candidate.isdigit() else args.candidate)
    res = worst_case_distortion(e, w, args.rho)
    if args.lp_out and res.witness is not None:
        Path(args.lp_out).write_text(build_lp(e, w, res.reference_optimum, args.rho).to_lp_format())
    out = {"candidate": e.candidates[w], "rho": args.rho, "value": res.value,
           "reference_optimum": e.candidates[res.reference_optimum],
           "per_reference": {e.candidates[x]: v for x, v in res.per_reference.items()},
           "has_coincident_points": res.has_coincident_points,
           "witness": None if res.witness is None else io.metric_to_dict(res.witness)}
    sys.stdout.write(io.dumps(out))
    return EXIT_OK


def cmd_doubling(args) -> int:
    obj = json.loads(Path(args.file).read_text())
    if "profile" in obj:
        e = io.load_election(args.file)
        D = e.require_embedding().metric
        if args.candidates:
            D = D.submetric(e.embedding.candidate_points)
    else:
        D = io.load_metric(args.file)
    res = doubling_constant(D, mode=args.mode)
    print(json.dumps({"points": D.n_points, "mode": args.mode, "lambda": res.lam,
                      "dimension": res.dim}))
    return EXIT_OK


def cmd_report(args) -> int:
    rows = []
    for p in args.csv:
        rows.extend(read_report_csv(Path(p).read_text()))
    stats: dict = {}
    for r in rows:
        s = stats.setdefault(r["rule"], {"rows": 0, "failed": 0, "errors": 0,
                                         "max_distortion": -math.inf, "min_margin": math.inf})
        s["rows"] += 1
        s["failed"] += r["passed"] == "false"
        s["errors"] += r["passed"] == "error"
        if r["realized_distortion"] and math.isfinite(float(r["realized_distortion"])):
            s["max_distortion"] = max(s["max_distortion"], float(r["realized_distortion"]))
        if r["margin"]:
            s["min_margin"] = min(s["min_margin"], float(r["margin"]))
    print(f"{'rule':<26}{'rows':>7}{'failed':>8}{'errors':>8}{'max dist':>12}{'min margin':>12}")
    for rule in sorted(stats):
        s = stats[rule]
        md = f"{s['max_distortion']:.4f}" if math.isfinite(s["max_distortion"]) else "-"
        mm = f"{s['min_margin']:.4f}" if math.isfinite(s["min_margin"]) else "-"
        print(f"{rule:<26}{s['rows']:>7}{s['failed']:>8}{s['errors']:>8}{md:>12}{mm:>12}")
    if any(s["failed"] for s in stats.values()):
        return EXIT_VIOLATION
    return EXIT_ERROR if any(s["errors"] for s in stats.values()) else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="distortionlab",
                                 description="Metric-distortion voting experiments.")
    sub = ap.add_subparsers(dest="verb", required=True)

    g = sub.add_parser("gen", help="generate an election and print it as JSON")
    g.add_argument("name", choices=sorted(GENERATORS))
    g.add_argument("params", nargs="*", help="generator parameters as key=value")
    g.add_argument("--seed", type=int)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    r.add_argument("--seeds", help="seed range start:stop applied to every random source")
    r.add_argument("--operator", choices=("sum", "max"))
    r.add_argument("--csv", help="CSV report path (default: stdout)")
    r.add_argument("--json", help="JSON report path")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("certify", help="worst-case distortion of a candidate by LP")
    c.add_argument("election")
    c.add_argument("--candidate", required=True, help="candidate name or index")
    c.add_argument("--rho", type=float, default=1.0)
    c.add_argument("--lp-out", help="also write the maximising LP in CPLEX-LP format")
    c.set_defaults(func=cmd_certify)

    d = sub.add_parser("doubling", help="doubling constant of a metric or election file")
    d.add_argument("file")
    d.add_argument("--mode", choices=("exact", "greedy"), default="exact")
    d.add_argument("--candidates", action="store_true",
                   help="restrict an election's metric to its candidate points")
    d.set_defaults(func=cmd_doubling)

    p = sub.add_parser("report", help="summarise report CSVs")
    p.add_argument("csv", nargs="+")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DistortionLabError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
