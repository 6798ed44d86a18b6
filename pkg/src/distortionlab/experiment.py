"""Experiment harness: run rules over instance sweeps and check distortion bounds.

A config is a JSON object::

    {
      "schema_version": 1,
      "instances": [
        {"file": "election.json"},
        {"generator": "ultrametric_lb", "params": {"n": 10}},
        {"random": "euclidean", "params": {"n": 9, "m": 5, "dim": 1}, "seeds": [0, 100]}
      ],
      "rules": ["stv_pu", "plurality_matching"],
      "operator": "sum",
      "bounds": {"stv_pu": "LINE", "plurality_matching": "PM_METRIC"},
      "outputs": {"csv": "report.csv", "json": "report.json"}
    }

``bounds`` is either one theorem name applied to every rule or a mapping from
rule name to theorem name.  ``seeds`` is a half-open range ``[start, stop]``
or an explicit list.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

from . import generators as G
from .dynamics import coordination_dynamics, greedy_dynamics
from .election import Election, realized_distortion, social_cost
from .errors import ConfigParseError, DistortionLabError, InstanceLoadError
from .io import load_election
from .metric import BinaryOperator, doubling_constant
from .rules import plurality_matching_winner, score_winners, stv_trace, stv_winners

SCHEMA_VERSION = 1
REL_TOL = 1e-6
CSV_COLUMNS = ("instance_id", "rule", "winner", "social_cost", "realized_distortion",
               "bound", "margin", "passed")


# ---------------------------------------------------------------------------
# rule registry


def _score(kind: str) -> Callable[[Election], tuple]:
    def run(e: Election) -> tuple:
        return (min(score_winners(e, kind).winners),)
    return run


RULES: dict[str, Callable[[Election], tuple]] = {
    "plurality": _score("plurality"),
    "borda": _score("borda"),
    "copeland": _score("copeland"),
    "veto": _score("veto"),
    "approval": _score("approval"),
    "stv": lambda e: (stv_trace(e).winner,),
    "stv_pu": lambda e: tuple(stv_winners(e)),
    "plurality_matching": lambda e: (plurality_matching_winner(e).winner,),
    "greedy": lambda e: (greedy_dynamics(e).winner,),
    "coordination": lambda e: (coordination_dynamics(e).winner,),
    "coordination_list_order": lambda e: (coordination_dynamics(e, "list_order").winner,),
}


def rule_winners(name: str, e: Election) -> tuple:
    """Winners of the named rule; ``stv_pu`` may return several, the rest one.

    ``ktop:<k>`` selects the k-top scoring rule.
    """
    if name.startswith("ktop:"):
        return _score(name)(e)
    if name not in RULES:
        raise ConfigParseError(f"unknown rule {name!r}")
    return RULES[name](e)


def valid_rule(name: str) -> bool:
    if name.startswith("ktop:"):
        return name[5:].isdigit() and int(name[5:]) >= 1
    return name in RULES


# ---------------------------------------------------------------------------
# instance sources

GENERATORS: dict[str, Callable[..., Election]] = {
    "stv_tree_lb": lambda **kw: G.gen_stv_tree_lb(**kw)[0],
    "split": G.gen_split_profile,
    "ultrametric_lb": G.gen_ultrametric_lb,
    "rho_lb": G.gen_rho_lb,
    "sq_euclid_lb": G.gen_sq_euclid_lb,
    "euclidean": G.gen_random_euclidean,
    "power": G.gen_random_power,
    "graph": G.gen_random_graph,
}
SEEDED = ("euclidean", "power", "graph")


def make_generated(name: str, params: dict, seed: int | None = None) -> Election:
    if name not in GENERATORS:
        raise ConfigParseError(f"unknown generator {name!r}")
    kw = dict(params)
    if seed is not None:
        if name not in SEEDED:
            raise ConfigParseError(f"generator {name!r} takes no seed")
        kw["seed"] = seed
    try:
        return GENERATORS[name](**kw)
    except TypeError as exc:
        raise ConfigParseError(f"bad parameters for {name!r}: {exc}") from None


def _param_text(params: dict) -> str:
    return ",".join(f"{k}={params[k]}" for k in sorted(params))


@dataclass(frozen=True)
class InstanceRef:
    instance_id: str
    kind: str  # "file", "generator" or "random"
    name: str
    params: dict = field(default_factory=dict)
    seed: int | None = None

    def load(self, base: Path) -> Election:
        if self.kind == "file":
            return load_election(base / self.name)
        return make_generated(self.name, self.params, self.seed)


def _seeds(spec) -> list[int]:
    if isinstance(spec, list) and len(spec) == 2 and all(isinstance(s, int) for s in spec):
        start, stop = spec
        return list(range(start, stop))
    if isinstance(spec, dict):
        return list(range(int(spec["start"]), int(spec["stop"])))
    raise ConfigParseError(f"cannot read seed range {spec!r}")


def expand_instances(sources: list) -> list[InstanceRef]:
    refs = []
    for k, src in enumerate(sources):
        if not isinstance(src, dict):
            raise ConfigParseError(f"instance source {k} is not an object")
        params = dict(src.get("params", {}))
        if "file" in src:
            refs.append(InstanceRef(f"{k:03d}:file:{src['file']}", "file", src["file"]))
        elif "generator" in src:
            name = src["generator"]
            refs.append(InstanceRef(f"{k:03d}:{name}({_param_text(params)})",
                                    "generator", name, params))
        elif "random" in src:
            name = src["random"]
            if name not in SEEDED:
                raise ConfigParseError(f"random source must be one of {SEEDED}, got {name!r}")
            seeds = _seeds(src.get("seeds", [0, 1]))
            refs.extend(InstanceRef(f"{k:03d}:{name}({_param_text(params)}):seed={s:08d}",
                                    "random", name, params, s) for s in seeds)
        else:
            raise ConfigParseError(f"instance source {k} needs file, generator or random")
    if not refs:
        raise ConfigParseError("config lists no instances")
    return refs


# ---------------------------------------------------------------------------
# config


@dataclass
class ExperimentConfig:
    instances: list
    rules: list
    operator: BinaryOperator = BinaryOperator.SUM
    bounds: dict = field(default_factory=dict)  # rule -> theorem name
    outputs: dict = field(default_factory=dict)
    base_dir: Path = Path(".")

    @classmethod
    def from_dict(cls, obj: dict, base_dir: Path | str = ".") -> ExperimentConfig:
        if not isinstance(obj, dict):
            raise ConfigParseError("config must be a JSON object")
        version = obj.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigParseError(f"unsupported schema_version {version!r}")
        sources = obj.get("instances")
        if not isinstance(sources, list) or not sources:
            raise ConfigParseError("config needs a non-empty 'instances' list")
        rules = obj.get("rules")
        if not isinstance(rules, list) or not rules:
            raise ConfigParseError("config needs a non-empty 'rules' list")
        for r in rules:
            if not valid_rule(r):
                raise ConfigParseError(f"unknown rule {r!r}")
        try:
            op = BinaryOperator.parse(obj.get("operator", "sum"))
        except DistortionLabError as exc:
            raise ConfigParseError(str(exc)) from None
        bounds = obj.get("bounds", {})
        if isinstance(bounds, str):
            bounds = {r: bounds for r in rules}
        if not isinstance(bounds, dict):
            raise ConfigParseError("'bounds' must be a theorem name or a rule -> theorem map")
        for r, thm in bounds.items():
            if thm.upper() not in G.THEOREMS:
                raise ConfigParseError(f"unknown theorem {thm!r} for rule {r!r}")
        expand_instances(sources)
        return cls(sources, list(rules), op, dict(bounds), dict(obj.get("outputs", {})),
                   Path(base_dir))

    @classmethod
    def load(cls, path) -> ExperimentConfig:
        path = Path(path)
        try:
            obj = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigParseError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(obj, path.parent)


# ---------------------------------------------------------------------------
# running


@dataclass
class ReportRow:
    instance_id: str
    rule: str
    winner: str = ""
    social_cost: float | None = None
    realized_distortion: float | None = None
    bound: float | None = None
    margin: float | None = None
    passed: bool | None = None
    error: str = ""

    def csv_values(self) -> list[str]:
        def num(x):
            return "" if x is None else repr(float(x))

        passed = "error" if self.error else ("" if self.passed is None else str(self.passed).lower())
        return [self.instance_id, self.rule, self.winner, num(self.social_cost),
                num(self.realized_distortion), num(self.bound), num(self.margin), passed]


def instance_bound(theorem: str, e: Election) -> float:
    """Evaluate a theorem's bound with parameters read off the instance."""
    name = theorem.upper()
    m = e.m_candidates
    if name == "GENERAL":
        return G.bound_value(name, m=m)
    if name == "DOUBLING":
        D = e.require_embedding().metric
        mode = "exact" if D.n_points <= 24 else "greedy"
        return G.bound_value(name, lam=doubling_constant(D, mode=mode).lam, m=m)
    if name == "PM_RHO":
        return G.bound_value(name, rho=e.require_embedding().metric.class_tag.effective_rho)
    return G.bound_value(name)


def evaluate(e: Election, instance_id: str, rule: str, op: BinaryOperator,
             theorem: str | None) -> list[ReportRow]:
    try:
        winners = rule_winners(rule, e)
    except DistortionLabError as exc:
        return [ReportRow(instance_id, rule, error=f"{type(exc).__name__}: {exc}")]
    rows = []
    bound = None
    for w in winners:
        row = ReportRow(instance_id, rule, e.candidates[w])
        if e.embedding is not None:
            row.social_cost = social_cost(e, w, op)
            row.realized_distortion = realized_distortion(e, w, op)
            if theorem:
                try:
                    if bound is None:
                        bound = instance_bound(theorem, e)
                except DistortionLabError as exc:
                    row.error = f"{type(exc).__name__}: {exc}"
                else:
                    row.bound = bound
                    row.margin = bound - row.realized_distortion
                    row.passed = bool(row.margin >= -REL_TOL * bound)
        rows.append(row)
    return rows


@dataclass
class Report:
    rows: list
    n_instances: int
    load_errors: list

    @property
    def violations(self) -> int:
        return sum(1 for r in self.rows if r.passed is False)

    @property
    def errors(self) -> int:
        return sum(1 for r in self.rows if r.error) + len(self.load_errors)

    @property
    def exit_code(self) -> int:
        if self.violations:
            return 2
        return 1 if self.errors else 0

    def to_csv(self) -> str:
        buf = _io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow(r.csv_values())
        return buf.getvalue()

    def summary(self) -> dict:
        by_rule: dict = {}
        for r in self.rows:
            s = by_rule.setdefault(r.rule, {"rows": 0, "checked": 0, "failed": 0, "errors": 0,
                                            "max_distortion": None, "min_margin": None})
            s["rows"] += 1
            s["errors"] += bool(r.error)
            d = r.realized_distortion
            if d is not None and math.isfinite(d):
                s["max_distortion"] = d if s["max_distortion"] is None else max(s["max_distortion"], d)
            if r.passed is not None:
                s["checked"] += 1
                s["failed"] += not r.passed
                s["min_margin"] = r.margin if s["min_margin"] is None else min(s["min_margin"], r.margin)
        return {"instances": self.n_instances, "violations": self.violations,
                "errors": self.errors, "rules": by_rule}

    def to_json(self) -> str:
        rows = [{k: v for k, v in asdict(r).items()} for r in self.rows]
        for r in rows:
            for k in ("social_cost", "realized_distortion", "margin"):
                if isinstance(r[k], float) and not math.isfinite(r[k]):
                    r[k] = str(r[k])
        obj = {"schema_version": SCHEMA_VERSION, "summary": self.summary(),
               "load_errors": self.load_errors, "rows": rows}
        return json.dumps(obj, indent=1) + "\n"


def run_experiment(cfg: ExperimentConfig) -> Report:
    """Run every rule on every instance; rows are ordered by instance id, then rule order.

    A failure to load one instance or to run one rule is recorded and the
    sweep continues.  Outputs named in ``cfg.outputs`` are written.
    """
    refs = sorted(expand_instances(cfg.instances), key=lambda r: r.instance_id)
    rows, load_errors = [], []
    for ref in refs:
        try:
            e = ref.load(cfg.base_dir)
        except (InstanceLoadError, DistortionLabError) as exc:
            load_errors.append({"instance_id": ref.instance_id,
                                "error": f"{type(exc).__name__}: {exc}"})
            continue
        for rule in cfg.rules:
            rows.extend(evaluate(e, ref.instance_id, rule, cfg.operator, cfg.bounds.get(rule)))
    report = Report(rows, len(refs), load_errors)
    if "csv" in cfg.outputs:
        Path(cfg.base_dir, cfg.outputs["csv"]).write_text(report.to_csv())
    if "json" in cfg.outputs:
        Path(cfg.base_dir, cfg.outputs["json"]).write_text(report.to_json())
    return report


def read_report_csv(text: str) -> list[dict]:
    return list(csv.DictReader(_io.StringIO(text)))
