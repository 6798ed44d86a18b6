"""JSON file formats for metrics and elections.

Metric files hold either an explicit matrix::

    {"labels": [...], "class": "general|ultra|rho:<r>|op:<sum|max>", "d": [[...], ...]}

or a weighted graph closed under shortest-path or minimax distances::

    {"graph": {"n": 4, "edges": [[u, v, w], ...]}, "mode": "shortest_path|minimax"}

Election files hold ``n``, ``m``, ``profile`` (one ranking per voter, most
preferred first), optional ``candidates`` names, optional ``meta`` and an
optional ``embedding`` with ``metric`` (an inline metric object or a path
relative to the election file), ``voter_points`` and ``candidate_points``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .election import Election, Embedding
from .errors import DistortionLabError, InstanceLoadError
from .metric import DistanceMatrix, GraphSpec, minimax_metric, shortest_path_metric

GRAPH_MODES = {"shortest_path": shortest_path_metric, "minimax": minimax_metric}


def _plain(obj: Any) -> Any:
    """Recursively convert numpy scalars/arrays and tuples to JSON types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def metric_to_dict(D: DistanceMatrix) -> dict:
    return {"labels": list(D.labels), "class": str(D.class_tag), "d": D.d.tolist()}


def metric_from_dict(obj: dict) -> DistanceMatrix:
    try:
        if "graph" in obj:
            g = obj["graph"]
            mode = obj.get("mode", "shortest_path")
            if mode not in GRAPH_MODES:
                raise InstanceLoadError(f"unknown graph mode {mode!r}")
            edges = tuple((int(u), int(v), float(w)) for u, v, w in g["edges"])
            spec = GraphSpec(int(g["n"]), edges, tuple(g.get("labels", ())))
            return GRAPH_MODES[mode](spec)
        return DistanceMatrix(np.asarray(obj["d"], dtype=float), tuple(obj.get("labels", ())),
                              obj.get("class", "general"))
    except KeyError as exc:
        raise InstanceLoadError(f"metric object is missing field {exc}") from None


def election_to_dict(e: Election) -> dict:
    out = {"n": e.n_voters, "m": e.m_candidates, "candidates": list(e.candidates),
           "profile": e.profile.tolist()}
    if e.embedding is not None:
        emb = e.embedding
        out["embedding"] = {"metric": metric_to_dict(emb.metric),
                            "voter_points": list(emb.voter_points),
                            "candidate_points": list(emb.candidate_points)}
    if e.meta:
        out["meta"] = _plain(e.meta)
    return out


def election_from_dict(obj: dict, base: Path | None = None) -> Election:
    try:
        profile = np.asarray(obj["profile"], dtype=int)
        n, m = obj.get("n"), obj.get("m")
        if profile.ndim != 2 or (n is not None and profile.shape[0] != n) or (
                m is not None and profile.shape[1] != m):
            raise InstanceLoadError(f"profile shape {profile.shape} does not match n={n}, m={m}")
        emb = None
        if obj.get("embedding") is not None:
            spec = obj["embedding"]
            ref = spec["metric"]
            if isinstance(ref, str):
                D = load_metric((base or Path(".")) / ref)
            else:
                D = metric_from_dict(ref)
            emb = Embedding(D, tuple(spec["voter_points"]), tuple(spec["candidate_points"]))
        return Election(profile, tuple(obj.get("candidates", ())), emb, dict(obj.get("meta", {})))
    except KeyError as exc:
        raise InstanceLoadError(f"election object is missing field {exc}") from None


def _read(path: Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InstanceLoadError(f"cannot read {path}: {exc}") from None


def load_metric(path) -> DistanceMatrix:
    try:
        return metric_from_dict(_read(Path(path)))
    except InstanceLoadError:
        raise
    except (DistortionLabError, ValueError, TypeError) as exc:
        raise InstanceLoadError(f"{path}: {exc}") from None


def load_election(path) -> Election:
    path = Path(path)
    try:
        return election_from_dict(_read(path), path.parent)
    except InstanceLoadError:
        raise
    except (DistortionLabError, ValueError, TypeError) as exc:
        raise InstanceLoadError(f"{path}: {exc}") from None


def dumps(obj: dict) -> str:
    return json.dumps(_plain(obj), indent=1, sort_keys=False) + "\n"


def save_metric(D: DistanceMatrix, path) -> None:
    Path(path).write_text(dumps(metric_to_dict(D)))


def save_election(e: Election, path) -> None:
    Path(path).write_text(dumps(election_to_dict(e)))
