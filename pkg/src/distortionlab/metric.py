"""Finite metric spaces.

Distances live in a dense, read-only ``numpy`` matrix together with a tag
naming the inequality the matrix is claimed to satisfy (plain triangle,
ultra-metric, rho-relaxed triangle, or a triangle inequality with respect to
a binary operator).  Constructors build matrices from graphs (shortest path
or bottleneck/minimax path costs) and from point embeddings; the remaining
functions measure the space: axiom checks, doubling constant, ball covers
and aspect ratio.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    AsymmetricInputError,
    DegenerateSubsetError,
    DimensionMismatchError,
    DisconnectedGraphError,
    InvalidInputError,
    InvalidRadiiError,
    NegativeDistanceError,
    NonSquareError,
    TooLargeForExactError,
)

DEFAULT_TOL = 1e-9
EXACT_LIMIT = 24


class BinaryOperator(enum.Enum):
    """Aggregation operator used both for social cost and for the
    operator-generalised triangle inequality."""

    SUM = "sum"
    MAX = "max"

    def apply(self, x, y):
        if self is BinaryOperator.SUM:
            return x + y
        return np.maximum(x, y)

    def fold(self, values) -> float:
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            return 0.0
        if self is BinaryOperator.SUM:
            return float(values.sum())
        return float(values.max())

    @property
    def idempotent(self) -> bool:
        return self is BinaryOperator.MAX

    @classmethod
    def parse(cls, name: str | BinaryOperator) -> BinaryOperator:
        if isinstance(name, BinaryOperator):
            return name
        try:
            return cls(name.lower())
        except ValueError:
            raise InvalidInputError(f"unknown operator {name!r}") from None


@dataclass(frozen=True)
class MetricClass:
    """Which triangle-type inequality a distance matrix satisfies.

    Use the module constants ``GENERAL`` and ``ULTRA`` or the factories
    :func:`rho_approx` and :func:`operator_class`.
    """

    kind: str
    rho: float | None = None
    op: BinaryOperator | None = None

    def __post_init__(self):
        if self.kind not in ("general", "ultra", "rho", "operator"):
            raise InvalidInputError(f"unknown metric class {self.kind!r}")
        if self.kind == "rho" and (self.rho is None or not self.rho >= 1):
            raise InvalidInputError("rho must be >= 1")
        if self.kind == "operator" and self.op is None:
            raise InvalidInputError("operator class needs an operator")

    def combine(self, a, b):
        """Right-hand side of the class inequality d(x,z) <= combine(d(x,y), d(y,z))."""
        if self.kind == "general":
            return a + b
        if self.kind == "ultra":
            return np.maximum(a, b)
        if self.kind == "rho":
            return self.rho * (a + b)
        return self.op.apply(a, b)

    @property
    def effective_rho(self) -> float:
        """Smallest rho for which this class implies the rho-relaxed triangle."""
        if self.kind == "rho":
            return float(self.rho)
        return 1.0

    def __str__(self) -> str:
        if self.kind == "rho":
            return f"rho:{self.rho:g}"
        if self.kind == "operator":
            return f"op:{self.op.value}"
        return self.kind

    @classmethod
    def parse(cls, text: str | MetricClass) -> MetricClass:
        if isinstance(text, MetricClass):
            return text
        text = text.strip().lower()
        if text in ("general", "ultra"):
            return cls(text)
        if text.startswith("rho:"):
            return rho_approx(float(text[4:]))
        if text.startswith("op:"):
            return operator_class(BinaryOperator.parse(text[3:]))
        raise InvalidInputError(f"cannot parse metric class {text!r}")


GENERAL = MetricClass("general")
ULTRA = MetricClass("ultra")


def rho_approx(rho: float) -> MetricClass:
    return MetricClass("rho", rho=float(rho))


def operator_class(op: BinaryOperator) -> MetricClass:
    return MetricClass("operator", op=op)


class PointId(NamedTuple):
    index: int
    label: str


def _validate_square(d: np.ndarray, tol: float) -> None:
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise NonSquareError(f"distance matrix must be square, got shape {d.shape}")
    if np.isnan(d).any():
        raise InvalidInputError("distance matrix contains NaN")
    if (d < -tol).any():
        raise NegativeDistanceError("distance matrix has negative entries")
    if not np.allclose(d, d.T, rtol=0.0, atol=tol):
        raise AsymmetricInputError("distance matrix is not symmetric")
    if np.abs(np.diag(d)).max(initial=0.0) > tol:
        raise InvalidInputError("distance matrix has a nonzero diagonal")


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric, nonnegative, zero-diagonal matrix over labelled points.

    Distinct points may sit at distance zero (pseudometric closure).
    """

    d: np.ndarray
    labels: tuple[str, ...] = ()
    class_tag: MetricClass = GENERAL
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        d = np.array(self.d, dtype=float)
        _validate_square(d, DEFAULT_TOL)
        d = np.maximum((d + d.T) / 2.0, 0.0)
        np.fill_diagonal(d, 0.0)
        d.setflags(write=False)
        n = d.shape[0]
        labels = tuple(str(x) for x in self.labels) if self.labels else tuple(
            f"p{i}" for i in range(n))
        if len(labels) != n:
            raise InvalidInputError(f"{len(labels)} labels for {n} points")
        if len(set(labels)) != n:
            raise InvalidInputError("point labels must be unique")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_tag", MetricClass.parse(self.class_tag))
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(labels)})

    @property
    def n_points(self) -> int:
        return self.d.shape[0]

    def __len__(self) -> int:
        return self.n_points

    def __getitem__(self, key):
        return self.d[key]

    def point(self, ref: int | str) -> PointId:
        return PointId(self.index(ref), self.labels[self.index(ref)])

    def points(self) -> list[PointId]:
        return [PointId(i, lab) for i, lab in enumerate(self.labels)]

    def index(self, ref: int | str) -> int:
        if isinstance(ref, (int, np.integer)):
            if not 0 <= ref < self.n_points:
                raise IndexError(f"point index {ref} out of range")
            return int(ref)
        return self._index[ref]

    def submetric(self, indices: Sequence[int]) -> DistanceMatrix:
        idx = np.asarray(list(indices), dtype=int)
        return DistanceMatrix(self.d[np.ix_(idx, idx)],
                              tuple(self.labels[i] for i in idx), self.class_tag)

    def with_class(self, cls: MetricClass | str) -> DistanceMatrix:
        return DistanceMatrix(self.d, self.labels, MetricClass.parse(cls))


def as_distance_matrix(D, cls: MetricClass | str | None = None) -> DistanceMatrix:
    if isinstance(D, DistanceMatrix):
        return D if cls is None else D.with_class(cls)
    return DistanceMatrix(np.asarray(D, dtype=float), (), cls or GENERAL)


# ---------------------------------------------------------------------------
# axiom checks


class Violation(NamedTuple):
    x: int
    y: int
    z: int
    slack: float  # d(x, z) - rhs, positive when violated


@dataclass
class ViolationReport:
    violations: list = field(default_factory=list)
    total: int = 0

    @property
    def ok(self) -> bool:
        return self.total == 0

    def __len__(self) -> int:
        return self.total

    def __bool__(self) -> bool:
        return self.total > 0

    @property
    def worst(self) -> float:
        return max((v.slack for v in self.violations), default=0.0)


def check_metric(D, cls: MetricClass | str | None = None, tol: float = DEFAULT_TOL,
                 max_items: int = 1000) -> ViolationReport:
    """Scan every ordered triple (x, y, z) for d(x,z) > rhs(d(x,y), d(y,z)) + tol.

    ``cls`` defaults to the matrix's own tag.  At most ``max_items``
    violations are stored; ``total`` counts all of them.
    """
    if not isinstance(D, DistanceMatrix):
        arr = np.asarray(D, dtype=float)
        _validate_square(arr, tol)
        D = DistanceMatrix(arr)
    cls = MetricClass.parse(cls) if cls is not None else D.class_tag
    d = D.d
    report = ViolationReport()
    for y in range(d.shape[0]):
        rhs = cls.combine(d[:, y][:, None], d[y, :][None, :])
        excess = d - rhs
        bad = np.argwhere(excess > tol)
        if len(bad):
            report.total += len(bad)
            room = max_items - len(report.violations)
            for x, z in bad[:max(room, 0)]:
                report.violations.append(Violation(int(x), y, int(z), float(excess[x, z])))
    return report


# ---------------------------------------------------------------------------
# constructors


@dataclass(frozen=True)
class GraphSpec:
    n_nodes: int
    edges: tuple[tuple[int, int, float], ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        edges = tuple((int(u), int(v), float(w)) for u, v, w in self.edges)
        for u, v, w in edges:
            if u == v:
                raise InvalidInputError(f"self-loop at node {u}")
            if not (0 <= u < self.n_nodes and 0 <= v < self.n_nodes):
                raise InvalidInputError(f"edge ({u}, {v}) out of range")
            if w < 0 or math.isnan(w):
                raise NegativeDistanceError(f"edge ({u}, {v}) has weight {w}")
        object.__setattr__(self, "edges", edges)

    @property
    def connected(self) -> bool:
        if self.n_nodes <= 1:
            return True
        adj = [[] for _ in range(self.n_nodes)]
        for u, v, _ in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        seen = {0}
        stack = [0]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == self.n_nodes

    def weight_matrix(self) -> np.ndarray:
        """Direct-edge weights (inf where no edge; parallel edges keep the lightest)."""
        w = np.full((self.n_nodes, self.n_nodes), np.inf)
        np.fill_diagonal(w, 0.0)
        for u, v, c in self.edges:
            if c < w[u, v]:
                w[u, v] = w[v, u] = c
        return w


def _closure(g: GraphSpec, combine) -> np.ndarray:
    if not g.connected:
        raise DisconnectedGraphError("graph is not connected; metric undefined")
    d = g.weight_matrix()
    for k in range(g.n_nodes):
        d = np.minimum(d, combine(d[:, k][:, None], d[k, :][None, :]))
    return d


def shortest_path_metric(g: GraphSpec) -> DistanceMatrix:
    """All-pairs shortest-path lengths (Floyd-Warshall, O(n^3))."""
    return DistanceMatrix(_closure(g, np.add), g.labels, GENERAL)


def minimax_metric(g: GraphSpec) -> DistanceMatrix:
    """Bottleneck distances: min over paths of the heaviest edge on the path.

    Tagged ULTRA; the min-max closure satisfies d(x,z) <= max(d(x,y), d(y,z)).
    """
    return DistanceMatrix(_closure(g, np.maximum), g.labels, ULTRA)


SQUARED = "squared"


def euclidean_metric(points, p_norm: float | str = 2.0,
                     labels: Sequence[str] = ()) -> DistanceMatrix:
    """Pairwise l_p distances, or squared Euclidean distances for ``p_norm=SQUARED``.

    Squared distances are a 2-approximate metric and are tagged ``rho:2``.
    """
    rows = [np.atleast_1d(np.asarray(p, dtype=float)) for p in points]
    if len({r.shape for r in rows}) > 1:
        raise DimensionMismatchError("all points must have the same dimension")
    pts = np.vstack(rows) if rows else np.zeros((0, 1))
    diff = pts[:, None, :] - pts[None, :, :]
    if p_norm == SQUARED:
        return DistanceMatrix((diff ** 2).sum(axis=-1), tuple(labels), rho_approx(2.0))
    p = float(p_norm)
    if p < 1:
        raise InvalidInputError("p_norm must be >= 1")
    return DistanceMatrix(np.linalg.norm(diff, ord=p, axis=-1), tuple(labels), GENERAL)


# ---------------------------------------------------------------------------
# covering and doubling


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _greedy_cover(universe: int, sets: Sequence[int]) -> list[int]:
    chosen = []
    left = universe
    while left:
        best = max(range(len(sets)), key=lambda k: _popcount(sets[k] & left))
        if not sets[best] & left:
            raise InvalidInputError("sets do not cover the universe")
        chosen.append(best)
        left &= ~sets[best]
    return chosen


def _exact_cover(universe: int, sets: Sequence[int]) -> list[int]:
    """Minimum set cover by branch and bound over bitmask sets."""
    # drop empty, duplicate and dominated sets; remember original positions
    cand = {}
    for k, s in enumerate(sets):
        s &= universe
        if s and s not in cand:
            cand[s] = k
    order = sorted(cand, key=_popcount, reverse=True)
    kept = []
    for s in order:
        if not any(s | t == t for t in kept):
            kept.append(s)
    best = [cand[kept[k]] for k in _greedy_cover(universe, kept)]
    if len(best) <= 1:
        return best
    max_size = _popcount(kept[0])
    elements = [b for b in range(universe.bit_length()) if universe >> b & 1]
    covering = {e: [s for s in kept if s >> e & 1] for e in elements}

    def search(left: int, chosen: list[int]):
        nonlocal best
        if not left:
            if len(chosen) < len(best):
                best = [cand[s] for s in chosen]
            return
        if len(chosen) + -(-_popcount(left) // max_size) >= len(best):
            return
        # branch on the uncovered element with the fewest covering sets
        e = min((b for b in elements if left >> b & 1), key=lambda b: len(covering[b]))
        for s in sorted(covering[e], key=lambda t: _popcount(t & left), reverse=True):
            chosen.append(s)
            search(left & ~s, chosen)
            chosen.pop()

    search(universe, [])
    return best


def _ball_masks(d: np.ndarray, r: float) -> list[int]:
    inside = d < r
    weights = 1 << np.arange(d.shape[1], dtype=object)
    return [int(weights[row].sum()) for row in inside]


def min_ball_cover(D: DistanceMatrix, x: int, r: float, mode: str = "exact") -> list[int]:
    """Centers of a smallest family of open balls B(s, r/2) covering B(x, r).

    With ``mode="greedy"`` the family is a greedy set cover (an upper bound).
    """
    d = as_distance_matrix(D).d
    universe = _ball_masks(d[[x]], r)[0]
    sets = _ball_masks(d, r / 2.0)
    chosen = _exact_cover(universe, sets) if mode == "exact" else _greedy_cover(universe, sets)
    return sorted(chosen)


def _radius_grid(d: np.ndarray) -> np.ndarray:
    vals = np.unique(d[np.triu_indices(d.shape[0], 1)])
    vals = vals[vals > 0]
    if vals.size == 0:
        return np.array([1.0])
    bps = np.unique(np.concatenate([vals, vals / 2.0]))
    mids = (bps[:-1] + bps[1:]) / 2.0
    return np.unique(np.concatenate([[bps[0] / 2.0], bps, mids, [bps[-1] * 2.0]]))


class DoublingResult(NamedTuple):
    lam: int
    dim: float


def doubling_constant(D, mode: str = "exact") -> DoublingResult:
    """Doubling constant over open balls and the dimension log2(lambda).

    Both ball families are piecewise constant in r, changing only where r or
    2r equals a pairwise distance; the scan visits every such breakpoint and
    every midpoint between consecutive ones.  ``mode="exact"`` solves each
    cover exactly (at most 24 points); ``mode="greedy"`` returns an upper
    bound.
    """
    D = as_distance_matrix(D)
    mode = mode.lower()
    if mode not in ("exact", "greedy"):
        raise InvalidInputError(f"unknown mode {mode!r}")
    if mode == "exact" and D.n_points > EXACT_LIMIT:
        raise TooLargeForExactError(
            f"exact doubling constant is capped at {EXACT_LIMIT} points, got {D.n_points}")
    d = D.d
    solve = _exact_cover if mode == "exact" else _greedy_cover
    seen: dict = {}
    lam = 1
    for r in _radius_grid(d):
        sets = _ball_masks(d, r)
        big = _ball_masks(d, 2.0 * r)
        for x in range(D.n_points):
            universe = big[x]
            family = tuple(sorted({s & universe for s in sets if s & universe}))
            key = (universe, family)
            if key not in seen:
                seen[key] = len(solve(universe, list(family)))
            lam = max(lam, seen[key])
    return DoublingResult(lam, math.log2(lam))


def cover_ball(D, x: int, r: float, eps: float, mode: str = "exact") -> list[tuple[int, float]]:
    """Cover the open ball B(x, r) by balls of radius at most ``eps``.

    Halves the radius ceil(log2(r/eps)) times; each ball is replaced by a
    minimum cover of its in-target points by balls of half the radius, so the
    result has at most lambda**ceil(log2(r/eps)) balls.
    """
    D = as_distance_matrix(D)
    if not (r > 0 and eps > 0) or eps > r:
        raise InvalidRadiiError(f"need 0 < eps <= r, got r={r}, eps={eps}")
    d = D.d
    steps = max(0, math.ceil(math.log2(r / eps) - 1e-12))
    target = d[x] < r
    balls = [(int(x), float(r))]
    for _ in range(steps):
        nxt: dict = {}
        for c, rad in balls:
            members = np.flatnonzero(target & (d[c] < rad))
            if members.size == 0:
                continue
            universe = int(sum(1 << int(p) for p in members))
            half = rad / 2.0
            sets = _ball_masks(d, half)
            solve = _exact_cover if mode == "exact" else _greedy_cover
            for s in solve(universe, sets):
                nxt[(s, half)] = None
        balls = list(nxt)
    return balls


def covers(D, balls: Iterable[tuple[int, float]], x: int, r: float) -> bool:
    """True if every point of B(x, r) lies in some listed open ball."""
    d = as_distance_matrix(D).d
    hit = np.zeros(d.shape[0], dtype=bool)
    for c, rad in balls:
        hit |= d[c] < rad
    return bool(np.all(hit[d[x] < r]))


def aspect_ratio(D, subset: Sequence[int] | None = None) -> float:
    d = as_distance_matrix(D).d
    idx = np.arange(d.shape[0]) if subset is None else np.asarray(list(subset), dtype=int)
    if idx.size < 2:
        raise DegenerateSubsetError("aspect ratio needs at least two points")
    sub = d[np.ix_(idx, idx)][np.triu_indices(idx.size, 1)]
    pos = sub[sub > 0]
    if pos.size == 0:
        raise DegenerateSubsetError("all points coincide")
    return float(pos.max() / pos.min())


def uniform_metric(k: int, labels: Sequence[str] = ()) -> DistanceMatrix:
    """Discrete metric on k points (every distinct pair at distance 1)."""
    d = np.ones((k, k)) - np.eye(k)
    return DistanceMatrix(d, tuple(labels), ULTRA)

