"""Instance factories: lower-bound constructions, random embedded elections,
and closed-form distortion bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .election import Election, derive_profile
from .errors import (
    EpsOutOfRangeError,
    HeightTooLargeError,
    InvalidInputError,
    InvalidSizeError,
    NonpositiveDeltaError,
    OddNError,
    UnknownTheoremError,
)
from .metric import (
    SQUARED,
    DistanceMatrix,
    GraphSpec,
    euclidean_metric,
    minimax_metric,
    rho_approx,
    shortest_path_metric,
)

MAX_TREE_HEIGHT = 4


# ---------------------------------------------------------------------------
# STV tree lower bound


@dataclass(frozen=True)
class TreeLBSpec:
    """Sizes of the layered tree used against STV.

    Layer 0 holds the leaves, layer h the root.  Branching factors follow
    b_1 = 2, b_{i+1} = 2(b_i + 1); the leaf count is their product so that
    every layer size is an integer.
    """

    height: int
    branching: tuple  # b_1..b_h
    layer_sizes: tuple  # m_0..m_h
    nu: tuple  # voters per node, layers 0..h
    extra_candidates: int = 1

    @property
    def lam(self) -> int:
        return self.layer_sizes[0]

    @property
    def layer_voters(self) -> tuple:
        return tuple(v * s for v, s in zip(self.nu, self.layer_sizes))


def tree_lb_spec(h: int, extra_candidates: int = 1) -> TreeLBSpec:
    if h < 1:
        raise InvalidInputError("height must be >= 1")
    if h > MAX_TREE_HEIGHT:
        raise HeightTooLargeError(f"height {h} > {MAX_TREE_HEIGHT}: leaf count grows like 2^(h(h+1))")
    if extra_candidates < 1:
        raise InvalidInputError("need at least one candidate at the hub")
    b = [2]
    for _ in range(h - 1):
        b.append(2 * (b[-1] + 1))
    lam = math.prod(b)
    sizes = [lam]
    for bi in b:
        sizes.append(sizes[-1] // bi)
    nu = [1]
    for bi in [0] + b[:-1]:
        nu.append((bi + 1) * nu[-1])
    return TreeLBSpec(h, tuple(b), tuple(sizes), tuple(nu), extra_candidates)


def gen_stv_tree_lb(h: int, extra_candidates: int = 1):
    """Tree instance on which STV can elect the root although the hub is far better.

    Candidates: ``extra_candidates`` at the hub (index 0 is ``x``), then one per
    tree node layer by layer, the root last (``w``).  nu_i voters sit on every
    layer-i node.  Returns ``(election, witness)`` where the witness eliminates
    the hub candidates, then layers 0..h-1.
    """
    spec = tree_lb_spec(h, extra_candidates)
    # node ids: layer 0 first, ..., root, then the hub
    offsets = np.concatenate([[0], np.cumsum(spec.layer_sizes)]).astype(int)
    n_tree = int(offsets[-1])
    hub = n_tree
    edges = []
    for layer in range(1, h + 1):
        bf = spec.branching[layer - 1]
        for j in range(spec.layer_sizes[layer]):
            parent = offsets[layer] + j
            for c in range(bf):
                edges.append((parent, offsets[layer - 1] + j * bf + c, 1.0))
    for leaf in range(spec.layer_sizes[0]):
        edges.append((hub, leaf, 1.0))
    labels = [f"L{layer}_{j}" for layer in range(h + 1) for j in range(spec.layer_sizes[layer])]
    labels[-1] = "root"
    labels.append("hub")
    D = shortest_path_metric(GraphSpec(n_tree + 1, tuple(edges), tuple(labels)))

    cand_points = [hub] * extra_candidates + list(range(n_tree))
    cand_names = ["x"] + [f"x{k}" for k in range(1, extra_candidates)] + labels[:-1]
    cand_names[-1] = "w"
    voter_points = []
    for layer in range(h + 1):
        for j in range(spec.layer_sizes[layer]):
            voter_points += [offsets[layer] + j] * spec.nu[layer]
    w = len(cand_points) - 1
    witness = tuple(range(len(cand_points) - 1))
    meta = {"instance": f"stv_tree_lb(h={h})", "w": w, "x": 0, "lambda": spec.lam,
            "height": h, "branching": list(spec.branching),
            "layer_sizes": list(spec.layer_sizes), "nu": list(spec.nu),
            "layer_voters": list(spec.layer_voters), "witness": list(witness)}
    e = derive_profile(D, voter_points, cand_points, cand_names, meta=meta)
    return e, witness


def tree_candidate_points(e: Election) -> list[int]:
    """Distinct metric points carrying candidates (the candidate submetric)."""
    return sorted(set(e.require_embedding().candidate_points))


# ---------------------------------------------------------------------------
# two-candidate lower bounds


def gen_split_profile(n_half: int = 1) -> Election:
    """Two candidates, half the voters rank a first, half rank b first. No embedding."""
    if n_half < 1:
        raise InvalidSizeError("n_half must be >= 1")
    prof = [[0, 1]] * n_half + [[1, 0]] * n_half
    return Election(np.array(prof), ("a", "b"), None, {"instance": f"split(n_half={n_half})"})


def gen_ultrametric_lb(n: int) -> Election:
    """Three-node unit path under minimax distances: a and its n/2 supporters on
    the left node, b's n/2 supporters on the middle node, b on the right."""
    if n < 2 or n % 2:
        raise OddNError(f"n must be even and >= 2, got {n}")
    D = minimax_metric(GraphSpec(3, ((0, 1, 1.0), (1, 2, 1.0)), ("left", "middle", "right")))
    half = n // 2
    voters = [0] * half + [1] * half
    overrides = {i: [1, 0] for i in range(half, n)}
    return derive_profile(D, voters, [0, 2], ("a", "b"), overrides,
                          meta={"instance": f"ultrametric_lb(n={n})", "a": 0, "b": 1})


def rho_lb_matrix(rho: float, eps: float) -> np.ndarray:
    """Four-point rho-approximate matrix over (x, y, z, omega)."""
    r, e = float(rho), float(eps)
    return np.array([
        [0.0, 1.0, 2 * r, e],
        [1.0, 0.0, 1.0, r + r * e],
        [2 * r, 1.0, 0.0, r * r + r + r * e],
        [e, r + r * e, r * r + r + r * e, 0.0],
    ])


def gen_rho_lb(rho: float, eps: float, n_half: int = 1) -> Election:
    """a at x with supporters at omega, b at z with supporters at y.

    Realized distortion of b: (rho^2 + rho + rho*eps + 1) / (eps + 1).
    """
    if not 0.0 < eps < 1.0:
        raise EpsOutOfRangeError(f"eps must lie in (0, 1), got {eps}")
    if not rho >= 1:
        raise InvalidInputError("rho must be >= 1")
    if n_half < 1:
        raise InvalidSizeError("n_half must be >= 1")
    D = DistanceMatrix(rho_lb_matrix(rho, eps), ("x", "y", "z", "omega"), rho_approx(rho))
    voters = [3] * n_half + [1] * n_half
    overrides = {i: [1, 0] for i in range(n_half, 2 * n_half)}
    return derive_profile(D, voters, [0, 2], ("a", "b"), overrides,
                          meta={"instance": f"rho_lb(rho={rho:g},eps={eps:g})", "a": 0, "b": 1})


def rho_lb_ratio(rho: float, eps: float) -> float:
    return (rho * rho + rho + rho * eps + 1) / (eps + 1)


def gen_sq_euclid_lb(delta: float, n_half: int = 1) -> Election:
    """Squared Euclidean distances on a line: a at 0, b at 2, b's supporters at 1
    (equidistant, ranking b first), a's supporters at -delta.

    Realized distortion of b: (delta^2 + 4 delta + 5) / (delta^2 + 1).
    """
    if not delta > 0:
        raise NonpositiveDeltaError(f"delta must be positive, got {delta}")
    if n_half < 1:
        raise InvalidSizeError("n_half must be >= 1")
    D = euclidean_metric([[0.0], [2.0], [-float(delta)], [1.0]], SQUARED,
                         ("a", "b", "a_voters", "b_voters"))
    voters = [2] * n_half + [3] * n_half
    overrides = {i: [1, 0] for i in range(n_half, 2 * n_half)}
    return derive_profile(D, voters, [0, 1], ("a", "b"), overrides,
                          meta={"instance": f"sq_euclid_lb(delta={delta:g})", "a": 0, "b": 1})


def sq_euclid_ratio(delta: float) -> float:
    return (delta * delta + 4 * delta + 5) / (delta * delta + 1)


# ---------------------------------------------------------------------------
# random instances


def _check_sizes(n: int, m: int) -> None:
    if n < 1 or m < 1:
        raise InvalidSizeError(f"need n >= 1 and m >= 1, got n={n}, m={m}")


def _labels(n: int, m: int) -> tuple:
    return tuple(f"v{i}" for i in range(n)) + tuple(f"c{a}" for a in range(m))


def gen_random_euclidean(n: int, m: int, dim: int = 1, p_norm: float | str = 2.0,
                         seed: int = 0) -> Election:
    """Voters and candidates i.i.d. uniform on [0, 1]^dim."""
    _check_sizes(n, m)
    if dim < 1:
        raise InvalidSizeError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(size=(n + m, dim))
    D = euclidean_metric(pts, p_norm, _labels(n, m))
    return derive_profile(D, range(n), range(n, n + m),
                          meta={"instance": f"euclidean(n={n},m={m},dim={dim},p={p_norm},seed={seed})",
                                "seed": seed})


def gen_random_power(n: int, m: int, dim: int = 1, power: float = 2.0, seed: int = 0) -> Election:
    """Euclidean distances raised to ``power`` >= 1: a 2^(power-1)-approximate metric."""
    _check_sizes(n, m)
    if power < 1:
        raise InvalidInputError("power must be >= 1")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(size=(n + m, dim))
    base = euclidean_metric(pts, 2.0).d
    D = DistanceMatrix(base ** power, _labels(n, m), rho_approx(2.0 ** (power - 1)))
    return derive_profile(D, range(n), range(n, n + m),
                          meta={"instance": f"power(n={n},m={m},dim={dim},power={power:g},seed={seed})",
                                "seed": seed})


def random_graph(n_nodes: int, edge_prob: float, rng: np.random.Generator,
                 max_weight: int = 10) -> GraphSpec:
    """Connected graph: a random spanning tree plus independent extra edges,
    integer weights in 1..max_weight."""
    order = rng.permutation(n_nodes)
    edges = {}
    for k in range(1, n_nodes):
        u, v = int(order[k]), int(order[rng.integers(k)])
        edges[(min(u, v), max(u, v))] = float(rng.integers(1, max_weight + 1))
    for u in range(n_nodes):
        for v in range(u + 1, n_nodes):
            if (u, v) not in edges and rng.random() < edge_prob:
                edges[(u, v)] = float(rng.integers(1, max_weight + 1))
    return GraphSpec(n_nodes, tuple((u, v, w) for (u, v), w in sorted(edges.items())))


def gen_random_graph(n: int, m: int, n_nodes: int | None = None, edge_prob: float = 0.3,
                     mode: str = "shortest_path", seed: int = 0) -> Election:
    """Voters and candidates on random nodes of a random weighted graph.

    ``mode="minimax"`` uses bottleneck distances (an ultra-metric).
    """
    _check_sizes(n, m)
    rng = np.random.default_rng(seed)
    n_nodes = n_nodes or max(2, (n + m) // 2)
    g = random_graph(n_nodes, edge_prob, rng)
    if mode == "shortest_path":
        D = shortest_path_metric(g)
    elif mode == "minimax":
        D = minimax_metric(g)
    else:
        raise InvalidInputError(f"unknown graph metric mode {mode!r}")
    voters = rng.integers(n_nodes, size=n)
    cands = rng.integers(n_nodes, size=m)
    return derive_profile(D, voters, cands,
                          meta={"instance": f"graph(n={n},m={m},nodes={n_nodes},mode={mode},seed={seed})",
                                "seed": seed})


# ---------------------------------------------------------------------------
# closed-form bounds


def harmonic(m: int) -> float:
    return float(sum(Fraction(1, k) for k in range(1, m + 1)))


def doubling_height(lam: int, m: int) -> int:
    """1 + ceil(log2(6 * lam^(log2 H_m + 1)))."""
    if lam < 1 or m < 1:
        raise InvalidInputError("need lam >= 1 and m >= 1")
    exponent = math.log2(6) + (math.log2(harmonic(m)) + 1) * math.log2(lam)
    return 1 + math.ceil(exponent - 1e-12)


THEOREMS = ("LINE", "GENERAL", "DOUBLING", "COORDINATION", "PM_METRIC", "PM_ULTRA", "PM_RHO")


def bound_value(theorem: str, **params) -> float:
    """Explicit distortion bound named by ``theorem``.

    LINE -> 15 (STV on the line); GENERAL(m) -> 8 H_m + 5 (STV, any metric);
    DOUBLING(lam, m) -> 1 + 3(4h + 7) (STV, doubling constant lam);
    COORDINATION -> 11; PM_METRIC -> 3; PM_ULTRA -> 2;
    PM_RHO(rho) -> 2 rho^2 + rho.
    """
    name = theorem.upper()
    if name == "LINE":
        return 15.0
    if name == "GENERAL":
        return 8.0 * harmonic(int(params["m"])) + 5.0
    if name == "DOUBLING":
        h = doubling_height(int(params["lam"]), int(params["m"]))
        return 1.0 + 3.0 * (4 * h + 7)
    if name == "COORDINATION":
        return 11.0
    if name == "PM_METRIC":
        return 3.0
    if name == "PM_ULTRA":
        return 2.0
    if name == "PM_RHO":
        rho = float(params["rho"])
        return 2 * rho * rho + rho
    raise UnknownTheoremError(f"unknown theorem {theorem!r}; expected one of {THEOREMS}")
