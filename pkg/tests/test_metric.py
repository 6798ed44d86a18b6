import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse.csgraph import shortest_path

from distortionlab import metric as M
from distortionlab.errors import (
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


@st.composite
def graphs(draw, max_nodes=7, integer=True):
    n = draw(st.integers(1, max_nodes))
    w = st.integers(0, 9).map(float) if integer else st.floats(0.0, 10.0)
    edges = [(k, draw(st.integers(0, k - 1)), draw(w)) for k in range(1, n)]
    for u, v in itertools.combinations(range(n), 2):
        if draw(st.booleans()):
            edges.append((u, v, draw(w)))
    return M.GraphSpec(n, tuple(edges))


@st.composite
def point_sets(draw, max_points=8, dim=2):
    k = draw(st.integers(1, max_points))
    coord = st.integers(-20, 20).map(float)
    return [[draw(coord) for _ in range(dim)] for _ in range(k)]


def minimax_oracle(g: M.GraphSpec) -> np.ndarray:
    """Bottleneck distances by enumerating every simple path."""
    n = g.n_nodes
    w = g.weight_matrix()
    out = np.full((n, n), np.inf)
    np.fill_diagonal(out, 0.0)
    for s, t in itertools.permutations(range(n), 2):
        inner = [v for v in range(n) if v not in (s, t)]
        for k in range(len(inner) + 1):
            for mid in itertools.permutations(inner, k):
                path = (s, *mid, t)
                cost = max(w[a, b] for a, b in zip(path, path[1:]))
                out[s, t] = min(out[s, t], cost)
    return out


def brute_cover_size(d, universe, r):
    """Smallest number of open r-balls (any centre) covering ``universe``."""
    universe = list(universe)
    balls = [set(np.flatnonzero(d[c] < r)) for c in range(d.shape[0])]
    for k in range(1, len(universe) + 1):
        for combo in itertools.combinations(range(d.shape[0]), k):
            if set(universe) <= set().union(*(balls[c] for c in combo)):
                return k
    return 0


def doubling_oracle(d, radii):
    lam = 1
    for r in radii:
        for x in range(d.shape[0]):
            lam = max(lam, brute_cover_size(d, np.flatnonzero(d[x] < 2 * r), r))
    return lam


# --- MetricClass / BinaryOperator ------------------------------------------


def test_metric_class_parse_roundtrip():
    for text in ("general", "ultra", "rho:2", "rho:1.5", "op:max", "op:sum"):
        assert str(M.MetricClass.parse(text)) == text


def test_metric_class_rejects_bad_rho():
    with pytest.raises(InvalidInputError):
        M.rho_approx(0.5)
    with pytest.raises(InvalidInputError):
        M.MetricClass.parse("hyperbolic")


def test_operator_fold():
    assert M.BinaryOperator.SUM.fold([1, 2, 3]) == 6
    assert M.BinaryOperator.MAX.fold([1, 5, 3]) == 5
    assert M.BinaryOperator.MAX.idempotent and not M.BinaryOperator.SUM.idempotent
    assert M.BinaryOperator.parse("MAX") is M.BinaryOperator.MAX


# --- DistanceMatrix validation ----------------------------------------------


def test_distance_matrix_rejects_malformed():
    with pytest.raises(NonSquareError):
        M.DistanceMatrix(np.zeros((2, 3)))
    with pytest.raises(AsymmetricInputError):
        M.DistanceMatrix([[0, 1], [2, 0]])
    with pytest.raises(NegativeDistanceError):
        M.DistanceMatrix([[0, -1], [-1, 0]])
    with pytest.raises(InvalidInputError):
        M.DistanceMatrix([[1, 1], [1, 0]])
    with pytest.raises(InvalidInputError):
        M.DistanceMatrix([[0, 1], [1, 0]], ("a", "a"))


def test_distance_matrix_is_read_only_and_labelled():
    D = M.DistanceMatrix([[0, 1], [1, 0]], ("u", "v"))
    with pytest.raises(ValueError):
        D.d[0, 1] = 5
    assert D.index("v") == 1
    assert D.point("u") == M.PointId(0, "u")
    assert D.submetric([1]).labels == ("v",)


def test_pseudometric_zero_distance_allowed():
    D = M.DistanceMatrix([[0, 0, 1], [0, 0, 1], [1, 1, 0]])
    assert not M.check_metric(D)


def test_check_metric_reports_violation():
    d = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float)
    rep = M.check_metric(d)
    assert rep.total == 2  # (0,1,2) and (2,1,0)
    assert rep.worst == pytest.approx(3.0)
    assert not M.check_metric(d, M.rho_approx(2.5))


def test_check_metric_ultra_vs_general():
    d = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], dtype=float)
    assert not M.check_metric(d, "general")
    assert M.check_metric(d, "ultra")


# --- graph metrics ------------------------------------------------------------


@given(graphs())
@settings(max_examples=60, deadline=None)
def test_shortest_path_matches_scipy(g):
    D = M.shortest_path_metric(g)
    w = g.weight_matrix()
    ref = shortest_path(np.where(np.isinf(w), 0, w), method="D", directed=False)
    # zero-weight edges are invisible to csgraph's dense input; only compare when none
    if all(c > 0 for _, _, c in g.edges):
        np.testing.assert_allclose(D.d, ref)
    assert not M.check_metric(D)


@given(graphs(max_nodes=5))
@settings(max_examples=60, deadline=None)
def test_minimax_matches_path_enumeration(g):
    D = M.minimax_metric(g)
    np.testing.assert_allclose(D.d, minimax_oracle(g))
    assert D.class_tag == M.ULTRA
    assert not M.check_metric(D, M.ULTRA)


def test_disconnected_graph_raises():
    with pytest.raises(DisconnectedGraphError):
        M.shortest_path_metric(M.GraphSpec(3, ((0, 1, 1.0),)))


def test_unit_path_graph():
    g = M.GraphSpec(3, ((0, 1, 1.0), (1, 2, 1.0)))
    assert M.shortest_path_metric(g).d[0, 2] == 2.0
    assert M.minimax_metric(g).d[0, 2] == 1.0


# --- Euclidean ----------------------------------------------------------------


@given(point_sets())
@settings(max_examples=50, deadline=None)
def test_euclidean_constructors_satisfy_their_class(pts):
    for p in (1.0, 2.0, 3.0):
        D = M.euclidean_metric(pts, p)
        assert not M.check_metric(D)
    S = M.euclidean_metric(pts, M.SQUARED)
    assert S.class_tag == M.rho_approx(2)
    assert not M.check_metric(S)


def test_squared_is_not_a_metric_but_is_two_approximate():
    S = M.euclidean_metric([[0.0], [1.0], [2.0]], M.SQUARED)
    assert M.check_metric(S, "general")
    assert not M.check_metric(S, M.rho_approx(2))


def test_euclidean_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        M.euclidean_metric([[0.0], [1.0, 2.0]])


@given(graphs(max_nodes=6))
@settings(max_examples=40, deadline=None)
def test_class_hierarchy(g):
    D = M.minimax_metric(g)
    for cls in ("ultra", "general", "rho:1.5", "rho:3"):
        assert not M.check_metric(D, cls)


# --- covering and doubling ----------------------------------------------------


@pytest.mark.parametrize("k", range(1, 11))
def test_uniform_metric_doubling_constant(k):
    res = M.doubling_constant(M.uniform_metric(k))
    assert res.lam == k
    assert res.dim == pytest.approx(math.log2(k))


@given(point_sets(max_points=6))
@settings(max_examples=30, deadline=None)
def test_doubling_constant_matches_brute_force(pts):
    D = M.euclidean_metric(pts, 1.0)
    d = D.d
    vals = np.unique(d[d > 0])
    radii = list(M._radius_grid(d))
    # extra radii just around every breakpoint, found independently of the grid
    for v in np.concatenate([vals, vals / 2]):
        radii += [v * (1 - 1e-6), v * (1 + 1e-6)]
    assert M.doubling_constant(D).lam == doubling_oracle(d, radii)


@given(point_sets(max_points=9))
@settings(max_examples=30, deadline=None)
def test_greedy_doubling_bounds_exact(pts):
    D = M.euclidean_metric(pts)
    exact = M.doubling_constant(D).lam
    assert M.doubling_constant(D, mode="greedy").lam >= exact
    assert exact <= D.n_points


def test_exact_doubling_capped():
    with pytest.raises(TooLargeForExactError):
        M.doubling_constant(M.uniform_metric(25))
    assert M.doubling_constant(M.uniform_metric(25), mode="greedy").lam == 25


def test_line_doubling_constant():
    # integer points 0..8 on a line: the open ball of radius 2r holds at most
    # 4r - 1 consecutive integers and an r-ball covers 2r - 1 of them
    D = M.euclidean_metric([[float(i)] for i in range(9)])
    assert M.doubling_constant(D).lam == 3


@given(point_sets(max_points=7), st.floats(0.5, 40.0), st.floats(0.05, 1.0))
@settings(max_examples=40, deadline=None)
def test_cover_ball_size_and_coverage(pts, r, frac):
    D = M.euclidean_metric(pts)
    lam = M.doubling_constant(D).lam
    eps = r * frac
    balls = M.cover_ball(D, 0, r, eps)
    steps = max(0, math.ceil(math.log2(r / eps) - 1e-12))
    assert len(balls) <= lam ** steps
    assert all(rad <= eps + 1e-12 for _, rad in balls)
    assert M.covers(D, balls, 0, r)


def test_cover_ball_rejects_bad_radii():
    with pytest.raises(InvalidRadiiError):
        M.cover_ball(M.uniform_metric(3), 0, 1.0, 2.0)


def test_min_ball_cover_uniform():
    # B(x, 2) is everything, each ball of radius 1 holds only its centre
    assert len(M.min_ball_cover(M.uniform_metric(5), 0, 2.0)) == 5


def test_aspect_ratio():
    D = M.euclidean_metric([[0.0], [1.0], [4.0]])
    assert M.aspect_ratio(D) == 4.0
    with pytest.raises(DegenerateSubsetError):
        M.aspect_ratio(D, [0])
    with pytest.raises(DegenerateSubsetError):
        M.aspect_ratio(M.DistanceMatrix(np.zeros((2, 2))))
