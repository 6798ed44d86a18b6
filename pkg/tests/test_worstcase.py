import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from distortionlab import election as E
from distortionlab import generators as G
from distortionlab import metric as M
from distortionlab import worstcase as W
from distortionlab.errors import SameCandidateError, UnboundedModel

from conftest import profiles


def lp_oracle(profile, w, x, rho):
    """Same program assembled densely with explicit loops, solved by interior point."""
    n, m = profile.shape
    N = n + m
    pairs = list(itertools.combinations(range(N), 2))
    col = {p: k for k, p in enumerate(pairs)}

    def v(a, b):
        return col[(min(a, b), max(a, b))]

    rows = []
    for a, b, c in itertools.permutations(range(N), 3):
        if a < c:
            r = np.zeros(len(pairs))
            r[v(a, c)] += 1
            r[v(a, b)] -= rho
            r[v(b, c)] -= rho
            rows.append(r)
    for i in range(n):
        for hi, lo in zip(profile[i][:-1], profile[i][1:]):
            r = np.zeros(len(pairs))
            r[v(i, n + hi)] += 1
            r[v(i, n + lo)] -= 1
            rows.append(r)
    eq = np.zeros((1, len(pairs)))
    obj = np.zeros(len(pairs))
    for i in range(n):
        eq[0, v(i, n + x)] = 1
        obj[v(i, n + w)] = -1
    res = linprog(obj, A_ub=np.array(rows), b_ub=np.zeros(len(rows)), A_eq=eq, b_eq=[1.0],
                  method="highs-ipm")
    if res.status == 3:
        return math.inf
    assert res.status == 0
    return -res.fun


def test_lp_counts_small():
    e = G.gen_split_profile(1)
    model = W.build_lp(e, 1, 0)
    assert model.n_points == 4
    assert model.n_variables == 6
    assert model.count("triangle") == 24
    assert model.count("consistency") == 2
    assert model.count("normalization") == 1


@given(st.integers(1, 4), st.integers(2, 4))
@settings(max_examples=12, deadline=None)
def test_lp_count_formulas(n, m):
    e = E.Election(np.tile(np.arange(m), (n, 1)))
    model = W.build_lp(e, 1, 0)
    N = n + m
    assert model.n_variables == math.comb(N, 2)
    assert model.count("triangle") == 6 * math.comb(N, 3)
    assert model.count("consistency") == n * (m - 1)


def test_lp_same_candidate():
    with pytest.raises(SameCandidateError):
        W.build_lp(G.gen_split_profile(1), 0, 0)


def test_split_profile_values():
    e = G.gen_split_profile(1)
    assert W.worst_case_distortion(e, 1, 1.0).value == pytest.approx(3.0, abs=1e-6)
    assert W.worst_case_distortion(e, 1, 2.0).value == pytest.approx(7.0, abs=1e-6)


def test_unanimous_winner_is_optimal():
    e = E.Election(np.array([[0, 1, 2]] * 3))
    assert W.worst_case_distortion(e, 0).value == pytest.approx(1.0, abs=1e-9)


def test_single_candidate():
    e = E.Election(np.array([[0]] * 2))
    assert W.worst_case_distortion(e, 0).value == 1.0


def test_split_witness_is_pseudometric():
    res = W.worst_case_distortion(G.gen_split_profile(1), 1)
    assert not M.check_metric(res.witness, tol=1e-6)
    assert not E.check_consistency(res.election, tol=1e-6)
    sc = E.social_costs(res.election)
    assert sc[res.reference_optimum] == pytest.approx(1.0, abs=1e-6)
    assert sc[1] == pytest.approx(3.0, abs=1e-6)


@given(profiles(max_n=3, max_m=3, min_m=2), st.sampled_from([1.0, 1.5, 2.0]))
@settings(max_examples=25, deadline=None)
def test_lp_matches_dense_oracle(prof, rho):
    e = E.Election(prof)
    model = W.build_lp(e, 0, 1, rho)
    ref = lp_oracle(prof, 0, 1, rho)
    if math.isinf(ref):
        with pytest.raises(UnboundedModel):
            W.solve_lp(model)
    else:
        assert W.solve_lp(model).value == pytest.approx(ref, rel=1e-6)


def test_pareto_dominated_candidate_is_unbounded():
    e = E.Election(np.array([[1, 0, 2], [0, 1, 2]]))
    res = W.worst_case_distortion(e, 2)
    assert math.isinf(res.value) and res.witness is None
    assert res.reference_optimum == 0
    assert not res.has_coincident_points


@given(st.integers(0, 10**6))
@settings(max_examples=15, deadline=None)
def test_lp_dominates_realized_and_grows_with_rho(seed):
    e = G.gen_random_euclidean(5, 3, 2, 2.0, seed)
    for w in range(3):
        vals = [W.worst_case_distortion(e, w, rho).value for rho in (1.0, 1.5, 2.0)]
        assert vals[0] >= E.realized_distortion(e, w) - 1e-6
        assert vals[0] <= vals[1] + 1e-7 <= vals[2] + 2e-7


def test_lp_text_export():
    model = W.build_lp(G.gen_split_profile(1), 1, 0)
    text = model.to_lp_format()
    assert text.startswith("\\ worst-case distortion\nMaximize\n obj: ")
    assert text.count(" <= ") == 26
    assert text.count(" = 1\n") == 1
    assert text.rstrip().endswith("End")
    assert "d_v0_c1" in text
