import numpy as np
import pytest
from hypothesis import given, settings

from distortionlab import dynamics as Dy
from distortionlab import election as E
from distortionlab import generators as G
from distortionlab import metric as M
from distortionlab import rules as R
from distortionlab.errors import AlphaOutOfRangeError, InvalidInputError

from conftest import euclidean_elections, graph_elections, profiles


@given(profiles(max_m=6))
@settings(max_examples=100, deadline=None)
def test_greedy_winner_is_stv_winner(prof):
    e = E.Election(prof)
    res = Dy.greedy_dynamics(e)
    assert res.winner in R.stv_winners(e)
    for rnd in res.log:
        assert sum(rnd.tallies.values()) == e.n_voters


@given(profiles(max_m=6))
@settings(max_examples=60, deadline=None)
def test_greedy_active_set_drops_one_per_round(prof):
    e = E.Election(prof)
    log = Dy.greedy_dynamics(e).log
    sizes = [len(r.tallies) for r in log]
    assert sizes == list(range(e.m_candidates, 1, -1))
    thetas = [r.theta for r in log]
    assert thetas == sorted(thetas)


def test_greedy_split_follows_tie_break():
    e = G.gen_split_profile(2)
    assert Dy.greedy_dynamics(e).winner == 1
    assert Dy.greedy_dynamics(e, tie_break=[1]).winner == 0


def test_greedy_unanimous():
    e = E.Election(np.array([[1, 2, 0]] * 3))
    res = Dy.greedy_dynamics(e)
    assert res.winner == 1 and len(res.log) == 2


def test_coordination_unanimous():
    e = E.Election(np.array([[2, 0, 1]] * 4))
    res = Dy.coordination_dynamics(e)
    assert res.winner == 2
    assert res.qualified_round[2] == 1


def test_coordination_split_goes_to_lower_index():
    for rule in Dy.EXPLOITATION_RULES:
        res = Dy.coordination_dynamics(G.gen_split_profile(3), rule)
        assert res.winner == 0
        assert res.cumulative.tolist() == [6, 6]


def test_coordination_first_qualified_vs_list_order():
    # no candidate reaches n/2 in round 1; voters 2 and 3 list 1 before 0
    prof = np.array([[0, 1, 2], [0, 1, 2], [1, 0, 2], [1, 2, 0], [2, 1, 0]])
    e = E.Election(prof)
    fq = Dy.coordination_dynamics(e)
    lo = Dy.coordination_dynamics(e, "list_order")
    assert fq.qualified_round == {0: 2, 1: 2, 2: 3}
    exploit = fq.log[-1]
    assert exploit.phase == "exploitation"
    # 0 and 1 qualify together in round 2; index tie-break sends everyone to 0
    assert exploit.tallies[0] == 5 and fq.winner == 0
    assert lo.log[-1].tallies == {0: 2, 1: 2, 2: 1}


@given(profiles(max_m=6))
@settings(max_examples=80, deadline=None)
def test_coordination_lists_and_counts(prof):
    e = E.Election(prof)
    res = Dy.coordination_dynamics(e)
    assert all(len(set(lst)) == len(lst) == e.m_candidates for lst in res.lists)
    for t in range(e.m_candidates):
        counted = np.zeros(e.m_candidates, dtype=int)
        for lst in res.lists:
            counted[lst[:t + 1]] += 1
        prefix = sum(np.array([r.tallies[c] for c in range(e.m_candidates)])
                     for r in list(res.log)[:t + 1])
        assert prefix.tolist() == counted.tolist()
    # the earliest qualifier collects at least half of the exploitation vote
    first = min(res.qualified_round, key=lambda c: (res.qualified_round[c], c))
    assert 2 * res.log[-1].tallies[first] >= e.n_voters


def test_coordination_truncated_fallback():
    prof = np.array([[0, 1, 2, 3], [1, 0, 2, 3], [2, 1, 0, 3], [3, 2, 1, 0]])
    res = Dy.coordination_dynamics(E.Election(prof), rounds=1)
    assert "fell back" in res.log[-1].note
    with pytest.raises(InvalidInputError):
        Dy.coordination_dynamics(E.Election(prof), rounds=0)
    with pytest.raises(InvalidInputError):
        Dy.coordination_dynamics(E.Election(prof), exploitation="random")


@given(graph_elections(max_n=10, max_m=6))
@settings(max_examples=80, deadline=None)
def test_coordination_distortion_eleven(e):
    w = Dy.coordination_dynamics(e).winner
    assert E.realized_distortion(e, w) <= 11 + 1e-9


def test_round_log_csv():
    res = Dy.coordination_dynamics(G.gen_split_profile(1))
    text = res.log.to_csv()
    lines = text.strip().splitlines()
    assert lines[0] == "round,phase,candidate,tally"
    assert len(lines) == 1 + 3 * 2
    full = res.log.to_csv(agents=True).splitlines()
    assert "round,phase,voter,candidate" in full
    assert len(full) == len(lines) + 2 + 3 * 2


def test_max_coalition_against():
    e = E.Election(np.array([[0, 1], [0, 1]]))
    c = Dy.max_coalition_against(e, 0)
    assert c.x == 1 and len(c.voters) == 0
    c = Dy.max_coalition_against(e, 1)
    assert c.x == 0 and c.voters.tolist() == [0, 1]


def test_core_membership():
    e = G.gen_split_profile(5)
    assert Dy.core_membership(e, 0, 0.6) and Dy.core_membership(e, 1, 0.6)
    assert not Dy.core_membership(e, 1, 0.5)
    with pytest.raises(AlphaOutOfRangeError):
        Dy.core_membership(e, 0, 1.5)


@given(euclidean_elections())
@settings(max_examples=80, deadline=None)
def test_coalition_inequality(e):
    for a in range(e.m_candidates):
        d = E.realized_distortion(e, a)
        if d > 1:
            w = Dy.max_coalition_against(e, a).voters
            assert len(w) / e.n_voters >= 1 - 2 / (d + 1) - 1e-12
            alpha = 1 - 2 / (d + 1)
            if alpha > 0:
                assert not Dy.core_membership(e, a, alpha)


def test_list_order_reading_degrades_to_plurality():
    # a alone at 0 with 4 voters; 19 rivals near 1 with 3 voters each.  After a full
    # exploration every candidate qualifies, so list order returns the plurality
    # winner a, whose distortion exceeds 11; first-qualified picks a rival.
    m, eps = 20, 1e-3
    cpos = [0.0] + [1 + i * eps for i in range(m - 1)]
    vpos = [0.0] * 4 + [p for p in cpos[1:] for _ in range(3)]
    D = M.euclidean_metric([[x] for x in cpos + vpos], 2.0)
    e = E.derive_profile(D, list(range(m, m + len(vpos))), list(range(m)))
    bad = Dy.coordination_dynamics(e, "list_order").winner
    good = Dy.coordination_dynamics(e).winner
    assert bad == 0 and E.realized_distortion(e, bad) > 11
    assert E.realized_distortion(e, good) < 1.01
