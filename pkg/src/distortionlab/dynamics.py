"""Iterative plurality voting: greedy temperature dynamics, exploration/exploitation
coordination dynamics, and coalition diagnostics."""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .election import Election
from .errors import AlphaOutOfRangeError, InvalidInputError
from .roundlog import RoundLog
from .rules import _Runoff


class DynamicsResult(NamedTuple):
    winner: int
    log: RoundLog


def greedy_dynamics(e: Election, tie_break: Sequence[int] | None = None) -> DynamicsResult:
    """Temperature dynamics over repeated plurality rounds.

    Each round every agent votes for her favourite among the candidates still
    considered.  The temperature is then raised to the smallest tally among
    them, and the candidates at that tally stop being considered; at most one
    leaves per round, chosen by ``tie_break`` (earliest listed leaves first,
    default lowest index).  Stops when a single candidate remains.
    """
    m = e.m_candidates
    prio = np.full(m, m, dtype=int) + np.arange(m)
    for rank, c in enumerate(tie_break or ()):
        prio[int(c)] = rank
    state = _Runoff(e)
    log = RoundLog(e.n_voters)
    theta = 0.0
    while state.active.sum() > 1:
        active = np.flatnonzero(state.active)
        log.append("greedy", state.top, m, theta=theta, candidates=active)
        tally = state.tally[active]
        theta = float(tally.min())
        below = active[tally <= theta]
        drop = int(below[np.argmin(prio[below])])
        state.eliminate(drop)
    return DynamicsResult(int(np.flatnonzero(state.active)[0]), log)


class CoordinationResult(NamedTuple):
    winner: int
    log: RoundLog
    lists: list  # lists[i] = candidates voter i explored, in order
    cumulative: np.ndarray  # votes accumulated over the exploration rounds
    qualified_round: dict  # candidate -> first round its cumulative count reached n/2


EXPLOITATION_RULES = ("first_qualified", "list_order")


def coordination_dynamics(e: Election, exploitation: str = "first_qualified",
                          rounds: int | None = None) -> CoordinationResult:
    """Exploration/exploitation dynamics.

    Exploration runs ``rounds`` rounds (default m): each agent votes for her
    favourite candidate she has not voted for yet and appends it to her list.
    A candidate qualifies once its cumulative vote count reaches n/2.

    Exploitation, ``"first_qualified"``: every agent supports, among the
    qualified candidates in her list, the one that qualified earliest; ties
    between candidates qualifying in the same round go to the lower index,
    a tie-break shared by all agents.  ``"list_order"`` instead takes the
    earliest qualified entry of the agent's own list (kept for comparison; it
    reduces to plurality once every candidate has qualified).

    The winner is the plurality winner of the exploitation round, ties by
    index.  If nothing qualified (only possible with truncated exploration)
    the candidate with the largest cumulative count is treated as qualified.
    """
    if exploitation not in EXPLOITATION_RULES:
        raise InvalidInputError(f"unknown exploitation rule {exploitation!r}")
    n, m = e.n_voters, e.m_candidates
    rounds = m if rounds is None else int(rounds)
    if not 1 <= rounds <= m:
        raise InvalidInputError(f"exploration rounds must be in 1..{m}")
    profile = e.profile
    log = RoundLog(n)
    cumulative = np.zeros(m, dtype=int)
    qualified_round: dict = {}
    for t in range(rounds):
        # rankings are in preference order, so the t-th new vote is column t
        votes = profile[:, t]
        log.append("exploration", votes, m)
        cumulative += np.bincount(votes, minlength=m)
        for c in np.flatnonzero(2 * cumulative >= n):
            qualified_round.setdefault(int(c), t + 1)
    lists = [list(map(int, profile[i, :rounds])) for i in range(n)]

    note = "qualification ties: global candidate index"
    if not qualified_round:
        best = int(np.argmax(cumulative))
        qualified_round = {best: rounds}
        note += "; no candidate reached n/2, fell back to max cumulative count"
    key = {c: (r, c) for c, r in qualified_round.items()}

    votes = np.empty(n, dtype=int)
    for i, lst in enumerate(lists):
        quals = [c for c in lst if c in key]
        if not quals:
            votes[i] = lst[0]
        elif exploitation == "first_qualified":
            votes[i] = min(quals, key=key.__getitem__)
        else:
            votes[i] = quals[0]
    rnd = log.append("exploitation", votes, m, note=note)
    tallies = np.array([rnd.tallies[c] for c in range(m)])
    winner = int(np.argmax(tallies))
    return CoordinationResult(winner, log, lists, cumulative, qualified_round)


class Coalition(NamedTuple):
    x: int | None
    voters: np.ndarray


def max_coalition_against(e: Election, a: int) -> Coalition:
    """The candidate x != a preferred to a by the most voters, and those voters."""
    a = e.candidate_index(a)
    pos = e.positions
    best_x, best = None, np.zeros(0, dtype=int)
    for x in range(e.m_candidates):
        if x == a:
            continue
        w = np.flatnonzero(pos[:, x] < pos[:, a])
        if best_x is None or len(w) > len(best):
            best_x, best = x, w
    return Coalition(best_x, best)


def core_membership(e: Election, a: int, alpha: float) -> bool:
    """True iff no coalition of at least alpha*n voters unanimously prefers some x to a."""
    if not 0.0 <= alpha <= 1.0:
        raise AlphaOutOfRangeError(f"alpha must be in [0, 1], got {alpha}")
    return len(max_coalition_against(e, a).voters) < alpha * e.n_voters
