"""Voting rules: positional baselines, Copeland, STV and PluralityMatching."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .election import Election
from .errors import (
    InternalInvariantBroken,
    InvalidInputError,
    MalformedSequenceError,
    TooManyCandidatesError,
)
from .matching import maximum_matching
from .roundlog import RoundLog

STV_CANDIDATE_LIMIT = 20


@dataclass(frozen=True)
class ScoreRule:
    """A scoring rule: plurality, borda, veto, approval(k), ktop(k) or copeland.

    ``k`` is the number of top positions approved; for approval it defaults to
    ceil(m/2) when left as None.
    """

    kind: str
    k: int | None = None

    KINDS = ("plurality", "borda", "veto", "approval", "ktop", "copeland")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise InvalidInputError(f"unknown scoring rule {self.kind!r}")
        if self.kind == "ktop" and self.k is None:
            raise InvalidInputError("ktop needs k")
        if self.k is not None and self.k < 1:
            raise InvalidInputError("k must be >= 1")

    @classmethod
    def parse(cls, text: str | ScoreRule) -> ScoreRule:
        if isinstance(text, ScoreRule):
            return text
        name, _, arg = text.strip().lower().partition(":")
        return cls(name, int(arg) if arg else None)

    def __str__(self):
        return self.kind if self.k is None else f"{self.kind}:{self.k}"


@dataclass(frozen=True)
class WinnerSet:
    winners: frozenset
    witnesses: dict = field(default_factory=dict)  # winner -> elimination sequence

    def __contains__(self, c) -> bool:
        return int(c) in self.winners

    def __iter__(self):
        return iter(sorted(self.winners))

    def __len__(self) -> int:
        return len(self.winners)


def scores(e: Election, rule: ScoreRule | str) -> np.ndarray:
    rule = ScoreRule.parse(rule)
    n, m = e.n_voters, e.m_candidates
    pos = e.positions
    if rule.kind == "plurality":
        return np.bincount(e.tops, minlength=m).astype(float)
    if rule.kind == "borda":
        return (m - 1 - pos).sum(axis=0).astype(float)
    if rule.kind == "veto":
        return n - np.bincount(e.profile[:, -1], minlength=m).astype(float)
    if rule.kind in ("approval", "ktop"):
        k = rule.k if rule.k is not None else math.ceil(m / 2)
        if k > m:
            raise InvalidInputError(f"k={k} exceeds m={m}")
        return (pos < k).sum(axis=0).astype(float)
    # copeland: a pairwise-majority win scores 1, a tie 1/2
    beats = (pos[:, :, None] < pos[:, None, :]).sum(axis=0)
    margin = beats - beats.T
    out = (margin > 0).sum(axis=1) + 0.5 * ((margin == 0).sum(axis=1) - 1)
    return out.astype(float)


def score_winners(e: Election, rule: ScoreRule | str) -> WinnerSet:
    s = scores(e, rule)
    return WinnerSet(frozenset(int(c) for c in np.flatnonzero(s == s.max())))


# ---------------------------------------------------------------------------
# STV


def _tallies(pos: np.ndarray, active: np.ndarray) -> np.ndarray:
    """Plurality tallies restricted to active candidates (inactive get -1)."""
    m = pos.shape[1]
    masked = np.where(active[None, :], pos, m)
    t = np.bincount(masked.argmin(axis=1), minlength=m)
    return np.where(active, t, -1)


class _Runoff:
    """Incremental plurality state: each voter points at her top active candidate."""

    def __init__(self, e: Election):
        self.profile = e.profile
        self.m = e.m_candidates
        self.active = np.ones(self.m, dtype=bool)
        self.ptr = np.zeros(e.n_voters, dtype=int)
        self.top = self.profile[:, 0].copy()
        self.tally = np.bincount(self.top, minlength=self.m)

    def active_tallies(self) -> dict:
        return {int(c): int(self.tally[c]) for c in np.flatnonzero(self.active)}

    def minimal(self) -> np.ndarray:
        act = np.flatnonzero(self.active)
        t = self.tally[act]
        return act[t == t.min()]

    def eliminate(self, c: int) -> None:
        self.active[c] = False
        self.tally[c] = 0
        for i in np.flatnonzero(self.top == c):
            k = self.ptr[i]
            row = self.profile[i]
            while not self.active[row[k]]:
                k += 1
            self.ptr[i] = k
            self.top[i] = row[k]
            self.tally[row[k]] += 1


def stv_winners(e: Election) -> WinnerSet:
    """All STV winners under the parallel-universe model.

    Memoises on the active set: from each set, every candidate with minimal
    tally is a legal elimination.  Also returns one witness elimination
    sequence per winner.
    """
    m = e.m_candidates
    if m > STV_CANDIDATE_LIMIT:
        raise TooManyCandidatesError(f"parallel-universe STV is limited to {STV_CANDIDATE_LIMIT} candidates")
    pos = np.asarray(e.positions)
    full = (1 << m) - 1
    memo: dict[int, frozenset] = {}
    branches: dict[int, list[int]] = {}

    def mask_array(mask: int) -> np.ndarray:
        return np.array([(mask >> c) & 1 for c in range(m)], dtype=bool)

    def solve(mask: int) -> frozenset:
        if mask in memo:
            return memo[mask]
        if mask & (mask - 1) == 0:
            res = frozenset([mask.bit_length() - 1])
        else:
            t = _tallies(pos, mask_array(mask))
            live = t[t >= 0]
            mins = [int(c) for c in np.flatnonzero(t == live.min())]
            branches[mask] = mins
            res = frozenset().union(*(solve(mask & ~(1 << c)) for c in mins))
        memo[mask] = res
        return res

    winners = solve(full)
    witnesses = {}
    for w in winners:
        mask, seq = full, []
        while mask & (mask - 1):
            for c in branches[mask]:
                nxt = mask & ~(1 << c)
                if c != w and w in memo[nxt]:
                    seq.append(c)
                    mask = nxt
                    break
        witnesses[w] = tuple(seq)
    return WinnerSet(winners, witnesses)


class StvTrace(NamedTuple):
    winner: int
    sequence: tuple
    log: RoundLog


def stv_trace(e: Election, tie_break: Sequence[int] | None = None) -> StvTrace:
    """One deterministic STV run.

    Among minimal-tally candidates the one appearing earliest in
    ``tie_break`` is eliminated (default: lowest index).  Candidates missing
    from ``tie_break`` rank after those listed, by index.
    """
    m = e.m_candidates
    prio = np.full(m, m, dtype=int) + np.arange(m)
    for rank, c in enumerate(tie_break or ()):
        prio[int(c)] = rank
    state = _Runoff(e)
    log = RoundLog(e.n_voters)
    seq = []
    for _ in range(m - 1):
        log.append("stv", state.top, m, candidates=np.flatnonzero(state.active))
        mins = state.minimal()
        c = int(mins[np.argmin(prio[mins])])
        seq.append(c)
        state.eliminate(c)
    winner = int(np.flatnonzero(state.active)[0])
    return StvTrace(winner, tuple(seq), log)


def validate_elimination_sequence(e: Election, seq: Sequence[int]) -> bool:
    """True iff each eliminated candidate has a minimal tally among active ones.

    Replays the run incrementally, O(n*m) overall.
    """
    m = e.m_candidates
    seq = [int(c) for c in seq]
    if len(seq) != m - 1 or len(set(seq)) != len(seq) or any(not 0 <= c < m for c in seq):
        raise MalformedSequenceError(f"need {m - 1} distinct candidates in 0..{m - 1}")
    state = _Runoff(e)
    for c in seq:
        act = state.active
        if state.tally[c] > state.tally[act].min():
            return False
        state.eliminate(c)
    return True


# ---------------------------------------------------------------------------
# PluralityMatching


@dataclass(frozen=True, eq=False)
class DominationGraph:
    """Bipartite (voters x voters) graph: edge (i, j) iff owner >=_i top(j)."""

    owner: int
    adj: np.ndarray

    @property
    def edges(self) -> set:
        return {(int(i), int(j)) for i, j in np.argwhere(self.adj)}


def integral_domination_graph(e: Election, a: int) -> DominationGraph:
    a = e.candidate_index(a)
    pos = e.positions
    # pos[:, tops][i, j] = position of top(j) in voter i's ranking
    adj = pos[:, [a]] <= pos[:, e.tops]
    return DominationGraph(a, adj)


class MatchingResult(NamedTuple):
    winner: int
    matching: np.ndarray  # matching[i] = j with (i, j) an edge of the winner's graph


def perfect_matching(g: DominationGraph) -> np.ndarray | None:
    match = maximum_matching(g.adj, stop_on_deficit=True)
    return match if (match >= 0).all() else None


def plurality_matching_winner(e: Election) -> MatchingResult:
    """Lowest-index candidate whose integral domination graph has a perfect matching."""
    for a in range(e.m_candidates):
        match = perfect_matching(integral_domination_graph(e, a))
        if match is not None:
            return MatchingResult(a, match)
    raise InternalInvariantBroken("no candidate admits a perfect matching")
