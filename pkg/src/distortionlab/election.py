"""Elections, ranking profiles and social cost."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import (
    CoincidentCandidatesError,
    GammaOutOfRangeError,
    InvalidInputError,
    LemmaViolation,
    NoEmbeddingError,
    UnknownPointError,
)
from .metric import DEFAULT_TOL, BinaryOperator, DistanceMatrix, Violation, ViolationReport

SUM = BinaryOperator.SUM
MAX = BinaryOperator.MAX


@dataclass(frozen=True, eq=False)
class Embedding:
    """Voters and candidates placed on points of a distance matrix."""

    metric: DistanceMatrix
    voter_points: tuple[int, ...]
    candidate_points: tuple[int, ...]

    def __post_init__(self):
        n = self.metric.n_points
        vp = tuple(int(p) for p in self.voter_points)
        cp = tuple(int(p) for p in self.candidate_points)
        for p in vp + cp:
            if not 0 <= p < n:
                raise UnknownPointError(f"point {p} not in a metric of {n} points")
        object.__setattr__(self, "voter_points", vp)
        object.__setattr__(self, "candidate_points", cp)

    @cached_property
    def voter_candidate(self) -> np.ndarray:
        """(n, m) array of d(voter i, candidate a)."""
        return self.metric.d[np.ix_(self.voter_points, self.candidate_points)]

    @cached_property
    def candidate_candidate(self) -> np.ndarray:
        return self.metric.d[np.ix_(self.candidate_points, self.candidate_points)]


@dataclass(frozen=True, eq=False)
class Election:
    """Voters, candidates and one strict ranking per voter (most preferred first).

    ``profile[i]`` is the ranking of voter ``i`` as a sequence of candidate
    indices.  ``meta`` carries free-form annotations from generators (for
    instance which candidate plays the optimum in a lower-bound instance).
    """

    profile: np.ndarray
    candidates: tuple[str, ...] = ()
    embedding: Embedding | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        prof = np.array(self.profile, dtype=int)
        if prof.ndim != 2 or prof.shape[0] == 0 or prof.shape[1] == 0:
            raise InvalidInputError("profile must be a non-empty n x m array of rankings")
        n, m = prof.shape
        expected = np.arange(m)
        for i, row in enumerate(prof):
            if not np.array_equal(np.sort(row), expected):
                raise InvalidInputError(f"ranking of voter {i} is not a permutation of 0..{m - 1}")
        prof.setflags(write=False)
        cands = tuple(self.candidates) if self.candidates else tuple(f"c{a}" for a in range(m))
        if len(cands) != m:
            raise InvalidInputError(f"{len(cands)} candidate names for {m} candidates")
        if self.embedding is not None:
            if (len(self.embedding.voter_points) != n
                    or len(self.embedding.candidate_points) != m):
                raise InvalidInputError("embedding size does not match the profile")
        object.__setattr__(self, "profile", prof)
        object.__setattr__(self, "candidates", cands)

    @property
    def n_voters(self) -> int:
        return self.profile.shape[0]

    @property
    def m_candidates(self) -> int:
        return self.profile.shape[1]

    @cached_property
    def positions(self) -> np.ndarray:
        """positions[i, a] = rank of candidate a in voter i's ballot (0 = top)."""
        pos = np.empty_like(self.profile)
        rows = np.arange(self.n_voters)[:, None]
        pos[rows, self.profile] = np.arange(self.m_candidates)[None, :]
        pos.setflags(write=False)
        return pos

    @property
    def tops(self) -> np.ndarray:
        return self.profile[:, 0]

    def prefers(self, i: int, a: int, b: int) -> bool:
        """Strict preference a over b of voter i."""
        return bool(self.positions[i, a] < self.positions[i, b])

    def candidate_index(self, ref: int | str) -> int:
        if isinstance(ref, (int, np.integer)):
            if not 0 <= ref < self.m_candidates:
                raise InvalidInputError(f"candidate {ref} out of range")
            return int(ref)
        try:
            return self.candidates.index(ref)
        except ValueError:
            raise InvalidInputError(f"unknown candidate {ref!r}") from None

    def require_embedding(self) -> Embedding:
        if self.embedding is None:
            raise NoEmbeddingError("operation needs an election with an embedding")
        return self.embedding

    def distances(self) -> np.ndarray:
        return self.require_embedding().voter_candidate

    def without_embedding(self) -> Election:
        return Election(self.profile, self.candidates, None, dict(self.meta))


def derive_profile(D: DistanceMatrix, voter_points: Sequence, candidate_points: Sequence,
                   candidates: Sequence[str] = (),
                   overrides: Mapping[int, Sequence[int]] | None = None,
                   meta: dict | None = None) -> Election:
    """Rank candidates by distance from each voter; ties go to the lower index.

    ``overrides`` maps a voter to an explicit ranking, for constructions whose
    stated preferences use another tie-break.  An override must still be
    consistent with the distances (it may only reorder ties).
    """
    vp = [D.index(p) if isinstance(p, str) else int(p) for p in voter_points]
    cp = [D.index(p) if isinstance(p, str) else int(p) for p in candidate_points]
    emb = Embedding(D, tuple(vp), tuple(cp))
    dist = emb.voter_candidate
    m = len(cp)
    # lexsort: last key is primary
    profile = np.array([np.lexsort((np.arange(m), row)) for row in dist], dtype=int)
    profile = profile.reshape(len(vp), m)
    for i, ranking in (overrides or {}).items():
        profile[i] = np.asarray(ranking, dtype=int)
    e = Election(profile, tuple(candidates), emb, dict(meta or {}))
    if overrides:
        bad = check_consistency(e)
        if bad:
            raise InvalidInputError(f"ranking override inconsistent with distances: {bad.violations[:3]}")
    return e


def check_consistency(e: Election, tol: float = DEFAULT_TOL) -> ViolationReport:
    """Report every voter i and consecutive pair a > b with d(i,a) > d(i,b) + tol.

    Violations are reported as (voter, a, b, excess).
    """
    dist = e.distances()
    ranked = np.take_along_axis(dist, e.profile, axis=1)
    excess = ranked[:, :-1] - ranked[:, 1:]
    report = ViolationReport()
    for i, k in np.argwhere(excess > tol):
        report.total += 1
        report.violations.append(
            Violation(int(i), int(e.profile[i, k]), int(e.profile[i, k + 1]), float(excess[i, k])))
    return report


def social_cost(e: Election, a: int, op: BinaryOperator | str = SUM) -> float:
    """Fold of d(i, a) over all voters under ``op`` (sum by default)."""
    op = BinaryOperator.parse(op)
    return op.fold(e.distances()[:, e.candidate_index(a)])


def social_costs(e: Election, op: BinaryOperator | str = SUM) -> np.ndarray:
    op = BinaryOperator.parse(op)
    dist = e.distances()
    if op is SUM:
        return dist.sum(axis=0)
    return dist.max(axis=0)


def realized_distortion(e: Election, a: int, op: BinaryOperator | str = SUM) -> float:
    """SC(a) / min_x SC(x) under the stored embedding.

    Returns 1.0 when ``a`` attains the minimum and ``inf`` when the minimum is
    zero but SC(a) is not.
    """
    costs = social_costs(e, op)
    ca = costs[e.candidate_index(a)]
    best = costs.min()
    if ca <= best:
        return 1.0
    if best == 0.0:
        return float("inf")
    return float(ca / best)


def wave_bound(h: float, gamma: float) -> float:
    """1 + h / (1 - gamma): ratio cap when at most gamma*n voters sit near a."""
    if not 0.0 <= gamma < 1.0:
        raise GammaOutOfRangeError(f"gamma must be in [0, 1), got {gamma}")
    if not h > 0:
        raise InvalidInputError("h must be positive")
    return 1.0 + h / (1.0 - gamma)


class WavePremise(NamedTuple):
    gamma: float
    bound: float
    ratio: float


def check_wave_premise(e: Election, a: int, b: int, h: float,
                       tol: float = DEFAULT_TOL) -> WavePremise:
    """Measure gamma for the open ball B(a, d(a,b)/h) and verify SC(b)/SC(a) <= bound.

    When every voter lies in the ball, gamma = 1 and the bound is ``inf``.
    Raises :class:`LemmaViolation` if the inequality fails (it cannot on a
    genuine metric).
    """
    emb = e.require_embedding()
    a, b = e.candidate_index(a), e.candidate_index(b)
    dab = emb.candidate_candidate[a, b]
    if a == b or dab <= 0:
        raise CoincidentCandidatesError("wave premise needs two candidates at positive distance")
    radius = dab / h
    dist = emb.voter_candidate
    gamma = float(np.mean(dist[:, a] < radius))
    bound = float("inf") if gamma >= 1.0 else wave_bound(h, gamma)
    sca, scb = dist[:, a].sum(), dist[:, b].sum()
    ratio = float("inf") if sca == 0 else float(scb / sca)
    if ratio > bound * (1 + tol) + tol:
        raise LemmaViolation(f"SC(b)/SC(a) = {ratio} exceeds {bound} (gamma={gamma}, h={h})")
    return WavePremise(gamma, bound, ratio)
