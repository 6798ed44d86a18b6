"""Worst-case distortion of a fixed candidate over all (rho-relaxed) pseudometrics
consistent with a ranking profile, by linear programming.

For a winner ``w`` and a reference candidate ``x`` the program maximises
SC(w) subject to SC(x) = 1.  The maximum over x != w equals
sup SC(w) / min_y SC(y).  It is at least the sup: for any consistent metric
the minimiser y is some candidate, and that metric scaled to SC(y) = 1 is
feasible for the x = y program.  It is at most the sup: an optimum of the x
program has ratio SC(w)/SC(x), and min_y SC(y) <= SC(x).  The x = w program
is trivially 1 and is skipped.

A program is unbounded exactly when every voter ranks x above w; then all
voters may sit on x and the distortion of w is infinite.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .election import Election, Embedding
from .errors import SameCandidateError, SolverFailure, UnboundedModel
from .metric import GENERAL, DistanceMatrix, check_metric, rho_approx
from .election import check_consistency

WITNESS_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class LPModel:
    """max c.d  s.t.  A_ub d <= b_ub,  A_eq d = b_eq,  d >= 0.

    Points are the n voters followed by the m candidates; ``pairs[k]`` is the
    unordered point pair behind variable k.  Triangle rows are kept for every
    ordered triple of distinct points, so mirrored triples appear twice.
    """

    n_voters: int
    m_candidates: int
    rho: float
    w: int
    x: int
    pairs: tuple
    c: np.ndarray
    A_ub: sparse.csr_matrix
    b_ub: np.ndarray
    A_eq: sparse.csr_matrix
    b_eq: np.ndarray
    row_kinds: tuple  # per A_ub row: "triangle" or "consistency"
    triangle_canonical: np.ndarray  # triangle rows whose outer points are ordered p < q

    @property
    def n_points(self) -> int:
        return self.n_voters + self.m_candidates

    @property
    def n_variables(self) -> int:
        return len(self.pairs)

    def count(self, kind: str) -> int:
        if kind == "normalization":
            return self.A_eq.shape[0]
        return sum(1 for k in self.row_kinds if k == kind)

    def var(self, p: int, q: int) -> int:
        return _pair_index(p, q, self.n_points)

    def point_label(self, p: int) -> str:
        return f"v{p}" if p < self.n_voters else f"c{p - self.n_voters}"

    def to_lp_format(self) -> str:
        """CPLEX-LP text of the model, for cross-checking with external solvers."""
        names = [f"d_{self.point_label(p)}_{self.point_label(q)}" for p, q in self.pairs]

        def expr(row) -> str:
            terms = []
            for j, v in zip(row.indices, row.data):
                sign = "-" if v < 0 else "+"
                coef = abs(v)
                terms.append(f"{sign} {names[j]}" if coef == 1 else f"{sign} {coef:.17g} {names[j]}")
            text = " ".join(terms)
            return text[2:] if text.startswith("+ ") else text

        lines = ["\\ worst-case distortion", "Maximize",
                 " obj: " + expr(sparse.csr_matrix(self.c))]
        lines.append("Subject To")
        for k in range(self.A_ub.shape[0]):
            lines.append(f" {self.row_kinds[k][:3]}{k}: {expr(self.A_ub.getrow(k))} <= {self.b_ub[k]:.17g}")
        for k in range(self.A_eq.shape[0]):
            lines.append(f" norm{k}: {expr(self.A_eq.getrow(k))} = {self.b_eq[k]:.17g}")
        lines.append("Bounds")
        lines.extend(f" {nm} >= 0" for nm in names)
        lines.append("End")
        return "\n".join(lines) + "\n"


def _pair_index(p: int, q: int, N: int) -> int:
    if p > q:
        p, q = q, p
    # row-major index into the strict upper triangle
    return p * N - p * (p + 1) // 2 + (q - p - 1)


def build_lp(e: Election, w: int, x: int, rho: float = 1.0) -> LPModel:
    """Linear program maximising SC(w) over profile-consistent rho-relaxed
    pseudometrics normalised to SC(x) = 1."""
    w, x = e.candidate_index(w), e.candidate_index(x)
    if w == x:
        raise SameCandidateError("the reference candidate must differ from w")
    if not rho >= 1:
        raise ValueError("rho must be >= 1")
    n, m = e.n_voters, e.m_candidates
    N = n + m
    pairs = tuple(itertools.combinations(range(N), 2))
    nv = len(pairs)

    # triangle: d(p,q) - rho d(p,s) - rho d(s,q) <= 0 for ordered distinct (p, s, q)
    trip = np.array(list(itertools.permutations(range(N), 3)), dtype=int).reshape(-1, 3)
    p, s, q = trip[:, 0], trip[:, 1], trip[:, 2]

    def idx(a, b):
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        return lo * N - lo * (lo + 1) // 2 + (hi - lo - 1)

    t_rows = np.repeat(np.arange(len(trip)), 3)
    t_cols = np.stack([idx(p, q), idx(p, s), idx(s, q)], axis=1).ravel()
    t_vals = np.tile([1.0, -rho, -rho], len(trip))

    # consistency: d(i,a) - d(i,b) <= 0 for consecutive a > b in voter i's ranking
    c_rows, c_cols, c_vals = [], [], []
    k = len(trip)
    for i in range(n):
        ranking = e.profile[i]
        for a, b in zip(ranking[:-1], ranking[1:]):
            c_rows += [k, k]
            c_cols += [_pair_index(i, n + a, N), _pair_index(i, n + b, N)]
            c_vals += [1.0, -1.0]
            k += 1
    n_cons = k - len(trip)

    A_ub = sparse.coo_matrix(
        (np.concatenate([t_vals, c_vals]),
         (np.concatenate([t_rows, c_rows]).astype(int), np.concatenate([t_cols, c_cols]).astype(int))),
        shape=(k, nv)).tocsr()
    A_ub.sum_duplicates()
    b_ub = np.zeros(k)

    A_eq = sparse.lil_matrix((1, nv))
    for i in range(n):
        A_eq[0, _pair_index(i, n + x, N)] = 1.0
    c = np.zeros(nv)
    for i in range(n):
        c[_pair_index(i, n + w, N)] = 1.0

    kinds = ("triangle",) * len(trip) + ("consistency",) * n_cons
    canonical = np.concatenate([p < q, np.ones(n_cons, dtype=bool)])
    return LPModel(n, m, float(rho), w, x, pairs, c, A_ub, b_ub,
                   A_eq.tocsr(), np.array([1.0]), kinds, canonical)


class LPSolution(NamedTuple):
    value: float
    d: np.ndarray  # full N x N distance matrix


def solve_lp(model: LPModel) -> LPSolution:
    """Solve with HiGHS interior point plus crossover (a vertex solution).

    Interior point is about three times faster than dual simplex on these
    models, which have many more rows than columns.
    """
    keep = model.triangle_canonical  # mirrored triangle rows are identical; drop one copy
    res = linprog(-model.c, A_ub=model.A_ub[keep], b_ub=model.b_ub[keep],
                  A_eq=model.A_eq, b_eq=model.b_eq, bounds=(0, None), method="highs-ipm",
                  options={"primal_feasibility_tolerance": 1e-9,
                           "dual_feasibility_tolerance": 1e-9})
    if res.status == 3:
        raise UnboundedModel("worst-case LP is unbounded; normalisation missing")
    if res.status != 0:
        raise SolverFailure(f"LP solver failed: {res.message}")
    N = model.n_points
    d = np.zeros((N, N))
    iu = np.triu_indices(N, 1)
    d[iu] = np.maximum(res.x, 0.0)
    d = d + d.T
    return LPSolution(float(-res.fun), d)


@dataclass(frozen=True, eq=False)
class WorstCaseResult:
    value: float
    witness: DistanceMatrix | None  # None when the value is infinite
    reference_optimum: int
    per_reference: dict  # x -> LP optimum with SC(x) normalised to 1
    election: Election | None  # the profile re-embedded on the witness metric

    @property
    def has_coincident_points(self) -> bool:
        """True if the witness puts two distinct points at distance zero (pseudometric)."""
        if self.witness is None:
            return False
        d = self.witness.d
        off = ~np.eye(d.shape[0], dtype=bool)
        return bool((d[off] <= 1e-12).any())


def witness_election(e: Election, d: np.ndarray, rho: float) -> Election:
    n, m = e.n_voters, e.m_candidates
    labels = tuple(f"v{i}" for i in range(n)) + tuple(f"c{a}" for a in range(m))
    cls = GENERAL if rho == 1 else rho_approx(rho)
    D = DistanceMatrix(d, labels, cls)
    emb = Embedding(D, tuple(range(n)), tuple(range(n, n + m)))
    return Election(e.profile, e.candidates, emb, dict(e.meta))


def worst_case_distortion(e: Election, w: int, rho: float = 1.0) -> WorstCaseResult:
    """max over x != w of the LP optimum; the witness is re-checked against the
    rho-relaxed triangle inequality and the profile at tolerance 1e-6.

    If some x is ranked above w by every voter the value is ``inf`` and no
    witness is returned.
    """
    w = e.candidate_index(w)
    n, m = e.n_voters, e.m_candidates
    if m == 1:
        d = np.zeros((n + 1, n + 1))
        we = witness_election(e, d, rho)
        return WorstCaseResult(1.0, we.embedding.metric, w, {}, we)
    per_x = {}
    best = None
    for x in range(m):
        if x == w:
            continue
        try:
            sol = solve_lp(build_lp(e, w, x, rho))
        except UnboundedModel:
            if not (e.positions[:, x] < e.positions[:, w]).all():
                raise
            per_x[x] = math.inf
            continue
        per_x[x] = sol.value
        if best is None or sol.value > best[0] + 1e-12:
            best = (sol.value, x, sol.d)
    if math.inf in per_x.values():
        x = min(c for c, v in per_x.items() if v == math.inf)
        return WorstCaseResult(math.inf, None, x, per_x, None)
    value, x, d = best
    we = witness_election(e, d, rho)
    D = we.embedding.metric
    bad = check_metric(D, tol=WITNESS_TOL)
    if bad:
        raise SolverFailure(f"witness violates the triangle inequality by {bad.worst:g}")
    bad = check_consistency(we, tol=WITNESS_TOL)
    if bad:
        raise SolverFailure(f"witness inconsistent with the profile by {bad.worst:g}")
    return WorstCaseResult(value, D, x, per_x, we)
