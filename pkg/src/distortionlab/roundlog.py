"""Per-round records of iterative processes (STV runs and voting dynamics)."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Round:
    index: int
    phase: str
    tallies: dict  # candidate -> votes this round
    votes: np.ndarray  # votes[i] = candidate voter i supported
    theta: float | None = None
    note: str = ""


@dataclass
class RoundLog:
    n_voters: int
    rounds: list = field(default_factory=list)

    def append(self, phase: str, votes: np.ndarray, m: int, theta: float | None = None,
               candidates=None, note: str = "") -> Round:
        """Record one round; ``candidates`` restricts the tally keys (defaults to all)."""
        votes = np.asarray(votes, dtype=int).copy()
        counts = np.bincount(votes, minlength=m)
        keys = range(m) if candidates is None else sorted(int(c) for c in candidates)
        tallies = {int(c): int(counts[c]) for c in keys}
        if sum(tallies.values()) != self.n_voters:
            raise AssertionError("round tallies must sum to the number of voters")
        rnd = Round(len(self.rounds) + 1, phase, tallies, votes, theta, note)
        self.rounds.append(rnd)
        return rnd

    def __len__(self) -> int:
        return len(self.rounds)

    def __iter__(self):
        return iter(self.rounds)

    def __getitem__(self, k) -> Round:
        return self.rounds[k]

    def to_csv(self, path=None, agents: bool = False) -> str:
        """Serialize as CSV (round, phase, candidate, tally).

        With ``agents=True`` the per-agent actions follow as
        (round, phase, voter, candidate) rows; this can be large.
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["round", "phase", "candidate", "tally"])
        for r in self.rounds:
            for c, t in r.tallies.items():
                w.writerow([r.index, r.phase, c, t])
        if agents:
            w.writerow([])
            w.writerow(["round", "phase", "voter", "candidate"])
            for r in self.rounds:
                for i, c in enumerate(r.votes):
                    w.writerow([r.index, r.phase, i, int(c)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text
