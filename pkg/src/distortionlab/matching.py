"""Maximum bipartite matching by augmenting paths (Kuhn's algorithm)."""

from __future__ import annotations

import numpy as np


def maximum_matching(adj: np.ndarray, stop_on_deficit: bool = False) -> np.ndarray:
    """Maximum matching of a bipartite graph given as a boolean (left x right) matrix.

    Returns ``match`` with ``match[u]`` the right vertex paired with left
    vertex ``u`` or -1.  A greedy pass seeds the matching; each remaining free
    left vertex then searches for an augmenting path with an explicit stack.
    With ``stop_on_deficit`` the search gives up at the first left vertex that
    cannot be matched, which is enough to decide whether a perfect matching
    exists.
    """
    adj = np.asarray(adj, dtype=bool)
    n_left, n_right = adj.shape
    nbrs = [np.flatnonzero(row).tolist() for row in adj]
    match_l = [-1] * n_left
    match_r = [-1] * n_right

    for u in range(n_left):
        for v in nbrs[u]:
            if match_r[v] < 0:
                match_l[u], match_r[v] = v, u
                break

    stamp = [-1] * n_right
    for root in range(n_left):
        if match_l[root] >= 0:
            continue
        # stack frames: [left vertex, next neighbour offset]; parent[v] = left vertex reaching v
        parent = {}
        stack = [[root, 0]]
        found = -1
        while stack and found < 0:
            frame = stack[-1]
            u, k = frame
            row = nbrs[u]
            if k >= len(row):
                stack.pop()
                continue
            frame[1] = k + 1
            v = row[k]
            if stamp[v] == root:
                continue
            stamp[v] = root
            parent[v] = u
            if match_r[v] < 0:
                found = v
            else:
                stack.append([match_r[v], 0])
        if found < 0:
            if stop_on_deficit:
                break
            continue
        v = found
        while v >= 0:
            u = parent[v]
            prev = match_l[u]
            match_l[u], match_r[v] = v, u
            v = prev if u != root else -1
    return np.array(match_l, dtype=int)
