import numpy as np
import pytest
from hypothesis import strategies as st

from distortionlab import generators as G

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    """Collect a one-line PASS/FAIL verdict for the acceptance summary."""
    def _record(criterion: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
        print(line)
        ACCEPTANCE_LINES.append(line)
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@st.composite
def profiles(draw, max_n=8, max_m=5, min_m=1):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(min_m, max_m))
    perms = st.permutations(list(range(m)))
    return np.array([draw(perms) for _ in range(n)], dtype=int).reshape(n, m)


@st.composite
def euclidean_elections(draw, max_n=9, max_m=5, dim=None):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(2, max_m))
    d = dim or draw(st.integers(1, 3))
    seed = draw(st.integers(0, 2**32 - 1))
    return G.gen_random_euclidean(n, m, d, 2.0, seed)


@st.composite
def graph_elections(draw, max_n=9, max_m=5, mode="shortest_path"):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(2, max_m))
    seed = draw(st.integers(0, 2**32 - 1))
    return G.gen_random_graph(n, m, edge_prob=draw(st.floats(0.0, 0.6)), mode=mode, seed=seed)
