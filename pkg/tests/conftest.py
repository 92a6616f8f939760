import numpy as np
import pytest

from dbnot.constraints import DualBoundedSet
from dbnot.graph import random_connected_graph
from dbnot.linalg import SparseAffinity


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_plan(rng, n, c):
    return rng.dirichlet(np.ones(c), n)


def random_sparse(rng, n, density=0.4):
    return SparseAffinity(random_connected_graph(n, density, rng))


def two_cliques(sizes, weight=1.0):
    n = sum(sizes)
    A = np.zeros((n, n))
    start = 0
    for s in sizes:
        A[start:start + s, start:start + s] = weight
        start += s
    np.fill_diagonal(A, 0.0)
    return A


def row_simplex_set(n, c):
    return DualBoundedSet(n, c, 0.0, float(n))


ACCEPTANCE = {}


def record_acceptance(number: int, title: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {title} ({detail})"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for key in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[key])
