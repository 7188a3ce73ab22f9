import math
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from horoboundary.spaces import Ladder, PoincareDisc


def ladder_graph(points, extra=2):
    """Independent oracle: the ladder as a weighted graph through the given points."""
    a_max = max(math.ceil(p[0]) for p in points) + extra
    g = nx.Graph()
    rails = {1: set(), -1: set()}
    rungs = {}
    for k in range(a_max + 1):
        rails[1].add(k)
        rails[-1].add(k)
        rungs.setdefault(k, set()).update({-1, 1})
    for a, b in points:
        if b in (1, -1):
            rails[b].add(a)
        if a == int(a):
            rungs.setdefault(int(a), set()).add(b)
            if b in (1, -1):
                rails[b].add(int(a))
    for eps, xs in rails.items():
        xs = sorted(xs)
        for u, v in zip(xs, xs[1:]):
            g.add_edge(("p", u, eps), ("p", v, eps), weight=v - u)
    for k, bs in rungs.items():
        bs = sorted(bs)
        for u, v in zip(bs, bs[1:]):
            g.add_edge(("p", k, u), ("p", k, v), weight=v - u)
    return g


def _node(g, x):
    a, b = x
    key = ("p", int(a) if a == int(a) else a, b)
    assert key in g, key
    return key


def ladder_oracle(x, y):
    g = ladder_graph([x, y])
    return nx.dijkstra_path_length(g, _node(g, x), _node(g, y))


def random_ladder_point(rng, radius=10):
    """Exact rational ladder point."""
    if rng.random() < 0.5:
        return (Fraction(int(rng.integers(0, 64 * radius)), 64), int(rng.choice([-1, 1])))
    return (int(rng.integers(0, radius + 1)), Fraction(int(rng.integers(-64, 65)), 64))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def ladder():
    return Ladder()


@pytest.fixture
def disc():
    return PoincareDisc()


ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Time a criterion block, enforce its runtime limit and record a pass/fail line."""
    import contextlib
    import time

    @contextlib.contextmanager
    def run(number, title, limit):
        start = time.perf_counter()
        ok = False
        try:
            yield
            ok = True
        finally:
            elapsed = time.perf_counter() - start
            ok = ok and elapsed < limit
            ACCEPTANCE.append((number, title, ok, elapsed, limit))
        assert elapsed < limit, f"criterion {number} took {elapsed:.2f}s (limit {limit}s)"

    return run


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, elapsed, limit in sorted(ACCEPTANCE):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {status}  {title}  ({elapsed:.2f}s < {limit}s)")
