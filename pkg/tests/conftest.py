import numpy as np
import pytest
from hypothesis import strategies as st

from toda.expr import Expr, normalize


@st.composite
def monomials(draw, n, max_degree=4):
    size = 3 * n
    deg = draw(st.integers(0, max_degree))
    exps = [0] * size
    for _ in range(deg):
        exps[draw(st.integers(0, size - 1))] += 1
    return tuple(exps)


@st.composite
def exprs(draw, n=None, max_terms=5, max_degree=4):
    if n is None:
        n = draw(st.integers(2, 4))
    terms = draw(st.lists(st.tuples(st.integers(-5, 5), monomials(n, max_degree)), max_size=max_terms))
    return normalize(n, terms)


@st.composite
def expr_pairs(draw):
    n = draw(st.integers(2, 4))
    return draw(exprs(n)), draw(exprs(n))


def states(n, seed=0, count=1, scale=0.8):
    rng = np.random.default_rng(seed)
    return rng.uniform(-scale, scale, size=(count, 2 * n)), rng.uniform(-1, 1, size=count)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
