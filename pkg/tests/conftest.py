import numpy as np
import pytest
from hypothesis import strategies as st

from brent_deflation.polysys import Monomial, Polynomial, PolySystem

ACCEPTANCE_LINES = []


def fd_jacobian(f, x, h=1e-5):
    """Central differences along each real coordinate axis (f is holomorphic)."""
    x = np.asarray(x, dtype=complex)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        cols.append((f(x + e) - f(x - e)) / (2 * h))
    return np.stack(cols, axis=1)


def fd_directional(f, x, v, h=1e-5):
    return (f(x + h * v) - f(x - h * v)) / (2 * h)


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
    return float(np.max(np.abs(a - b))) / scale if a.size else 0.0


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_polysystem(rng, n_vars, n_eqs, max_degree=3, n_terms=4):
    polys = []
    for _ in range(n_eqs):
        terms = {}
        for _ in range(n_terms):
            deg = int(rng.integers(0, max_degree + 1))
            exps = {}
            for _ in range(deg):
                v = int(rng.integers(0, n_vars))
                exps[v] = exps.get(v, 0) + 1
            terms[Monomial.from_map(exps)] = complex(rng.standard_normal(), rng.standard_normal())
        polys.append(Polynomial(terms, n_vars))
    return PolySystem(tuple(polys), n_vars)


def vanishing_at(system: PolySystem, x) -> PolySystem:
    """Subtract the value at x so that x becomes a solution."""
    vals = system(x)
    return PolySystem(tuple(p - complex(v) for p, v in zip(system.polys, vals)), system.n_vars)


@st.composite
def polynomials(draw, n_vars, max_degree=4, max_terms=6, integer=False):
    n_terms = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(n_terms):
        exps = draw(st.dictionaries(st.integers(0, n_vars - 1), st.integers(1, max_degree), max_size=n_vars))
        while sum(exps.values()) > max_degree:
            k = max(exps, key=exps.get)
            exps[k] -= 1
            if exps[k] == 0:
                del exps[k]
        if integer:
            c = complex(draw(st.integers(-5, 5)), draw(st.integers(-5, 5)))
        else:
            c = complex(draw(st.floats(-3, 3, allow_nan=False)), draw(st.floats(-3, 3, allow_nan=False)))
        terms[Monomial.from_map(exps)] = c
    return Polynomial(terms, n_vars)


@st.composite
def polysystems(draw, max_vars=6, max_eqs=4, max_degree=4, integer=False):
    n = draw(st.integers(1, max_vars))
    m = draw(st.integers(1, max_eqs))
    polys = tuple(draw(polynomials(n, max_degree, integer=integer)) for _ in range(m))
    return PolySystem(polys, n)


@pytest.fixture
def rng():
    return np.random.default_rng(20231016)


@pytest.fixture
def acceptance():
    def log(criterion, passed, detail=""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
        return passed
    return log


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
