import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from brent_deflation.errors import InputError, ParseError
from brent_deflation.polysys import (
    Monomial,
    Polynomial,
    PolySystem,
    eval_system,
    format_polynomial,
    jacobian,
    parse_polynomial,
    parse_system,
    shift,
    symbolic_deflate,
)

from conftest import crandn, fd_jacobian, polynomials, polysystems, rel_err

CUSP = parse_system("x2^2 - x1^3")
WHITNEY = parse_system("x1^2 - x2^2*x3")


class TestEval:
    def test_cusp_on_curve(self):
        assert eval_system(CUSP, [1, 1]) == pytest.approx([0])
        assert eval_system(CUSP, [0, 0]) == pytest.approx([0])

    def test_whitney(self):
        assert eval_system(WHITNEY, [2, 2, 1]) == pytest.approx([0])

    def test_off_curve(self):
        assert eval_system(CUSP, [2, 1])[0] == pytest.approx(1 - 8)

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            eval_system(CUSP, [1, 2, 3])
        with pytest.raises(InputError):
            jacobian(CUSP, [1])


class TestJacobian:
    def test_cusp(self):
        assert np.allclose(jacobian(CUSP, [1, 1]), [[-3, 2]])

    def test_whitney_origin(self):
        assert np.array_equal(jacobian(WHITNEY, [0, 0, 0]), np.zeros((1, 3)))

    @settings(max_examples=60, deadline=None)
    @given(polysystems(max_vars=6, max_degree=4), st.integers(0, 2**32 - 1))
    def test_matches_finite_differences(self, sys, seed):
        x = crandn(np.random.default_rng(seed), sys.n_vars)
        J = jacobian(sys, x)
        Jfd = fd_jacobian(sys, x, 1e-5)
        assert np.max(np.abs(J - Jfd)) <= 1e-6 * (1 + np.max(np.abs(J)))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 5).flatmap(lambda n: st.tuples(polynomials(n), polynomials(n))),
           st.integers(0, 2**32 - 1))
    def test_linearity(self, pair, seed):
        f, g = pair
        n = f.ambient_dim
        rng = np.random.default_rng(seed)
        a, b = complex(*rng.standard_normal(2)), complex(*rng.standard_normal(2))
        x = crandn(rng, n)
        lhs = jacobian(PolySystem((f.scale(a) + g.scale(b),), n), x)
        rhs = a * jacobian(PolySystem((f,), n), x) + b * jacobian(PolySystem((g,), n), x)
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


class TestShift:
    def test_along_e1(self):
        assert shift(CUSP, [1, 0]) == parse_system("-3x1^2", 2)

    def test_mixed_partial_vanishes(self):
        out = shift(shift(CUSP, [1, 0]), [0, 1])
        assert out.polys[0].is_zero()

    @settings(max_examples=60, deadline=None)
    @given(polysystems(max_vars=5, max_degree=4, integer=True), st.integers(0, 2**32 - 1))
    def test_commutes_exactly_for_integer_directions(self, sys, seed):
        rng = np.random.default_rng(seed)
        u = rng.integers(-4, 5, sys.n_vars)
        v = rng.integers(-4, 5, sys.n_vars)
        assert shift(shift(sys, u), v) == shift(shift(sys, v), u)

    @settings(max_examples=40, deadline=None)
    @given(polysystems(max_vars=5, max_degree=3), st.integers(0, 2**32 - 1))
    def test_commutes_termwise_for_complex_directions(self, sys, seed):
        rng = np.random.default_rng(seed)
        u, v = crandn(rng, sys.n_vars), crandn(rng, sys.n_vars)
        a, b = shift(shift(sys, u), v), shift(shift(sys, v), u)
        for p, q in zip(a.polys, b.polys):
            keys = set(p.terms) | set(q.terms)
            for k in keys:
                assert p.terms.get(k, 0) == pytest.approx(q.terms.get(k, 0), rel=1e-12, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(polysystems(max_vars=5, max_degree=4), st.integers(0, 2**32 - 1))
    def test_degree_law(self, sys, seed):
        u = crandn(np.random.default_rng(seed), sys.n_vars)
        for p, q in zip(sys.polys, shift(sys, u).polys):
            assert q.degree() == max(p.degree() - 1, 0)

    @settings(max_examples=40, deadline=None)
    @given(polysystems(max_vars=6, max_degree=4), st.integers(0, 2**32 - 1))
    def test_eval_of_shift_is_jacobian_action(self, sys, seed):
        rng = np.random.default_rng(seed)
        x, u = crandn(rng, sys.n_vars), crandn(rng, sys.n_vars)
        lhs = eval_system(shift(sys, u), x)
        rhs = jacobian(sys, x) @ u
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            shift(CUSP, [1, 0, 0])


class TestSymbolicDeflate:
    def test_cusp_structure(self):
        out = symbolic_deflate(CUSP, np.eye(2), [1, 1])
        assert out.n_vars == 4 and out.n_eqs == 1 + 1 + 2
        assert out.polys[1] == parse_polynomial("2*x2*x4 - 3*x1^2*x3", 4)
        assert out.polys[2] == parse_polynomial("x3 - 1", 4)
        assert out.polys[3] == parse_polynomial("x4 - 1", 4)

    def test_twice_equation_count(self, rng):
        m, n = CUSP.n_eqs, CUSP.n_vars
        n0, n1 = 2, 1
        F1 = symbolic_deflate(CUSP, crandn(rng, n0, n), crandn(rng, n0))
        F2 = symbolic_deflate(F1, crandn(rng, n1, 2 * n), crandn(rng, n1))
        assert F2.n_eqs == 2 * (2 * m + n0) + n1
        assert F2.n_vars == 4 * n

    def test_jacobian_block_structure(self, rng):
        R, d = crandn(rng, 2, 3), crandn(rng, 2)
        F1 = symbolic_deflate(WHITNEY, R, d)
        X, Y = crandn(rng, 3), crandn(rng, 3)
        J1 = F1.jacobian(np.concatenate([X, Y]))
        J = WHITNEY.jacobian(X)
        H = WHITNEY.shift(Y).jacobian(X)
        expected = np.block([[J, np.zeros((1, 3))], [H, J], [np.zeros((2, 3)), R]])
        assert np.allclose(J1, expected, atol=1e-12)

    def test_errors(self):
        with pytest.raises(InputError):
            symbolic_deflate(CUSP, np.eye(3), [1, 1, 1])
        with pytest.raises(InputError):
            symbolic_deflate(CUSP, np.eye(2), [1])


class TestPolynomial:
    def test_no_zero_coefficients_stored(self):
        p = parse_polynomial("x1 - x1 + 0*x2 + 3", 2)
        assert list(p.terms.values()) == [3]

    def test_degree_of_zero_is_zero(self):
        assert Polynomial.zero(3).degree() == 0

    def test_graded_lex_order(self):
        p = parse_polynomial("1 + x2 + x1 + x1*x2 + x2^3 + x1^2", 2)
        assert [m.dense(2) for m in p.terms] == [(0, 3), (2, 0), (1, 1), (1, 0), (0, 1), (0, 0)]

    def test_monomial_invariants(self):
        with pytest.raises(InputError):
            Monomial(((0, 0),))
        with pytest.raises(InputError):
            Polynomial({Monomial.var(3): 1}, 2)


class TestParser:
    @pytest.mark.parametrize("text,x,expected", [
        ("x1^2 - 2x1x2 + x2^2", [3, 1], 4),
        ("(1+2i)*x1", [2, 0], 2 + 4j),
        ("2.5e-1 x1 + i", [4, 0], 1 + 1j),
        ("-(x1 + x2)^2", [1, 2], -9),
        ("3", [0, 0], 3),
        ("-2i x2", [0, 1], -2j),
    ])
    def test_values(self, text, x, expected):
        assert parse_polynomial(text, 2)(x) == pytest.approx(expected)

    def test_system_with_comments(self):
        sys = parse_system("# cusp\n x2^2 - x1^3  # curve\n\n x1*x2\n")
        assert sys.n_vars == 2 and sys.n_eqs == 2

    @pytest.mark.parametrize("bad,where", [("x1 + $", "line 1"), ("x1^x2", "exponent"), ("(x1", "')'"),
                                           ("x0", "x1"), ("x1 +", "end")])
    def test_errors(self, bad, where):
        with pytest.raises(ParseError, match=where.replace("(", r"\(").replace(")", r"\)").replace("$", r"\$")):
            parse_system(bad)

    def test_variable_beyond_declared(self):
        with pytest.raises(ParseError):
            parse_system("x3", n_vars=2)

    @settings(max_examples=60, deadline=None)
    @given(polynomials(4, max_degree=4, integer=True))
    def test_format_roundtrip(self, p):
        assert parse_polynomial(format_polynomial(p), 4) == p
