from fractions import Fraction
from itertools import combinations_with_replacement
from math import prod

import pytest
import sympy
from hypothesis import given, strategies as st

from kptrop.errors import InvalidInput
from kptrop.exact import (as_rational, c_coeff, c_coeff_det, determinant, format_rational, h_poly,
                          index_set, parse_rational, solve_linear, vandermonde)

from strategies import rationals

F = Fraction


def brute_h(m, values):
    return sum((prod(c) for c in combinations_with_replacement(values, m)), F(0)) if m >= 0 else F(0)


class TestParsing:
    @pytest.mark.parametrize("text,value", [("3", F(3)), ("-3/4", F(-3, 4)), (" 6/8 ", F(3, 4)), ("+2", F(2))])
    def test_rational_strings(self, text, value):
        assert parse_rational(text) == value

    @pytest.mark.parametrize("text", ["1.5", "1e3", "", "a/b", "1/0", "nan"])
    def test_rejects_non_rationals(self, text):
        with pytest.raises(InvalidInput):
            parse_rational(text)

    def test_decimals_only_when_allowed(self):
        assert parse_rational("-5.7", allow_decimal=True) == F(-57, 10)

    def test_floats_refused(self):
        with pytest.raises(InvalidInput):
            as_rational(0.5)

    @given(rationals)
    def test_format_roundtrip(self, q):
        assert parse_rational(format_rational(q)) == q


class TestSymmetricFunctions:
    def test_degree_one(self):
        p, q = F(2, 3), F(-5)
        assert h_poly(1, [p, q]) == p + q

    def test_small_values(self):
        assert h_poly(2, [1, 2]) == 7

    def test_repeated_entries(self):
        p = F(3, 5)
        assert h_poly(2, [p, p, p]) == 6 * p * p

    def test_degree_zero_and_negative(self):
        assert h_poly(0, [1, 2, 3]) == 1
        assert h_poly(-1, [1, 2]) == 0

    @given(st.integers(0, 5), st.lists(rationals, min_size=1, max_size=4))
    def test_against_monomial_expansion(self, m, values):
        assert h_poly(m, values) == brute_h(m, values)

    def test_vandermonde_examples(self):
        assert vandermonde([F(7)]) == 1
        assert vandermonde([1, 2, 3]) == 2
        assert vandermonde([1, 1, 2]) == 0

    @given(st.lists(rationals, min_size=1, max_size=5))
    def test_vandermonde_is_a_determinant(self, values):
        n = len(values)
        mat = sympy.Matrix(n, n, lambda i, j: sympy.Rational(values[i].numerator, values[i].denominator) ** j)
        assert vandermonde(values) == F(str(mat.det()))


class TestCriticalCoefficients:
    def test_pair(self):
        assert c_coeff([0, 1], [0, 3], {1, 2}) == 3

    def test_zero_constants(self):
        assert c_coeff([0, 1, 2, 5], [0, 0, 0, 0], [1, 2, 4]) == 0

    def test_single_surviving_term(self):
        assert c_coeff([0, 1, 2], [1, 0, 0], [1, 2, 3]) == F(1, 2)

    @given(st.lists(rationals, min_size=5, max_size=5, unique=True), st.lists(rationals, min_size=5, max_size=5),
           st.integers(2, 5))
    def test_sum_equals_determinant_route(self, p, c, size):
        S = list(range(1, size + 1))
        assert c_coeff(p, c, S) == c_coeff_det(p, c, S)

    @given(st.lists(rationals, min_size=4, max_size=4, unique=True), st.lists(rationals, min_size=4, max_size=4))
    def test_value_makes_phases_coincide(self, p, c):
        # with x_n = -c_S the phases of S agree on a plane: solve with sympy
        S = [1, 2, 3, 4]
        xs = sympy.symbols("x1:4")
        r = lambda q: sympy.Rational(q.numerator, q.denominator)
        th = [sum(r(p[k]) ** (m + 1) * xs[m] for m in range(3)) + r(c[k]) for k in range(4)]
        sol = sympy.solve([th[0] - th[k] for k in (1, 2, 3)], xs, dict=True)[0]
        assert F(str(sol[xs[2]])) == -c_coeff(p, c, S)

    def test_repeated_p_rejected(self):
        with pytest.raises(InvalidInput):
            c_coeff([1, 1, 2], [0, 0, 0], [1, 2])


class TestLinearAlgebra:
    @given(st.lists(st.lists(rationals, min_size=3, max_size=3), min_size=3, max_size=3))
    def test_determinant_matches_sympy(self, rows):
        mat = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row] for row in rows])
        assert determinant(rows) == F(str(mat.det()))

    @given(st.lists(st.lists(rationals, min_size=3, max_size=3), min_size=3, max_size=3),
           st.lists(rationals, min_size=3, max_size=3))
    def test_solve_linear(self, rows, rhs):
        if determinant(rows) == 0:
            with pytest.raises(ZeroDivisionError):
                solve_linear(rows, rhs)
            return
        x = solve_linear(rows, rhs)
        assert [sum(a * b for a, b in zip(row, x)) for row in rows] == list(rhs)

    def test_index_set(self):
        assert index_set({3, 1, 2}) == (1, 2, 3)
        with pytest.raises(InvalidInput):
            index_set([1, 1, 2])
        with pytest.raises(InvalidInput):
            index_set([0, 1], size=3)
