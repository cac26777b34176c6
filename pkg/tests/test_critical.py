from fractions import Fraction
from itertools import combinations

import pytest
import sympy
from hypothesis import assume, given, strategies as st

from kptrop.critical import (critical_point, critical_point_solve, critical_value, difference_identity_check,
                             label, level_critical_value, order_critical_values, phase_difference_on_plane,
                             predicted_child_order)
from kptrop.errors import InvalidInput
from kptrop.model import all_phases, validate_config

from conftest import SIX_PHASE_P
from strategies import configs, small_rationals

F = Fraction


def sympy_point(cfg, S, times):
    """Independent oracle: solve theta_S equal with sympy over the free times."""
    n = len(S) - 1
    free = sympy.symbols(f"s1:{n + 1}")
    vec = cfg.time_vector(times)
    q = lambda v: sympy.Rational(v.numerator, v.denominator)
    coords = list(free) + [q(vec[r]) for r in range(n + 1, cfg.horizon + 1)]
    th = [sum(q(cfg.p[k - 1]) ** r * coords[r - 1] for r in range(1, cfg.horizon + 1)) + q(cfg.c[k - 1]) for k in S]
    sol = sympy.solve([th[0] - t for t in th[1:]], free, dict=True)[0]
    return [F(str(sol[s])) for s in free]


class TestCriticalValue:
    def test_homogeneous(self):
        cfg = validate_config(4, [0, 1, 2, 3, 5], [0] * 5)
        assert critical_value(cfg, [1, 3, 4]).value == 0

    def test_six_phase_top_value(self, six_phase_base):
        # oracle: exact 6x6 solve of theta_1 = ... = theta_6 (t5 free)
        expected = sympy_point(six_phase_base, list(range(1, 7)), {})[-1]
        assert expected == F(8, 13) + F(40, 189)
        assert critical_value(six_phase_base, range(1, 7)).value == expected

    def test_line_position(self):
        cfg = validate_config(2, [0, 1, 2], [0, 0, 3])
        assert critical_value(cfg, [1, 3], {2: 0}).value == F(-3, 2)
        # x13(y) = -(p1 + p3) y - c13
        assert critical_value(cfg, [1, 3], {2: 1}).value == -2 - F(3, 2)

    def test_labels(self):
        assert label((1, 2)) == "x12"
        assert label((1, 2, 3)) == "y123"
        assert label((1, 2, 3, 4)) == "t1234"
        assert label((1, 2, 3, 4, 5)) == "t4_12345"

    def test_single_index_rejected(self):
        cfg = validate_config(2, [0, 1, 2], [0, 0, 0])
        with pytest.raises(InvalidInput):
            critical_value(cfg, [1])


class TestCriticalPoint:
    def test_origin(self):
        cfg = validate_config(2, [0, 1, 2], [0, 0, 0])
        pt = critical_point(cfg, [1, 2, 3], {3: 0})
        assert pt.coordinates[:2] == (0, 0)

    @given(configs(min_M=3, max_M=5), st.data())
    def test_two_routes_and_sympy_agree(self, cfg, data):
        size = data.draw(st.integers(2, cfg.size))
        S = sorted(data.draw(st.lists(st.integers(1, cfg.size), min_size=size, max_size=size, unique=True)))
        a = critical_point(cfg, S)
        b = critical_point_solve(cfg, S)
        assert a == b
        assert list(a.coordinates[:len(S) - 1]) == sympy_point(cfg, S, {})
        th = all_phases(cfg, a.coordinates)
        assert {th[k - 1] for k in S} == {a.phase}

    def test_pair_lies_on_line(self):
        cfg = validate_config(3, [-1, 0, 1, 3], [1, 2, 0, -1])
        pt = critical_point(cfg, [2, 4], {2: 5, 3: 1})
        th = all_phases(cfg, pt.coordinates)
        assert th[1] == th[3]


class TestIdentities:
    def test_zero_constants(self):
        cfg = validate_config(3, [0, 1, 2, 4], [0] * 4)
        lhs, rhs = difference_identity_check(cfg, [1, 2, 3, 4], 1, 3, {3: 5})
        assert lhs == rhs == (cfg.p[0] - cfg.p[2]) * 5

    def test_same_index_rejected(self):
        cfg = validate_config(3, [0, 1, 2, 4], [0] * 4)
        with pytest.raises(InvalidInput):
            difference_identity_check(cfg, [1, 2, 3, 4], 2, 2)

    @given(configs(min_M=3, max_M=6), st.data())
    def test_difference_identity(self, cfg, data):
        size = data.draw(st.integers(3, cfg.size))
        S = sorted(data.draw(st.lists(st.integers(1, cfg.size), min_size=size, max_size=size, unique=True)))
        i, j = data.draw(st.lists(st.sampled_from(S), min_size=2, max_size=2, unique=True))
        t = {size - 1: data.draw(small_rationals)}
        lhs, rhs = difference_identity_check(cfg, S, i, j, t)
        assert lhs == rhs

    @given(configs(min_M=3, max_M=3), small_rationals)
    def test_triple_point_heights(self, cfg, t):
        # y_ijk - y_ijl = (p_l - p_k)(t - t_ijkl) for a parent of size four
        y = lambda S: critical_value(cfg, S, {3: t}).value
        t1234 = critical_value(cfg, [1, 2, 3, 4]).value
        p = cfg.p
        assert y([1, 2, 3]) - y([1, 2, 4]) == (p[3] - p[2]) * (t - t1234)

    @given(configs(min_M=2, max_M=5), st.data())
    def test_factored_difference(self, cfg, data):
        n = data.draw(st.integers(1, cfg.M))
        chain = data.draw(st.permutations(range(1, cfg.size + 1)))[:n + 1]
        higher = {r: data.draw(small_rationals) for r in range(n + 1, cfg.horizon + 1)}
        coeff, offset = phase_difference_on_plane(cfg, chain, higher)
        tn = data.draw(small_rationals)
        if n == 1:
            coords = [tn] + [higher.get(r, F(0)) for r in range(2, cfg.horizon + 1)]
        else:
            coords = list(critical_point_solve(cfg, chain[:n], {**higher, n: tn}).coordinates)
        th = all_phases(cfg, coords)
        assert th[chain[0] - 1] - th[chain[-1] - 1] == coeff * (tn - offset)

    def test_first_level_form(self):
        cfg = validate_config(1, [F(1, 2), 3], [1, -2])
        coeff, offset = phase_difference_on_plane(cfg, [1, 2], {2: 1})
        assert coeff == -(cfg.p[1] - cfg.p[0])
        # theta_1 - theta_2 = (p1 - p2)(x - x12)
        assert coeff == cfg.p[0] - cfg.p[1]


class TestOrdering:
    def test_four_phases_below(self):
        cfg = validate_config(3, [-1, 0, F(1, 2), 2], [0, 1, 0, -1])
        t = critical_value(cfg, [1, 2, 3, 4]).value - 1
        order = order_critical_values(cfg, [1, 2, 3, 4], {3: t})
        assert [cv.indices for cv in order.values] == [(1, 2, 3), (1, 2, 4), (1, 3, 4), (2, 3, 4)]

    def test_at_the_parent_value(self):
        cfg = validate_config(3, [-1, 0, F(1, 2), 2], [0, 1, 0, -1])
        t = critical_value(cfg, [1, 2, 3, 4]).value
        order = order_critical_values(cfg, [1, 2, 3, 4], {3: t})
        assert order.side == "at" and order.degenerate

    def test_five_phases_below(self, six_phase_base):
        t4 = critical_value(six_phase_base, [1, 2, 3, 4, 5], {5: 0}).value - 1
        order = order_critical_values(six_phase_base, [1, 2, 3, 4, 5], {5: 0, 4: t4})
        assert [cv.label for cv in order.values] == ["t1234", "t1235", "t1245", "t1345", "t2345"]

    def test_predicted_order_reverses(self):
        below = predicted_child_order((1, 2, 3, 4), "below")
        assert predicted_child_order((1, 2, 3, 4), "above") == below[::-1]

    @given(configs(min_M=3, max_M=5), st.data())
    def test_rule_holds_on_random_parents(self, cfg, data):
        size = data.draw(st.integers(3, cfg.size))
        S = sorted(data.draw(st.lists(st.integers(1, cfg.size), min_size=size, max_size=size, unique=True)))
        t = data.draw(small_rationals)
        order = order_critical_values(cfg, S, {size - 1: t})  # raises on a violated rule
        if order.side != "at":
            assert [cv.indices for cv in order.values] == predicted_child_order(S, order.side)


class TestLevelCriticalValues:
    def test_homogeneous(self, six_phase_base):
        cfg = validate_config(5, SIX_PHASE_P, [0] * 6)
        assert level_critical_value(cfg, [1, 2, 3, 6], [3, 4, 5, 6], {5: 0}).value == 0

    def test_six_phase_closed_form(self, six_phase_base):
        p1, p2, _, p4, p5, _ = six_phase_base.p
        top = critical_value(six_phase_base, range(1, 7)).value
        for t5 in (top - 3, top - F(1, 3), top + 2):
            times = {5: t5}
            lhs = (level_critical_value(six_phase_base, [1, 2, 3, 6], [3, 4, 5, 6], times).value
                   - critical_value(six_phase_base, [1, 2, 3, 5, 6], times).value)
            rhs = -(p4 - p1) * (p4 - p2) / (p4 + p5 - p1 - p2) * (t5 - top)
            assert lhs == rhs

    def test_equal_sums_rejected(self):
        cfg = validate_config(4, [0, 1, 2, 3, 4], [0] * 5)
        with pytest.raises(InvalidInput, match="parallel"):
            level_critical_value(cfg, [1, 4], [2, 3], {2: 0})

    @given(configs(min_M=4, max_M=5), st.data())
    def test_crossing_makes_values_equal(self, cfg, data):
        sets = list(combinations(range(1, cfg.size + 1), 4))
        a, b = data.draw(st.lists(st.sampled_from(sets), min_size=2, max_size=2, unique=True))
        assume(sum(cfg.p[k - 1] for k in a) != sum(cfg.p[k - 1] for k in b))
        t4 = level_critical_value(cfg, a, b).value
        assert critical_value(cfg, a, {4: t4}).value == critical_value(cfg, b, {4: t4}).value
