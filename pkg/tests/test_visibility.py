import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from kptrop.critical import critical_value
from kptrop.errors import InvalidInput
from kptrop.model import all_phases, validate_config
from kptrop.critical import critical_point_solve
from kptrop.suites import random_config
from kptrop.visibility import (deleted_positions, halfline_visibility_rule, is_visible, oracle_agreement,
                               prune_level, side_of, times_around, transitive_reduction, two_step_hidden,
                               two_step_rule, visible_points_at, visible_sets)

from strategies import configs, small_rationals

F = Fraction


def brute_visible(cfg, S, times):
    """Maximum over all phases at the coincidence point, computed from scratch."""
    pt = critical_point_solve(cfg, S, times).coordinates
    th = all_phases(cfg, pt)
    return max(th) == th[S[0] - 1]


class TestOracle:
    def test_all_phases_meet(self):
        cfg = validate_config(2, [-1, 0, 1], [0, 0, 0])
        v = is_visible(cfg, [1, 2, 3], {3: 0})
        assert v.visible and v.generic

    def test_hidden_after_the_critical_time(self):
        cfg = validate_config(3, [-1, 0, F(1, 2), 2], [0, 1, 0, -1])
        t = critical_value(cfg, [1, 2, 3, 4]).value + 1
        v = is_visible(cfg, [1, 2, 3], {3: t})
        assert not v.visible and v.witness == 4

    def test_tie_is_not_generic(self):
        cfg = validate_config(3, [-1, 0, F(1, 2), 2], [0, 1, 0, -1])
        t = critical_value(cfg, [1, 2, 3, 4]).value
        v = is_visible(cfg, [1, 2, 3], {3: t})
        assert v.visible and not v.generic and v.ties == (4,)

    @given(configs(min_M=2, max_M=5), st.data())
    def test_matches_brute_force(self, cfg, data):
        size = data.draw(st.integers(2, cfg.size))
        S = sorted(data.draw(st.lists(st.integers(1, cfg.size), min_size=size, max_size=size, unique=True)))
        times = {size - 1 + k: data.draw(small_rationals) for k in range(1, 2) if size <= cfg.horizon}
        assert is_visible(cfg, S, times).visible == brute_visible(cfg, S, times)


class TestRules:
    def test_triple_above(self):
        dead, alive = halfline_visibility_rule((1, 2, 3), "above")
        assert sorted(dead) == [(1, 2), (2, 3)] and alive == [(1, 3)]

    def test_quadruple_below(self):
        dead, _ = halfline_visibility_rule((1, 2, 3, 4), "below")
        assert sorted(dead) == [(1, 2, 4), (2, 3, 4)]

    def test_quintuple_below(self):
        dead, _ = halfline_visibility_rule((1, 2, 3, 4, 5), "below")
        assert sorted(dead) == [(1, 2, 3, 5), (1, 3, 4, 5)]

    def test_positions_alternate(self):
        assert deleted_positions(6, "below") == [5, 3, 1]
        assert deleted_positions(6, "above") == [6, 4, 2]

    def test_bad_side(self):
        with pytest.raises(InvalidInput):
            deleted_positions(4, "left")

    def test_two_step_example_six_phases(self):
        assert two_step_hidden((1, 2, 3, 4, 5, 6), "below") == [(1, 2, 4, 6), (2, 3, 4, 6), (2, 4, 5, 6)]
        assert two_step_hidden((1, 2, 3, 4, 5, 6), "above") == [(1, 2, 3, 5), (1, 3, 4, 5), (1, 3, 5, 6)]

    def test_two_step_bounds_checked(self):
        with pytest.raises(InvalidInput):
            two_step_rule((1, 2, 3, 4, 5, 6), 2, 1, "below")
        with pytest.raises(InvalidInput):
            two_step_rule((1, 2, 3), 0, 1, "below")

    @pytest.mark.parametrize("seed", range(4))
    @pytest.mark.parametrize("side", ["below", "above"])
    def test_two_step_sets_never_visible(self, seed, side):
        # the grandchildren stay hidden for every t4 once t5 is on one side
        rng = random.Random(seed)
        cfg = random_config(rng, 5, frozen=False)
        top = critical_value(cfg, range(1, 7)).value
        t5 = top - 1 if side == "below" else top + 1
        for S in two_step_hidden((1, 2, 3, 4, 5, 6), side):
            for _ in range(25):
                t4 = F(rng.randint(-400, 400), 20)
                assert not is_visible(cfg, S, {5: t5, 4: t4}).visible


class TestPipeline:
    @given(configs(min_M=3, max_M=5), st.data())
    def test_prune_level_matches_oracle(self, cfg, data):
        # prune_level raises ConsistencyError on any generic disagreement
        times = {r: data.draw(small_rationals) for r in range(3, cfg.horizon + 1)}
        assert oracle_agreement(cfg, times) > 0
        for level in range(2, cfg.M):
            res = visible_sets(cfg, level, times)
            if not res.degenerate:
                assert sorted(res.visible_sets) == visible_points_at(cfg, level, times)

    def test_single_critical_time_for_four_phases(self):
        cfg = validate_config(3, [-1, 0, F(1, 2), 2], [0, 1, 0, -1])
        assert visible_sets(cfg, 3).visible_sets == [(1, 2, 3, 4)]

    def test_five_phases_below(self):
        cfg = validate_config(4, [-2, -1, 0, 1, 3], [0, 1, 2, 1, 0])
        t4 = critical_value(cfg, range(1, 6)).value - 1
        res = visible_sets(cfg, 3, {4: t4})
        assert [cv.label for cv in res.visible] == ["t1234", "t1245", "t2345"]
        assert res.relations == [((1, 2, 3, 4), (1, 2, 4, 5)), ((1, 2, 4, 5), (2, 3, 4, 5))]

    def test_six_phase_critical_times(self, six_phase):
        res = visible_sets(six_phase, 3)
        assert [cv.label for cv in res.visible] == ["t1234", "t1245", "t2345", "t1256", "t2356", "t3456"]

    def test_level_range(self, six_phase):
        with pytest.raises(InvalidInput):
            prune_level(six_phase, 5, [(1, 2, 3, 4, 5, 6)])

    def test_times_around(self, six_phase):
        around = times_around(six_phase, (1, 2, 3, 4, 5), six_phase.fixed_times)
        assert side_of(six_phase, (1, 2, 3, 4, 5), around["below"]) == "below"
        assert side_of(six_phase, (1, 2, 3, 4, 5), around["above"]) == "above"


class TestTransitiveReduction:
    def test_chain(self):
        assert transitive_reduction([1, 2, 3], [(1, 2), (2, 3), (1, 3)]) == [(1, 2), (2, 3)]

    @given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), max_size=20))
    def test_keeps_reachability(self, pairs):
        edges = {(a, b) for a, b in pairs if a < b}
        nodes = list(range(7))
        red = transitive_reduction(nodes, edges)

        def closure(es):
            reach = {(a, b) for a, b in es}
            changed = True
            while changed:
                new = {(a, d) for a, b in reach for c, d in reach if b == c} - reach
                changed = bool(new)
                reach |= new
            return reach

        assert closure(red) == closure(edges)
        assert set(red) <= edges
        for e in red:
            assert closure(set(red) - {e}) != closure(edges)
