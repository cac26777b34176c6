import math
import xml.etree.ElementTree as ET
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import HealthCheck, given, settings

from kptrop.combinatorics import tamari
from kptrop.critical import critical_point_solve
from kptrop.errors import InvalidInput
from kptrop.evolution import classify_evolution, tree_at_event
from kptrop.general import build_tau, tau_from_terms, triple_point, wedge_spec
from kptrop.model import all_phases, validate_config
from kptrop.render import (BBox, auto_bbox, boundaries_svg, bounded_regions, exact_u, exact_u_grid, extract_boundaries,
                           junctions, parse_bbox, parse_resolution, region_adjacency, render_svg,
                           tropical_amplitude, tropical_field, tropical_u)

from strategies import configs

F = Fraction


def exact_winners(cfg, x, y, times=None):
    th = all_phases(cfg, {**(times or {}), 1: x, 2: y})
    return tuple(k + 1 for k, v in enumerate(th) if v == max(th))


class TestGrids:
    def test_two_half_planes(self):
        cfg = validate_config(1, [F(-1, 2), 1], [1, -1])
        grid = tropical_field(cfg, "-5,5,-5,5", "20x20")
        for j in range(20):
            for i in range(20):
                x, y = grid.center(i, j)
                x12 = -(cfg.p[0] + cfg.p[1]) * y - (cfg.c[0] - cfg.c[1]) / (cfg.p[0] - cfg.p[1])
                if x != x12:
                    assert grid.key_at(i, j) == (1 if x < x12 else 2)
        segs = extract_boundaries(grid, cfg)
        assert len(segs) == 1 and segs[0].amplitude == F(1, 2) * (cfg.p[1] - cfg.p[0]) ** 2

    def test_tie_cells_keep_every_key(self):
        cfg = validate_config(1, [0, 1], [0, 0])  # boundary x = -y
        grid = tropical_field(cfg, "-1,1,-1,1", "2x2")
        assert grid.ties == {(0, 1): (1, 2), (1, 0): (1, 2)}
        assert grid.key_at(0, 1) is None

    def test_y_shape(self):
        cfg = validate_config(2, [-1, 0, 1], [0, 0, 0])
        grid = tropical_field(cfg, "-6,6,-6,6", "41x41", {3: 0})
        assert grid.keys == [1, 2, 3]
        assert region_adjacency(grid) == {(1, 2), (1, 3), (2, 3)}
        js = junctions(grid)
        assert {j.keys for j in js} == {(1, 2, 3)}
        # the junction sits within a cell of the exact triple point (origin)
        assert all(abs(j.point[0]) <= F(12, 41) and abs(j.point[1]) <= F(12, 41) for j in js)

    @settings(max_examples=20, suppress_health_check=[HealthCheck.too_slow])
    @given(configs(min_M=1, max_M=4))
    def test_cells_match_exact_maximum(self, cfg):
        grid = tropical_field(cfg, "-7,5,-4,9", "13x11", {3: F(1, 3)})
        for j in range(grid.ny):
            for i in range(grid.nx):
                x, y = grid.center(i, j)
                assert grid.keys_at(i, j) == exact_winners(cfg, x, y, {3: F(1, 3)})

    def test_snapped_endpoints_lie_on_lines(self):
        cfg = validate_config(2, [-1, F(1, 3), 2], [1, 0, -2])
        grid = tropical_field(cfg, "-8,8,-8,8", "30x30", {3: 0})
        for seg in extract_boundaries(grid, cfg):
            for x, y in (seg.start, seg.end):
                th = all_phases(cfg, (x, y, 0))
                assert th[seg.left - 1] == th[seg.right - 1]

    def test_interior_has_no_segments(self):
        cfg = validate_config(2, [-1, 0, 1], [0, 0, 0])
        grid = tropical_field(cfg, "-60,-50,-5,5", "10x10", {3: 0})
        assert grid.keys == [1] and extract_boundaries(grid) == []

    def test_o_type_layout(self):
        tau = build_tau(None, wedge_spec(4, [{1: 1, 2: 1}, {3: 1, 4: 1}]),
                        p=(F(-1), F(-1, 2), F(1, 4), F(5, 4)), c=(0, -10, 10, 0))
        grid = tropical_field(tau, "5,25,-14,6", "160x160", {3: 0})
        assert grid.keys == [(1, 3), (1, 4), (2, 3), (2, 4)]
        assert ((1, 4), (2, 3)) not in region_adjacency(grid)
        assert len(region_adjacency(grid)) == 5
        found = {j.keys: j.point for j in junctions(grid)}
        for keys in (((1, 3), (1, 4), (2, 4)), ((1, 3), (2, 3), (2, 4))):
            x, y = triple_point(tau, *keys, [F(0)])
            jx, jy = found[keys]
            assert abs(float(x) - float(jx)) <= 20 / 160 and abs(float(y) - float(jy)) <= 20 / 160

    def test_simple_class_has_no_bounded_regions(self):
        cfg = validate_config(3, [-1, 0, F(1, 2), 2], [1, 0, 0, -1])
        assert bounded_regions(tropical_field(cfg, "-10,10,-10,10", "60x60", {3: 0})) == []

    @pytest.mark.parametrize("boost", [10 ** 3, 10 ** 6])
    def test_interior_gradient_gives_bounded_region(self, boost):
        # among the six pair gradients (p_i + p_j, p_i^2 + p_j^2), only (1, 3)
        # lies strictly inside the hull, so only it can enclose a region
        p = (F(-1), F(-1, 2), F(1, 4), F(5, 4))
        terms = {k: 1 for k in combinations(range(1, 5), 2)}
        terms[(1, 3)] = boost
        grid = tropical_field(tau_from_terms(p, (0,) * 4, terms), "-40,40,-40,40", "120x120", {3: 0})
        found = bounded_regions(grid)
        assert [k for k, _ in found] == [(1, 3)]
        (_, cells), = found
        assert cells == sum(1 for n in grid.cells if n == ((1, 3),))

    def test_bad_boxes(self):
        with pytest.raises(InvalidInput):
            parse_bbox("1,1,0,2")
        with pytest.raises(InvalidInput):
            parse_bbox("0,1,2")
        with pytest.raises(InvalidInput):
            parse_resolution("1x5")
        assert parse_bbox("-2.5,1,0,3/2") == BBox(F(-5, 2), F(1), F(0), F(3, 2))


class TestAmplitudes:
    def test_two_phases(self):
        assert tropical_amplitude([F(1), F(4)]) == F(9, 2)

    def test_three_phases(self):
        assert tropical_amplitude([F(-1), F(0), F(1)]) == F(4, 3)

    def test_single_phase(self):
        assert tropical_amplitude([F(3)]) == 0


class TestExactSolution:
    def test_equals_tropical_at_top_coincidence(self):
        cfg = validate_config(2, [-1, F(1, 2), 2], [1, 0, -1])
        pt = critical_point_solve(cfg, [1, 2, 3], {3: 0}).coordinates
        expected = F(2, 9) * sum((b - a) ** 2 for a, b in combinations(cfg.p, 2))
        assert tropical_u(cfg, pt[:2], {3: 0}) == expected
        assert abs(exact_u(cfg, pt[:2], times={3: 0}) - float(expected)) < 1e-12

    def test_far_along_a_branch(self):
        cfg = validate_config(2, [-1, 0, 1], [0, 0, 0])
        # theta_1 = theta_2 is the line x = y for y << 0, where theta_3 is far below
        for y in (-30, -60):
            u = exact_u(cfg, (F(y), F(y)), times={3: 0})
            assert abs(u - 0.5) < 1e-9

    def test_deep_inside_a_region(self):
        cfg = validate_config(2, [-1, 0, 1], [0, 0, 0])
        assert exact_u(cfg, (F(-200), F(0)), times={3: 0}) < 1e-12

    def test_small_hbar_sharpens(self):
        cfg = validate_config(1, [0, 1], [0, 0])
        off = (F(1, 2), F(0))
        assert exact_u(cfg, off, hbar=0.01) < exact_u(cfg, off, hbar=1.0)

    def test_no_overflow(self):
        cfg = validate_config(2, [-1, 0, 1], [0, 0, 0])
        assert math.isfinite(exact_u(cfg, (F(10 ** 6), F(3)), times={3: 0}))

    def test_singular_tau_rejected(self):
        tau = build_tau(None, wedge_spec(4, [{1: 1, 2: -1}, {3: 1, 4: 1}]), p=(-2, -1, 1, 2), c=(0,) * 4)
        with pytest.raises(InvalidInput):
            exact_u(tau, (F(100), F(0)), times={3: 0})

    def test_grid_matches_pointwise(self):
        cfg = validate_config(2, [-1, F(1, 2), 2], [1, 0, -1])
        vals = exact_u_grid(cfg, "-4,4,-4,4", "9x7", times={3: 0})
        box = parse_bbox("-4,4,-4,4")
        for j in range(7):
            for i in range(9):
                x = box.x0 + box.dx * (2 * i + 1) / 18
                y = box.y0 + box.dy * (2 * j + 1) / 14
                assert vals[j * 9 + i] == pytest.approx(exact_u(cfg, (x, y), times={3: 0}), abs=1e-12)

    def test_grid_nan_on_singular_cells(self):
        tau = build_tau(None, wedge_spec(4, [{1: 1, 2: -1}, {3: 1, 4: 1}]), p=(-2, -1, 1, 2), c=(0,) * 4)
        vals = exact_u_grid(tau, "-50,50,-50,50", "20x20", times={3: 0})
        assert any(math.isnan(v) for v in vals)


class TestOutput:
    def test_deterministic_svg(self):
        cfg = validate_config(2, [-1, 0, 1], [0, 0, 0])
        a = render_svg(tropical_field(cfg, "-6,6,-6,6", "30x30", {3: 0}))
        b = render_svg(tropical_field(cfg, "-6,6,-6,6", "30x30", {3: 0}))
        assert a == b
        ET.fromstring(a)

    def test_empty_boundaries(self):
        doc = boundaries_svg([], "0,1,0,1")
        root = ET.fromstring(doc)
        assert root.tag.endswith("svg") and not root.findall("{http://www.w3.org/2000/svg}line")
        assert render_svg([], bbox="0,1,0,1") == doc

    def test_segments_in_svg(self):
        cfg = validate_config(1, [0, 2], [0, 0])
        grid = tropical_field(cfg, "-3,3,-3,3", "12x12")
        doc = render_svg(extract_boundaries(grid, cfg), bbox="-3,3,-3,3")
        lines = ET.fromstring(doc).findall("{http://www.w3.org/2000/svg}line")
        assert len(lines) == 1 and lines[0].get("data-amplitude") == "2"

    def test_unknown_style_key(self):
        cfg = validate_config(1, [0, 1], [0, 0])
        with pytest.raises(InvalidInput):
            render_svg(tropical_field(cfg, "0,1,0,1", "2x2"), style={"opacity": 1})

    def test_pentagon_dot(self):
        doc = render_svg(tamari(3))
        assert doc.count("->") == 5
        nodes = [ln for ln in doc.splitlines() if ln.strip().endswith(";") and "->" not in ln and "rankdir" not in ln]
        assert len(nodes) == 5
        assert '"111" -> "112" [label="a1"]' in doc

    def test_chain_dot(self, six_phase):
        doc = render_svg(classify_evolution(six_phase))
        assert doc.startswith("digraph evolution") and doc.count("->") == 6


class TestSixPhaseFrames:
    TIMES = [F(-10), F(-57, 10), F(-36, 10), F(0), F(4), F(10), F(20)]

    def test_seven_frames_match_trees(self, six_phase):
        docs = []
        for t in self.TIMES:
            times = {**six_phase.fixed_times, 3: t}
            box = auto_bbox(six_phase, times)
            grid = tropical_field(six_phase, box, "200x200", times)
            tree = tree_at_event(six_phase, {3: t})
            triples = {j.keys for j in junctions(grid) if len(j.keys) == 3}
            assert triples == set(tree.triples)
            docs.append(render_svg(grid))
        assert len(docs) == 7 and len(set(docs)) == 7
