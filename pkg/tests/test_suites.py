import random
from fractions import Fraction

import pytest

from kptrop import suites
from kptrop.errors import ConsistencyError, InvalidInput


def test_random_config_is_valid():
    rng = random.Random(1)
    for M in range(1, 7):
        cfg = suites.random_config(rng, M)
        assert list(cfg.p) == sorted(set(cfg.p)) and len(cfg.c) == M + 1
        assert set(cfg.fixed_times) == set(range(4, M + 1))


def test_identity_counts():
    counts = suites.identity_suite(random.Random(7), cases=120)
    assert counts == {"difference": 120, "recursion": 120, "substitution": 120, "factored": 120}


def test_identity_suite_catches_a_wrong_coefficient(monkeypatch):
    real = suites.c_coeff
    monkeypatch.setattr(suites, "c_coeff", lambda p, c, S: real(p, c, S) + (len(S) == 3))
    with pytest.raises(ConsistencyError):
        suites.identity_suite(random.Random(7), cases=60)


@pytest.mark.parametrize("M", [4, 5])
def test_visibility_counts(M):
    assert suites.visibility_suite(random.Random(M), M, configs=2) > 0


def test_visibility_suite_catches_a_wrong_side(monkeypatch):
    monkeypatch.setattr(suites, "side_of", lambda *a: "below")
    with pytest.raises(ConsistencyError):
        suites.visibility_suite(random.Random(0), 4, configs=1)


def test_braid_count_is_stable():
    assert suites.braid_suite(max_r=5) == suites.braid_suite(max_r=5) > 0


def test_braid_suite_catches_a_broken_move(monkeypatch):
    real = suites.apply_op

    def skewed(seq, op, s):
        out = real(seq, op, s)
        return out[::-1] if op == "b" and s == 2 else out

    monkeypatch.setattr(suites, "apply_op", skewed)
    with pytest.raises(ConsistencyError):
        suites.braid_suite(max_r=5)


def test_region_intervals_cover_both_signs():
    rows = suites.region_intervals(suites.SIX_PHASE_P)
    assert sorted(r for r, s, *_ in rows if s < 0) == [1, 2, 3, 4, 5, 6]
    assert sorted(r for r, s, *_ in rows if s > 0) == [6, 7, 8, 9]
    for _, _, lo, hi in rows:
        assert lo is None or hi is None or lo < hi


def test_sample_in_bounds():
    rng = random.Random(0)
    for _ in range(50):
        v = suites.sample_in(rng, Fraction(1), Fraction(2))
        assert 1 < v < 2
        assert suites.sample_in(rng, None, Fraction(0)) < 0
        assert suites.sample_in(rng, Fraction(0), None) > 0
    with pytest.raises(InvalidInput):
        suites.sample_in(rng, Fraction(2), Fraction(1))


def test_table_suite_agrees():
    assert suites.table_suite(random.Random(11), per_region=2) >= 15


def test_table_suite_catches_a_wrong_classifier(monkeypatch):
    real = suites.t4_order_region

    def off_by_one(cfg):
        res = real(cfg)
        return type(res)(**{**res.__dict__, "region": (res.region or 0) + 1})

    monkeypatch.setattr(suites, "t4_order_region", off_by_one)
    with pytest.raises(ConsistencyError):
        suites.table_suite(random.Random(11), per_region=1)
