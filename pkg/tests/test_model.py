from fractions import Fraction

import pytest
from hypothesis import given

from kptrop.errors import ConfigError, InvalidInput
from kptrop.critical import critical_value
from kptrop.model import (all_phases, config_from_json, config_to_json, phase_value, resolve_offsets,
                          validate_config)

from conftest import SIX_PHASE_C, SIX_PHASE_P
from strategies import configs, points

F = Fraction


class TestValidation:
    def test_minimal_valid(self):
        cfg = validate_config(2, [-1, 0, 1], [0, 0, 0])
        assert cfg.size == 3 and cfg.horizon == 3

    def test_six_phase_data(self):
        cfg = validate_config(5, SIX_PHASE_P, SIX_PHASE_C)
        assert cfg.horizon == 5

    def test_non_increasing_p(self):
        with pytest.raises(ConfigError, match="p not strictly increasing"):
            validate_config(2, [0, 0, 1], [0, 0, 0])

    def test_reports_every_problem(self):
        with pytest.raises(ConfigError) as info:
            validate_config(2, [1, 0], [0])
        text = str(info.value)
        assert "p has 2 entries" in text and "c has 1 entries" in text and "not strictly" in text

    def test_time_outside_horizon(self):
        with pytest.raises(ConfigError):
            validate_config(2, [0, 1, 2], [0, 0, 0], {7: 1})

    def test_floats_rejected(self):
        with pytest.raises(ConfigError):
            validate_config(1, [0.5, 1], [0, 0])


class TestPhases:
    def test_origin(self):
        cfg = validate_config(1, [1, 2], [0, 0])
        assert phase_value(cfg, 1, (0, 0, 0)) == 0

    def test_unit_point(self):
        cfg = validate_config(1, [1, 2], [0, 0])
        assert phase_value(cfg, 1, (1, 1, 1)) == 3

    def test_linear_and_quadratic_only(self):
        cfg = validate_config(1, [1, 2], [0, 5])
        assert phase_value(cfg, 2, {"x": 1, "y": 1}) == 11

    def test_frozen_times_enter(self):
        cfg = validate_config(4, [0, 1, 2, 3, 4], [0] * 5, {4: 2})
        assert phase_value(cfg, 2, (0, 0, 0)) == 2

    @given(configs(max_M=5).flatmap(lambda c: points(c).map(lambda pt: (c, pt))))
    def test_horner_matches_direct_sum(self, case):
        cfg, pt = case
        direct = [phase_value(cfg, k, pt) for k in range(1, cfg.size + 1)]
        assert all_phases(cfg, pt) == direct

    def test_bad_index(self):
        cfg = validate_config(1, [1, 2], [0, 0])
        with pytest.raises(InvalidInput):
            phase_value(cfg, 3, (0, 0))


class TestJson:
    def test_offsets_resolve_from_the_top(self):
        data = {"M": 5, "p": [str(v) for v in SIX_PHASE_P], "c": [str(v) for v in SIX_PHASE_C],
                "offsets": {"t5": "-1", "t4": "-2"}}
        cfg = config_from_json(data)
        t5_top = critical_value(validate_config(5, SIX_PHASE_P, SIX_PHASE_C), range(1, 7)).value
        assert cfg.fixed_times[5] == t5_top - 1
        assert cfg.fixed_times[4] == critical_value(cfg, range(1, 6)).value - 2

    def test_absolute_times(self):
        cfg = config_from_json({"M": 4, "p": ["0", "1", "2", "3", "4"], "c": ["0"] * 5, "times": {"t4": "-3/2"}})
        assert cfg.fixed_times == {4: F(-3, 2)}

    def test_unknown_key(self):
        with pytest.raises(InvalidInput, match="unknown"):
            config_from_json({"M": 1, "p": ["0", "1"], "c": ["0", "0"], "colour": 1})

    def test_decimal_rejected_for_parameters(self):
        with pytest.raises(InvalidInput):
            config_from_json({"M": 1, "p": ["0.5", "1"], "c": ["0", "0"]})

    @given(configs())
    def test_roundtrip(self, cfg):
        assert config_from_json(config_to_json(cfg)) == cfg

    def test_offset_level_checked(self, six_phase_base):
        with pytest.raises(InvalidInput):
            resolve_offsets(six_phase_base, {6: 1})
