from fractions import Fraction

import pytest
from hypothesis import settings

from kptrop.model import validate_config, resolve_offsets

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

SIX_PHASE_P = [Fraction(-2), Fraction(-3, 2), Fraction(-1), Fraction(1, 2), Fraction(5, 4), Fraction(2)]
SIX_PHASE_C = [Fraction(10), Fraction(0), Fraction(0), Fraction(0), Fraction(0), Fraction(-10)]


@pytest.fixture
def six_phase_base():
    return validate_config(5, SIX_PHASE_P, SIX_PHASE_C)


@pytest.fixture
def six_phase(six_phase_base):
    """The type-1 example: t5 one below and t4 two below their top values."""
    return resolve_offsets(six_phase_base, {5: -1, 4: -2})
