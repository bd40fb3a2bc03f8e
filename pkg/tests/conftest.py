"""Shared fixtures for wrench grammar tests."""

import pytest

from tests.helpers import fixed_calibration, make_trial
from wrench_grammar.primitives import Calibration
from wrench_grammar.signal_io import Trial


@pytest.fixture
def zero_trial() -> Trial:
    return make_trial()


@pytest.fixture
def calibration() -> Calibration:
    return fixed_calibration()
