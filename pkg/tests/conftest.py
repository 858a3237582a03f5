import json
import os

import numpy as np
import pytest

from soqd import ModelParams

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "golden")


@pytest.fixture
def preset_params():
    """The parameter set behind every preset panel."""
    return ModelParams(omega1=0.2, omega2=1.3, d_e=0.8, d_g=0.2, omega_e=1.0)


@pytest.fixture
def golden_dir():
    return GOLDEN_DIR


@pytest.fixture
def derived_values():
    with open(os.path.join(GOLDEN_DIR, "derived_values.json"), encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture
def rng():
    return np.random.default_rng(20250816)
