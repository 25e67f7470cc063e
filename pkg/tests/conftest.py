from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from born_engine.model import ExperimentalModel

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
MODELS_DIR = DATA_DIR / "models"


@pytest.fixture
def models_dir() -> Path:
    return MODELS_DIR


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def equal_norm_d2() -> ExperimentalModel:
    """(phi_+ + i phi_-)/sqrt(2) measured with sigma_z, outcomes +1 / -1"""
    return ExperimentalModel.build(
        [Fraction(1, 2), Fraction(1, 2)],
        [Fraction(1, 2), Fraction(-1, 2)],
        {Fraction(1, 2): 1, Fraction(-1, 2): -1},
        phases=[0, Fraction(1, 4)],
    )


@pytest.fixture
def repeated_payoff_d3() -> ExperimentalModel:
    return ExperimentalModel.build([1, 1, 1], [1, 2, 3], {1: 5, 2: 5, 3: 7})


@pytest.fixture
def rational_1_2_3() -> ExperimentalModel:
    return ExperimentalModel.build([1, 2, 3], [1, 2, 3], {1: 1, 2: 2, 3: 3})
