"""Pytest Fixtures.

Small instances of the numerical objects, built through the package's own seeded streams.
"""

import numpy as np
import pytest

from ntklab.domain.models.network import NetworkState, init_antisymmetric
from ntklab.domain.models.sphere import Dataset, NoiseModel, RegressionFunction, make_dataset, sample_sphere
from ntklab.domain.models.streams import named_stream
from ntklab.settings.lab_settings import LabSettings
from ntklab.settings.suite_settings import SuiteSettings

SMALL_D = 4
SMALL_M = 64
SMALL_N = 20


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """Settings are read from a clean environment in every test."""
    for name in ("NTKLAB_SEED", "NTKLAB_JOBS", "NTKLAB_LOG_LEVEL", "NTKLAB_OUT_DIR", "NTKLAB_GRAM_CAP"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def settings() -> LabSettings:
    return LabSettings()


@pytest.fixture
def suite_settings() -> SuiteSettings:
    return SuiteSettings()


@pytest.fixture
def state() -> NetworkState:
    return init_antisymmetric(SMALL_M, SMALL_D, named_stream(7, "init"))


@pytest.fixture
def points() -> np.ndarray:
    return sample_sphere(SMALL_D, SMALL_N, named_stream(7, "points"))


@pytest.fixture
def linear_f() -> RegressionFunction:
    return RegressionFunction.along_axis(SMALL_D, 0.9)


@pytest.fixture
def dataset(linear_f) -> Dataset:
    return make_dataset(linear_f, NoiseModel(kind="uniform", half_width=0.1), SMALL_D, SMALL_N, named_stream(7, "data"))
