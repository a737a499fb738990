import pytest

from learner import ModelConfig, new_model
from memory import TemporalMemory


@pytest.fixture
def network():
    return TemporalMemory()


@pytest.fixture
def model():
    return new_model()


@pytest.fixture
def make_model():
    def make(**overrides):
        return new_model(ModelConfig(**overrides))

    return make
