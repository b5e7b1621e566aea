import numpy as np
import pytest

from fwmsec.config import SynthesisConfig
from fwmsec.response import synthesize_field
from fwmsec.signal import GridAxes


@pytest.fixture(scope="session")
def default_synthesis():
    return SynthesisConfig()


@pytest.fixture(scope="session")
def default_grid(default_synthesis):
    syn = default_synthesis
    return synthesize_field(syn.params, syn.amplitudes, syn.axes, pathway=syn.pathway)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def small_axes():
    return GridAxes([0.0, 0.5, 1.0], [0.0, 20.0], [500.0, 510.0, 520.0, 530.0])
