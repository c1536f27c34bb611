import numpy as np
import pytest

from config.profiles import load_profile
from models.waveform import ChirpParams
from services.framing import build_layout
from services.waveform import build_bank


def snapped_params(M: int = 8, **overrides) -> ChirpParams:
    """Default timing with the spacing snapped to exactly 1/T"""
    T = 0.33e-3
    values = dict(M=M, T=T, f0=3050.0, delta_f=1 / T, mu=9.31e6, fs=100e3)
    values.update(overrides)
    return ChirpParams(**values)


@pytest.fixture
def rng():
    return np.random.default_rng(20170)


@pytest.fixture(scope="session")
def default_profile():
    return load_profile("default")


@pytest.fixture(scope="session")
def bench_profile():
    return load_profile("bench")


@pytest.fixture(scope="session")
def bank8():
    return build_bank(snapped_params(8))


@pytest.fixture(scope="session")
def bank4():
    return build_bank(snapped_params(4))


@pytest.fixture(scope="session")
def bank2():
    return build_bank(snapped_params(2))


@pytest.fixture(scope="session")
def layout8(default_profile, bank8):
    return build_layout(default_profile.frame, bank8.params)


def random_bits(rng, layout, bank) -> np.ndarray:
    return rng.integers(0, 2, size=layout.N * bank.bits_per_symbol, dtype=np.uint8)
