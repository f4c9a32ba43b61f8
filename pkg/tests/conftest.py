import numpy as np
import pytest

from sdfsynth.library import build_default_library
from sdfsynth.texture import default_variant_table


@pytest.fixture(scope="session")
def library():
    return build_default_library()


@pytest.fixture(scope="session")
def variants():
    return default_variant_table()


@pytest.fixture()
def rng():
    return np.random.default_rng(0xC0FFEE)
