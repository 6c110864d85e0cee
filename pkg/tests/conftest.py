import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from mesh import build_slit_square, build_unit_square  # noqa: E402
from models import MaterialParams  # noqa: E402


@pytest.fixture
def params():
    return MaterialParams()


@pytest.fixture
def linear_params():
    return MaterialParams().linearized()


@pytest.fixture
def unit_mesh():
    return build_unit_square(2)


@pytest.fixture
def slit_mesh():
    return build_slit_square(2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
