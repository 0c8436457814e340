import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


def complex_normal(rng, *shape, var=1.0):
    scale = np.sqrt(var / 2.0)
    draw = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return draw if shape else complex(draw)


@pytest.fixture
def rng():
    return np.random.default_rng(0xA515)
