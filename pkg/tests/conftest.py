import math

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from sphere_sumrules.harmonics import DensitySpec

settings.register_profile("default", deadline=None, max_examples=25, derandomize=True)
settings.load_profile("default")

ZETA3 = 1.2020569031595942853997381615114
KAPPAS = (0.25, 0.5, 1.0, 1.5, 2.0)


def random_density(rng, band_limit, amplitude=0.6):
    """Random real band-limited density with min value at least 1 - amplitude."""
    coeffs = {}
    for l in range(1, band_limit + 1):
        coeffs[(l, 0)] = complex(rng.normal(), 0.0)
        for m in range(1, l + 1):
            c = complex(rng.normal(), rng.normal())
            coeffs[(l, m)] = c
            coeffs[(l, -m)] = (-1) ** m * c.conjugate()
    # |sum c Y| <= sum |c| sqrt((2l+1)/4pi)
    bound = sum(abs(c) * math.sqrt((2 * l + 1) / (4 * math.pi)) for (l, _), c in coeffs.items())
    scale = amplitude / bound
    return DensitySpec({k: scale * v for k, v in coeffs.items()})


def closed_z2(k):
    return 1 + k ** 4 / (64 * math.pi ** 2)


def closed_z3(k):
    return 2 * (ZETA3 - 1) + 11 * k ** 4 / (640 * math.pi ** 2) - k ** 6 / (512 * math.pi ** 3)


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)
