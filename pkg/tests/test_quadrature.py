import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import KAPPAS, random_density
from sphere_sumrules.errors import NonConverged
from sphere_sumrules.harmonics import DensitySpec, density_eval, ylm
from sphere_sumrules.quadrature import (SphereGrid, integrate_sphere, oracle_I1, oracle_J1,
                                        rotate_density)
from sphere_sumrules.spectral_core import SpectralEngine, homogeneous_z


def test_constant_and_orthonormality():
    grid = SphereGrid.for_degree(12)
    assert integrate_sphere(lambda t, p: np.ones_like(t), grid) == pytest.approx(4 * math.pi, abs=1e-13)
    assert integrate_sphere(lambda t, p: np.abs(ylm(3, 2, t, p)) ** 2, grid) == pytest.approx(1.0, abs=1e-13)
    d = DensitySpec.kappa_y10(1.0)
    assert integrate_sphere(lambda t, p: density_eval(d, t, p), grid) == pytest.approx(4 * math.pi, abs=1e-13)


@given(st.integers(1, 6), st.integers(1, 6), st.data())
def test_exactness_degree(l1, l2, data):
    m1 = data.draw(st.integers(-l1, l1))
    m2 = data.draw(st.integers(-l2, l2))
    grid = SphereGrid.for_degree(l1 + l2)
    assert grid.exact_degree >= l1 + l2
    val = integrate_sphere(lambda t, p: np.conj(ylm(l1, m1, t, p)) * ylm(l2, m2, t, p), grid)
    assert val == pytest.approx(1.0 if (l1, m1) == (l2, m2) else 0.0, abs=1e-13)


def test_documented_oracle_values():
    k1 = DensitySpec.kappa_y10(1.0)
    hom = DensitySpec.homogeneous()
    assert oracle_I1(k1, 0).value == pytest.approx(0.5, abs=1e-4)
    assert oracle_I1(k1, 1).value == pytest.approx(0.25, abs=1e-4)
    assert oracle_I1(hom, 1).value == pytest.approx(0.0, abs=1e-10)
    assert oracle_J1(hom, 1, 1).value == pytest.approx(homogeneous_z(4), abs=1e-6)
    assert oracle_J1(k1, 0, 0).value == pytest.approx(1 + 1 / (8 * math.pi), abs=1e-3)
    assert oracle_J1(hom, 0, 0).value == pytest.approx(1.0, abs=1e-3)


def _agree(oracle, exact):
    assert oracle.value == pytest.approx(exact.value, rel=1e-4)
    assert abs(oracle.value - exact.value) <= oracle.estimate + exact.error + 1e-12


@pytest.mark.parametrize("k", KAPPAS)
def test_oracles_match_engine_on_kappa_family(k):
    d = DensitySpec.kappa_y10(k)
    eng = SpectralEngine(d)
    for q in (0, 1, 2):
        _agree(oracle_I1(d, q), eng.i1(q))
    for q, p in ((0, 0), (1, 0), (1, 1)):
        _agree(oracle_J1(d, q, p), eng.j1(q, p))


@pytest.mark.parametrize("seed", [21, 22])
def test_oracles_match_engine_on_random_densities(seed):
    d = random_density(np.random.default_rng(seed), 2, amplitude=0.8)
    eng = SpectralEngine(d)
    for q in (0, 1, 2):
        _agree(oracle_I1(d, q), eng.i1(q))
    _agree(oracle_J1(d, 0, 0), eng.j1(0, 0))
    _agree(oracle_J1(d, 1, 0), eng.j1(1, 0))


def test_refinement_stall_raises():
    with pytest.raises(NonConverged):
        oracle_J1(DensitySpec.kappa_y10(1.0), 0, 0, n_t=4, rtol=1e-16, max_n_t=8)


def test_rotation_preserves_values_pointwise(rng):
    from conftest import random_rotation
    d = random_density(rng, 3)
    R = random_rotation(rng)
    dr = rotate_density(d, R)
    t = rng.uniform(0, np.pi, 20)
    p = rng.uniform(0, 2 * np.pi, 20)
    e = np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=-1)
    back = e @ R  # R^T e for each row
    tb = np.arccos(np.clip(back[:, 2], -1, 1))
    pb = np.arctan2(back[:, 1], back[:, 0])
    assert np.allclose(density_eval(dr, t, p), density_eval(d, tb, pb), atol=1e-12)
