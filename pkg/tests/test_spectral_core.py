import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings

from conftest import KAPPAS, ZETA3, random_density, random_rotation, seeds
from sphere_sumrules.errors import NonConverged
from sphere_sumrules.harmonics import DensitySpec, validate_density
from sphere_sumrules.quadrature import rotate_density
from sphere_sumrules.spectral_core import (NestedSums, SpectralEngine, assemble_sigma_matrix,
                                           basis_index, dimension, homogeneous_z, i2_trace,
                                           i3_trace, integral_i1_exact, j1_truncated,
                                           j2_truncated, m_modulus, reduced_quadratic_trace,
                                           quadratic_trace)

PAIRS = [(q, p) for q, p in itertools.product(range(3), repeat=2) if q + p <= 2]
TRIPLES = [t for t in itertools.product(range(3), repeat=3) if sum(t) <= 2]


def test_basis_ordering():
    assert basis_index(1, -1) == 0
    assert basis_index(2, 2) == dimension(2) - 1
    assert dimension(30) == 960


def test_homogeneous_z_values():
    assert homogeneous_z(2) == 1.0
    assert homogeneous_z(3) == pytest.approx(2 * (ZETA3 - 1), abs=1e-15)
    brute = mpmath.nsum(lambda l: (2 * l + 1) / (l * (l + 1)) ** 4, [1, mpmath.inf])
    assert homogeneous_z(4) == pytest.approx(float(brute), abs=1e-15)


@pytest.mark.parametrize("k", KAPPAS)
def test_kappa_family_components(k):
    d = DensitySpec.kappa_y10(k)
    eng = SpectralEngine(d)
    assert eng.i1(0).value == pytest.approx(k ** 2 / 2, abs=1e-12)
    assert eng.i2(0, 0).value == pytest.approx(k ** 2 / 4, abs=1e-10)
    assert eng.i3(0, 0, 0).value == pytest.approx(k ** 2 / 8 + k ** 4 / (120 * math.pi), abs=1e-10)
    assert eng.j1(0, 0).value == pytest.approx(1 + k ** 2 / (8 * math.pi), abs=1e-9)
    assert eng.j2(0, 0, 0).value == pytest.approx(2 * (ZETA3 - 1) + 3 * k ** 2 / (32 * math.pi), abs=1e-9)


def test_i1_for_kappa_family_all_q():
    d = DensitySpec.kappa_y10(1.0)
    assert [integral_i1_exact(d, q) for q in range(3)] == pytest.approx([0.5, 0.25, 0.125], abs=1e-15)


@settings(max_examples=10)
@given(seeds)
def test_nested_sums_match_traces(seed):
    rng = np.random.default_rng(seed)
    d = random_density(rng, int(rng.integers(1, 4)))
    L = 10
    ns, s = NestedSums(d, L), assemble_sigma_matrix(d, L)
    for q, p in PAIRS:
        assert ns.i2(q, p) == pytest.approx(i2_trace(d, q, p, L, s), abs=1e-10)
        assert ns.j1(q, p) == pytest.approx(j1_truncated(d, q, p, L), abs=1e-10)
    for q, p, r in TRIPLES:
        assert ns.i3(q, p, r) == pytest.approx(i3_trace(d, q, p, r, L, s), abs=1e-10)
        assert ns.j2(q, p, r) == pytest.approx(j2_truncated(d, q, p, r, L), abs=1e-10)


@settings(max_examples=6)
@given(seeds)
def test_rotation_invariance_of_integrals(seed):
    rng = np.random.default_rng(seed)
    d = random_density(rng, 2)
    dr = rotate_density(d, random_rotation(rng))
    assert dr.power_spectrum() == pytest.approx(d.power_spectrum(), abs=1e-13)
    L = 16
    s, sr = assemble_sigma_matrix(d, L), assemble_sigma_matrix(dr, L)
    for q, p in PAIRS:
        assert i2_trace(dr, q, p, L, sr) == pytest.approx(i2_trace(d, q, p, L, s), abs=1e-10)
        assert j1_truncated(dr, q, p, L) == pytest.approx(j1_truncated(d, q, p, L), abs=1e-10)
    assert i3_trace(dr, 0, 0, 0, L, sr) == pytest.approx(i3_trace(d, 0, 0, 0, L, s), abs=1e-10)
    assert j2_truncated(dr, 0, 0, 0, L) == pytest.approx(j2_truncated(d, 0, 0, 0, L), abs=1e-10)


@settings(max_examples=8)
@given(seeds)
def test_sigma_matrix_is_positive_definite(seed):
    rng = np.random.default_rng(seed)
    d = random_density(rng, int(rng.integers(1, 4)), amplitude=0.95)
    validate_density(d)
    for L in (8, 16, 24):
        S = assemble_sigma_matrix(d, L).dense()
        assert np.allclose(S, S.conj().T, atol=1e-15)
        np.linalg.cholesky(S)


def test_sigma_matrix_near_positivity_limit():
    d = DensitySpec.kappa_y10(0.999 * math.sqrt(4 * math.pi / 3))
    np.linalg.cholesky(assemble_sigma_matrix(d, 40).dense())


def test_block_structure():
    assert m_modulus(DensitySpec.kappa_y10(1.0)) == 0
    d = DensitySpec({(2, 2): 0.1, (2, -2): 0.1, (4, 4): 0.05, (4, -4): 0.05})
    s = assemble_sigma_matrix(d, 8)
    assert s.m_modulus == 2 and s.decomposable
    labels = s.block_labels()
    M = s.dense()
    assert np.all(M[labels[:, None] != labels[None, :]] == 0)


def test_reduced_trace_matches_matrix_trace():
    rng = np.random.default_rng(3)
    d = random_density(rng, 3)
    L = 40
    full, _ = reduced_quadratic_trace(d, 0, 0, lo=0, hi=L)
    direct = quadratic_trace(assemble_sigma_matrix(d, L), 0, 0)
    # the reduction sums over l <= L for every row, the matrix keeps l' <= L too
    tail, _ = reduced_quadratic_trace(d, 0, 0, lo=L - 3, hi=L)
    assert full == pytest.approx(direct, abs=tail + 1e-14)


def test_cutoff_errors_shrink():
    d = random_density(np.random.default_rng(7), 2)
    vals = [j1_truncated(d, 0, 0, L) for L in (16, 32, 64, 128)]
    diffs = np.abs(np.diff(vals))
    assert np.all(diffs[1:] < diffs[:-1])


def test_nonconvergence_is_reported():
    d = random_density(np.random.default_rng(11), 3, amplitude=0.9)
    with pytest.raises(NonConverged):
        SpectralEngine(d, tol=1e-30, cutoff=8, max_cutoff=16).j2(0, 0, 0)
