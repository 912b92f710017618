import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sphere_sumrules.errors import (DensityValidationError, DomainError, PositivityViolation,
                                    RealityViolation)
from sphere_sumrules.harmonics import (DensitySpec, GauntTable, density_eval, gaunt, load_density,
                                       validate_density, wigner3j, ylm)
from sphere_sumrules.quadrature import SphereGrid, project_function


@st.composite
def valid_3j(draw, lmax=20):
    l1 = draw(st.integers(0, lmax))
    l2 = draw(st.integers(0, lmax))
    l3 = draw(st.integers(abs(l1 - l2), min(l1 + l2, lmax)))
    m1 = draw(st.integers(-l1, l1))
    lo, hi = max(-l2, -l3 - m1), min(l2, l3 - m1)
    if lo > hi:
        m1, lo, hi = 0, max(-l2, -l3), min(l2, l3)
    m2 = draw(st.integers(lo, hi))
    return l1, l2, l3, m1, m2, -m1 - m2


def test_known_values():
    assert wigner3j(1, 1, 2, 0, 0, 0) == pytest.approx(math.sqrt(2 / 15), abs=1e-15)
    assert wigner3j(1, 1, 0, 0, 0, 0) == pytest.approx(-1 / math.sqrt(3), abs=1e-15)
    assert gaunt(1, 0, 1, 0, 2, 0) == pytest.approx(1 / math.sqrt(5 * math.pi), abs=1e-14)
    assert ylm(1, 1, math.pi / 2, 0.0).real == pytest.approx(-math.sqrt(3 / (8 * math.pi)))


@given(valid_3j())
def test_3j_symmetries(t):
    l1, l2, l3, m1, m2, m3 = t
    w = wigner3j(l1, l2, l3, m1, m2, m3)
    sign = (-1) ** (l1 + l2 + l3)
    assert wigner3j(l2, l3, l1, m2, m3, m1) == pytest.approx(w, abs=1e-13)
    assert wigner3j(l2, l1, l3, m2, m1, m3) == pytest.approx(sign * w, abs=1e-13)
    assert wigner3j(l1, l2, l3, -m1, -m2, -m3) == pytest.approx(sign * w, abs=1e-13)


@given(valid_3j(lmax=12))
def test_float_path_matches_exact(t):
    assert wigner3j(*t) == pytest.approx(wigner3j(*t, exact=True), abs=1e-14)


def test_exact_path_beyond_float_range():
    # large l falls back to rational arithmetic and stays finite
    w = wigner3j(80, 80, 100, 0, 0, 0)
    assert np.isfinite(w) and w != 0.0


@given(st.integers(0, 10), st.integers(0, 10), st.data())
def test_3j_orthogonality(l1, l2, data):
    l3 = data.draw(st.integers(abs(l1 - l2), l1 + l2))
    l3p = data.draw(st.integers(abs(l1 - l2), l1 + l2))
    m3 = data.draw(st.integers(-min(l3, l3p), min(l3, l3p)))
    total = math.fsum((2 * l3 + 1) * wigner3j(l1, l2, l3, m1, -m1 - m3, m3)
                      * wigner3j(l1, l2, l3p, m1, -m1 - m3, m3)
                      for m1 in range(-l1, l1 + 1) if abs(m1 + m3) <= l2)
    assert total == pytest.approx(1.0 if l3 == l3p else 0.0, abs=1e-12)


def test_invalid_indices():
    with pytest.raises(DomainError):
        wigner3j(1, 1, 1, 2, 0, -2)
    with pytest.raises(DomainError):
        ylm(2, 3, 0.1, 0.2)


def test_gaunt_table_symmetry():
    table = GauntTable()
    a = table(3, 1, 2, -1, 1, 0)
    assert a == pytest.approx(gaunt(3, 1, 2, -1, 1, 0), abs=1e-15)
    assert table(3, -1, 2, 1, 1, 0) == pytest.approx(a, abs=1e-15)
    assert table(3, 1, 1, 0, 2, -1) == pytest.approx(a, abs=1e-15)
    assert len(table) == 1


def test_gaunt_against_quadrature_small():
    grid = SphereGrid(16, 32)
    th, ph, w = grid.nodes()
    for (l1, m1, l2, m2, l3, m3) in [(2, 1, 1, 0, 1, 1), (3, -2, 2, -1, 1, -1), (4, 0, 2, 0, 2, 0)]:
        q = np.sum(w * np.conj(ylm(l1, m1, th, ph)) * ylm(l2, m2, th, ph) * ylm(l3, m3, th, ph))
        assert gaunt(l1, m1, l2, m2, l3, m3) == pytest.approx(q.real, abs=1e-13)
        assert abs(q.imag) < 1e-14


def test_projection_round_trip(rng):
    # smooth real band-limited function
    def f(t, p):
        return 0.3 * np.cos(t) + 0.2 * np.sin(t) ** 2 * np.cos(2 * p) + 0.1 * np.sin(t) * np.sin(p) * np.cos(t)

    coeffs = project_function(f, 3)
    d = DensitySpec({k: v for k, v in coeffs.items() if abs(v) > 1e-16})
    t = rng.uniform(0, np.pi, 50)
    p = rng.uniform(0, 2 * np.pi, 50)
    assert np.allclose(density_eval(d, t, p) - 1.0, f(t, p), atol=1e-10)


def test_density_json_round_trip(tmp_path):
    d = DensitySpec({(2, 1): 0.1 + 0.05j, (2, -1): -0.1 + 0.05j, (1, 0): 0.3})
    path = tmp_path / "d.json"
    path.write_text(json.dumps(d.to_json_dict()))
    assert load_density(path) == d


def test_autocomplete_conjugates_only_on_request():
    doc = {"coefficients": [{"l": 2, "m": 1, "re": 0.1, "im": 0.2}]}
    with pytest.raises(RealityViolation):
        validate_density(DensitySpec.from_json_dict(doc))
    d = DensitySpec.from_json_dict({**doc, "autocomplete_conjugates": True})
    assert d.coefficients[(2, -1)] == -(0.1 - 0.2j)
    validate_density(d)


def test_json_rejects_monopole_and_duplicates():
    with pytest.raises(DensityValidationError):
        DensitySpec.from_json_dict({"coefficients": [{"l": 0, "m": 0, "re": 1.0, "im": 0.0}]})
    dup = [{"l": 1, "m": 0, "re": 0.1, "im": 0.0}] * 2
    with pytest.raises(DensityValidationError):
        DensitySpec.from_json_dict({"coefficients": dup})


def test_positivity_bound_of_kappa_family():
    kmax = math.sqrt(4 * math.pi / 3)
    validate_density(DensitySpec.kappa_y10(0.99 * kmax))
    with pytest.raises(PositivityViolation) as err:
        validate_density(DensitySpec.kappa_y10(2.1))
    assert err.value.theta == pytest.approx(math.pi)
    assert err.value.value < 0


def test_reality_residue_reports_pair():
    with pytest.raises(RealityViolation) as err:
        validate_density(DensitySpec({(1, 1): 0.1, (1, -1): 0.1}))
    assert {err.value.index, err.value.partner} == {(1, 1), (1, -1)}
