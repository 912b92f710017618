"""Spherical harmonics, Wigner 3j / Gaunt coefficients and the density model.

Conventions: orthonormal complex harmonics with the Condon-Shortley phase,
``theta`` the polar angle and ``phi`` the azimuth.  A density is

    Sigma(theta, phi) = 1 + sum_{l>=1} sum_m c_lm Y_lm(theta, phi),

so the total mass is always 4*pi.
"""
from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType
from typing import Mapping, NamedTuple

import numpy as np
from scipy.special import gammaln, sph_harm_y

from .errors import DensityValidationError, DomainError, PositivityViolation, RealityViolation

FLOAT_3J_MAX_L = 64


class HarmonicIndex(NamedTuple):
    l: int
    m: int


def check_index(l, m):
    if int(l) != l or int(m) != m:
        raise DomainError(f"harmonic indices must be integers, got ({l}, {m})")
    if l < 0 or abs(m) > l:
        raise DomainError(f"invalid harmonic index (l={l}, m={m})")


def ylm(l, m, theta, phi):
    """Orthonormal complex spherical harmonic Y_lm (Condon-Shortley phase).

    Accepts scalar or array angles; returns a complex scalar or array.
    """
    check_index(l, m)
    return sph_harm_y(l, m, theta, phi)


ylm_eval = ylm


# ---------------------------------------------------------------------------
# Wigner 3j
# ---------------------------------------------------------------------------

_LOGFACT = np.array([math.lgamma(n + 1.0) for n in range(4 * FLOAT_3J_MAX_L + 8)])


def _selection_ok(l1, l2, l3, m1, m2, m3):
    if m1 + m2 + m3 != 0:
        return False
    if not abs(l1 - l2) <= l3 <= l1 + l2:
        return False
    if m1 == 0 and m2 == 0 and m3 == 0 and (l1 + l2 + l3) % 2:
        return False
    return True


def _racah_range(l1, l2, l3, m1, m2):
    kmin = max(0, l2 - l3 - m1, l1 - l3 + m2)
    kmax = min(l1 + l2 - l3, l1 - m1, l2 + m2)
    return kmin, kmax


def _wigner3j_float(l1, l2, l3, m1, m2, m3):
    lf = _LOGFACT
    half_log_pref = 0.5 * (
        lf[l1 + l2 - l3] + lf[l1 - l2 + l3] + lf[-l1 + l2 + l3] - lf[l1 + l2 + l3 + 1]
        + lf[l1 + m1] + lf[l1 - m1] + lf[l2 + m2] + lf[l2 - m2] + lf[l3 + m3] + lf[l3 - m3]
    )
    kmin, kmax = _racah_range(l1, l2, l3, m1, m2)
    terms = []
    for k in range(kmin, kmax + 1):
        log_den = (
            lf[k] + lf[l3 - l2 + k + m1] + lf[l3 - l1 + k - m2]
            + lf[l1 + l2 - l3 - k] + lf[l1 - k - m1] + lf[l2 - k + m2]
        )
        term = math.exp(half_log_pref - log_den)
        terms.append(-term if k % 2 else term)
    sign = -1.0 if (l1 - l2 - m3) % 2 else 1.0
    return sign * math.fsum(terms)


@lru_cache(maxsize=None)
def _fact(n):
    return math.factorial(n)


def _wigner3j_exact(l1, l2, l3, m1, m2, m3):
    f = _fact
    pref2 = Fraction(f(l1 + l2 - l3) * f(l1 - l2 + l3) * f(-l1 + l2 + l3), f(l1 + l2 + l3 + 1))
    pref2 *= f(l1 + m1) * f(l1 - m1) * f(l2 + m2) * f(l2 - m2) * f(l3 + m3) * f(l3 - m3)
    kmin, kmax = _racah_range(l1, l2, l3, m1, m2)
    s = Fraction(0)
    for k in range(kmin, kmax + 1):
        den = (f(k) * f(l3 - l2 + k + m1) * f(l3 - l1 + k - m2)
               * f(l1 + l2 - l3 - k) * f(l1 - k - m1) * f(l2 - k + m2))
        s += Fraction(-1 if k % 2 else 1, den)
    if s == 0:
        return 0.0
    sign = -1.0 if (l1 - l2 - m3) % 2 else 1.0
    if s < 0:
        sign = -sign
    return sign * math.sqrt(pref2 * s * s)


def wigner3j(l1, l2, l3, m1, m2, m3, exact=False):
    """Wigner 3j symbol (l1 l2 l3; m1 m2 m3) for integer arguments.

    Degrees up to 64 use the Racah sum over a log-factorial table with
    compensated summation; larger degrees (or ``exact=True``) evaluate the
    same sum in exact rational arithmetic and round once at the end.
    """
    for l, m in ((l1, m1), (l2, m2), (l3, m3)):
        check_index(l, m)
    l1, l2, l3, m1, m2, m3 = (int(v) for v in (l1, l2, l3, m1, m2, m3))
    if not _selection_ok(l1, l2, l3, m1, m2, m3):
        return 0.0
    if exact or max(l1, l2, l3) > FLOAT_3J_MAX_L:
        return _wigner3j_exact(l1, l2, l3, m1, m2, m3)
    return _wigner3j_float(l1, l2, l3, m1, m2, m3)


def wigner3j_array(l1, l2, l3, m1, m2, m3):
    """Vectorized 3j symbols over broadcast integer arrays.

    Invalid or selection-rule-violating entries give 0.  Accuracy is a few
    1e-13 relative for degrees of a few hundred (log-gamma Racah sum).
    """
    l1, l2, l3, m1, m2, m3 = np.broadcast_arrays(*(np.asarray(a, dtype=np.int64)
                                                   for a in (l1, l2, l3, m1, m2, m3)))
    ok = (
        (m1 + m2 + m3 == 0)
        & (np.abs(l1 - l2) <= l3) & (l3 <= l1 + l2)
        & (np.abs(m1) <= l1) & (np.abs(m2) <= l2) & (np.abs(m3) <= l3)
        & ~((m1 == 0) & (m2 == 0) & (m3 == 0) & ((l1 + l2 + l3) % 2 == 1))
    )
    out = np.zeros(l1.shape)
    if not ok.any():
        return out
    a1, a2, a3, b1, b2, b3 = (x[ok].astype(float) for x in (l1, l2, l3, m1, m2, m3))
    half_log_pref = 0.5 * (
        gammaln(a1 + a2 - a3 + 1) + gammaln(a1 - a2 + a3 + 1) + gammaln(-a1 + a2 + a3 + 1)
        - gammaln(a1 + a2 + a3 + 2)
        + gammaln(a1 + b1 + 1) + gammaln(a1 - b1 + 1) + gammaln(a2 + b2 + 1)
        + gammaln(a2 - b2 + 1) + gammaln(a3 + b3 + 1) + gammaln(a3 - b3 + 1)
    )
    kmin = np.maximum.reduce([np.zeros_like(a1), a2 - a3 - b1, a1 - a3 + b2])
    kmax = np.minimum.reduce([a1 + a2 - a3, a1 - b1, a2 + b2])
    total = np.zeros_like(a1)
    nk = int((kmax - kmin).max()) + 1
    for step in range(nk):
        k = kmin + step
        live = k <= kmax
        kk = np.where(live, k, kmin)
        log_den = (
            gammaln(kk + 1) + gammaln(a3 - a2 + kk + b1 + 1) + gammaln(a3 - a1 + kk - b2 + 1)
            + gammaln(a1 + a2 - a3 - kk + 1) + gammaln(a1 - kk - b1 + 1) + gammaln(a2 - kk + b2 + 1)
        )
        term = np.exp(half_log_pref - log_den) * np.where(kk % 2 == 1, -1.0, 1.0)
        total += np.where(live, term, 0.0)
    sign = np.where((a1 - a2 - b3) % 2 == 1, -1.0, 1.0)
    out[ok] = sign * total
    return out


# ---------------------------------------------------------------------------
# Gaunt coefficients
# ---------------------------------------------------------------------------

def gaunt(l1, m1, l2, m2, l3, m3, exact=False):
    """W = integral of conj(Y_{l1 m1}) Y_{l2 m2} Y_{l3 m3} over the unit sphere."""
    for l, m in ((l1, m1), (l2, m2), (l3, m3)):
        check_index(l, m)
    if m1 != m2 + m3 or (l1 + l2 + l3) % 2 or not abs(l2 - l3) <= l1 <= l2 + l3:
        return 0.0
    pref = math.sqrt((2 * l1 + 1) * (2 * l2 + 1) * (2 * l3 + 1) / (4.0 * math.pi))
    w0 = wigner3j(l1, l2, l3, 0, 0, 0, exact=exact)
    wm = wigner3j(l1, l2, l3, -m1, m2, m3, exact=exact)
    sign = -1.0 if m1 % 2 else 1.0
    return sign * pref * w0 * wm


def gaunt_array(l1, m1, l2, m2, l3, m3):
    """Vectorized :func:`gaunt`; entries violating selection rules are 0."""
    l1, m1, l2, m2, l3, m3 = np.broadcast_arrays(*(np.asarray(a, dtype=np.int64)
                                                   for a in (l1, m1, l2, m2, l3, m3)))
    pref = np.sqrt((2 * l1 + 1) * (2 * l2 + 1) * (2 * l3 + 1) / (4.0 * np.pi))
    zero = np.zeros_like(l1)
    w0 = wigner3j_array(l1, l2, l3, zero, zero, zero)
    wm = wigner3j_array(l1, l2, l3, -m1, m2, m3)
    sign = np.where(m1 % 2 != 0, -1.0, 1.0)
    return sign * pref * w0 * wm


class GauntTable:
    """Thread-safe lazily populated cache of Gaunt coefficients.

    Keys are canonicalized with the symmetries W(a; b, c) = W(a; c, b) and
    invariance under negating every m.
    """

    def __init__(self):
        self._values = {}
        self._lock = threading.Lock()
        self.max_degree = 0

    @staticmethod
    def canonical_key(l1, m1, l2, m2, l3, m3):
        def form(s):
            tail = sorted([(l2, s * m2), (l3, s * m3)])
            return (l1, s * m1, *tail[0], *tail[1])
        return min(form(1), form(-1))

    def __call__(self, l1, m1, l2, m2, l3, m3):
        key = self.canonical_key(l1, m1, l2, m2, l3, m3)
        try:
            return self._values[key]
        except KeyError:
            pass
        value = gaunt(*key)
        with self._lock:
            self._values[key] = value
            self.max_degree = max(self.max_degree, l1, l2, l3)
        return value

    get = __call__

    def __len__(self):
        return len(self._values)


# ---------------------------------------------------------------------------
# Density model
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DensitySpec:
    """Band-limited density 1 + sum c_lm Y_lm with l >= 1.

    ``coefficients`` maps ``(l, m)`` to complex values.  Construction checks
    the index ranges only; reality and positivity are checked by
    :func:`validate_density`.
    """

    coefficients: Mapping[tuple, complex]

    def __post_init__(self):
        clean = {}
        for key, value in dict(self.coefficients).items():
            l, m = (int(key[0]), int(key[1]))
            check_index(l, m)
            if l == 0:
                raise DensityValidationError(
                    "l = 0 coefficient not allowed: the mean density is fixed to 1")
            value = complex(value)
            if value != 0:
                clean[(l, m)] = value
        object.__setattr__(self, "coefficients", MappingProxyType(dict(sorted(clean.items()))))

    @classmethod
    def homogeneous(cls):
        return cls({})

    @classmethod
    def kappa_y10(cls, kappa):
        """The axisymmetric family 1 + kappa * Y_10."""
        return cls({(1, 0): kappa})

    @property
    def band_limit(self):
        return max((l for l, _ in self.coefficients), default=0)

    @property
    def is_homogeneous(self):
        return not self.coefficients

    @property
    def m_support(self):
        return sorted({m for _, m in self.coefficients})

    def power_spectrum(self):
        """Mapping l -> sum_m |c_lm|^2."""
        out = {}
        for (l, _), c in self.coefficients.items():
            out[l] = out.get(l, 0.0) + abs(c) ** 2
        return out

    def scaled(self, factor):
        return DensitySpec({k: factor * v for k, v in self.coefficients.items()})

    def items(self):
        return self.coefficients.items()

    def __eq__(self, other):
        return isinstance(other, DensitySpec) and dict(self.coefficients) == dict(other.coefficients)

    def __hash__(self):
        return hash(tuple(self.coefficients.items()))

    def __repr__(self):
        return f"DensitySpec({dict(self.coefficients)!r})"

    def to_json_dict(self):
        return {"coefficients": [{"l": l, "m": m, "re": c.real, "im": c.imag}
                                 for (l, m), c in self.coefficients.items()]}

    @classmethod
    def from_json_dict(cls, doc):
        """Parse the density JSON document.

        Missing conjugate partners are filled with (-1)^m conj(c_lm) only when
        ``"autocomplete_conjugates": true`` is present.
        """
        if not isinstance(doc, dict) or "coefficients" not in doc:
            raise DensityValidationError("density document needs a 'coefficients' list")
        coeffs = {}
        for entry in doc["coefficients"]:
            try:
                l, m = int(entry["l"]), int(entry["m"])
                value = complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
            except (KeyError, TypeError, ValueError) as exc:
                raise DensityValidationError(f"malformed coefficient entry {entry!r}") from exc
            if l == 0:
                raise DensityValidationError("entries with l = 0 are rejected")
            check_index(l, m)
            if (l, m) in coeffs:
                raise DensityValidationError(f"duplicate coefficient for (l={l}, m={m})")
            coeffs[(l, m)] = value
        if doc.get("autocomplete_conjugates", False):
            for (l, m), c in list(coeffs.items()):
                if m != 0 and (l, -m) not in coeffs:
                    coeffs[(l, -m)] = (-1) ** m * c.conjugate()
        return cls(coeffs)


def load_density(path):
    with open(path) as fh:
        return DensitySpec.from_json_dict(json.load(fh))


def density_eval(d, theta, phi, return_residue=False):
    """Evaluate Sigma at the given angles (scalars or broadcastable arrays)."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(phi, dtype=float))
    total = np.ones(theta.shape, dtype=complex)
    for (l, m), c in d.coefficients.items():
        total += c * sph_harm_y(l, m, theta, phi)
    value = total.real
    if theta.ndim == 0:
        value = float(value)
    if return_residue:
        return value, float(np.max(np.abs(total.imag), initial=0.0))
    return value


@dataclass(frozen=True)
class ValidationReport:
    min_value: float
    argmin: tuple
    reality_residue: float
    band_limit: int
    grid_shape: tuple


def reality_residue(d):
    """Largest |c_{l,-m} - (-1)^m conj(c_lm)| and the offending index pair."""
    worst, where = 0.0, None
    for (l, m), c in d.coefficients.items():
        partner = d.coefficients.get((l, -m), 0j)
        err = abs(partner - (-1) ** m * c.conjugate())
        if err > worst:
            worst, where = err, ((l, m), (l, -m))
    return worst, where


def validation_grid(band_limit, resolution=None):
    """Gauss-Legendre (in cos theta) x uniform phi sampling grid plus both poles."""
    n = resolution or max(8 * band_limit, 32)
    n = max(n, 4 * band_limit)
    x, _ = np.polynomial.legendre.leggauss(n)
    theta = np.concatenate([[0.0], np.arccos(x[::-1]), [np.pi]])
    phi = 2 * np.pi * np.arange(2 * n) / (2 * n)
    return np.meshgrid(theta, phi, indexing="ij")


def validate_density(d, margin=1e-9, resolution=None):
    """Check reality (exactly, at coefficient level) and sampled positivity.

    Returns a :class:`ValidationReport`; raises :class:`RealityViolation` or
    :class:`PositivityViolation`.
    """
    residue, where = reality_residue(d)
    if residue != 0.0:
        raise RealityViolation(
            f"coefficients {where[0]} and {where[1]} violate c(l,-m) = (-1)^m conj(c(l,m))",
            index=where[0], partner=where[1])
    theta, phi = validation_grid(d.band_limit, resolution)
    values = density_eval(d, theta, phi)
    i = np.unravel_index(np.argmin(values), values.shape)
    vmin = float(values[i])
    point = (float(theta[i]), float(phi[i]))
    if not vmin > margin:
        raise PositivityViolation(
            f"density not positive: Sigma = {vmin:.6g} at theta={point[0]:.6g}, phi={point[1]:.6g}",
            theta=point[0], phi=point[1], value=vmin)
    return ValidationReport(vmin, point, residue, d.band_limit, values.shape)
