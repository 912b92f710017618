"""Renormalized sum rules of order 2 and 3 and the zero-mode energy coefficients.

For a density of total mass 4 pi the nonzero eigenvalues E_n of
-Lap psi = E Sigma psi satisfy

    sum 1/E_n^2 = J1(0,0) - I2(0,0)/(2 pi) + (I1(0)/4pi)^2
    sum 1/E_n^3 = J2(0,0,0) - 3 I3(0,0,0)/(4 pi) + 3 I1(0) I2(0,0)/(16 pi^2) - (I1(0)/4pi)^3

Equivalently both are tr(T^p) with T = D_0 (S - v v^H / 4pi); the rank-one
term is the projection that removes the zero mode.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .errors import UnsupportedOrder
from .spectral_core import DEFAULT_TOL, SpectralEngine

FOUR_PI = 4.0 * math.pi
COMPONENT_KEYS = ("I1_0", "I2_00", "I3_000", "J1_00", "J2_000")


@dataclass(frozen=True)
class E0Coefficients:
    """Taylor coefficients of the lowest eigenvalue E0(gamma) of -Lap + gamma."""

    e1: float
    e2: float
    e3: float
    e4: float


@dataclass(frozen=True)
class SumRuleReport:
    order: int
    value: float
    components: dict
    e0: E0Coefficients
    cutoff: int
    error_estimate: float

    def to_dict(self):
        return {
            "order": self.order,
            "value": self.value,
            "components": dict(self.components),
            "e0": asdict(self.e0),
            "cutoff": self.cutoff,
            "error_estimate": self.error_estimate,
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, doc):
        return cls(int(doc["order"]), float(doc["value"]), dict(doc["components"]),
                   E0Coefficients(**doc["e0"]), int(doc["cutoff"]), float(doc["error_estimate"]))


def assemble(order, components):
    """Combine the component integrals into the sum rule of the given order."""
    if order not in (2, 3):
        raise UnsupportedOrder(f"sum rules implemented for orders 2 and 3, not {order}")
    i1 = components["I1_0"] / FOUR_PI
    if order == 2:
        return components["J1_00"] - components["I2_00"] / (2 * math.pi) + i1 ** 2
    return (components["J2_000"] - 3 * components["I3_000"] / FOUR_PI
            + 3 * components["I1_0"] * components["I2_00"] / (16 * math.pi ** 2) - i1 ** 3)


def e0_from_integrals(i1_0, i1_1, i1_2, i2_00, i2_10, i3_000):
    """Zero-mode coefficients at total mass 4 pi from the I-integrals.

    Obtained by expanding gamma = E + E^2 u^H (Lap + gamma - E S)^-1 u, the
    zero-mode condition of the shifted pencil, order by order in gamma.
    """
    pi = math.pi
    e2 = -i1_0 / FOUR_PI
    e3 = (i1_1 - i2_00) / FOUR_PI + i1_0 ** 2 / (8 * pi ** 2)
    e4 = ((-i1_2 + 2 * i2_10 - i3_000) / FOUR_PI
          - 4 * i1_1 * i1_0 / (16 * pi ** 2)
          + 5 * i1_0 * i2_00 / (16 * pi ** 2)
          - 5 * i1_0 ** 3 / (64 * pi ** 3))
    return E0Coefficients(1.0, e2, e3, e4)


def e0_coefficients(d, tol=DEFAULT_TOL, engine=None):
    eng = engine or SpectralEngine(d, tol=tol)
    return e0_from_integrals(
        eng.i1(0).value, eng.i1(1).value, eng.i1(2).value,
        eng.i2(0, 0).value, eng.i2(1, 0).value, eng.i3(0, 0, 0).value)


def inverse_power_laurent(e, p):
    """Coefficients of gamma^-p .. gamma^0 in 1/E0(gamma)^p for p in {2, 3}.

    E0 = e1 g + e2 g^2 + e3 g^3 + e4 g^4 + ...; returned as a dict
    {power: coefficient} for powers -p..0.
    """
    e1, e2, e3, e4 = e.e1, e.e2, e.e3, e.e4
    if p == 2:
        return {-2: 1 / e1 ** 2, -1: -2 * e2 / e1 ** 3,
                0: (3 * e2 ** 2 - 2 * e1 * e3) / e1 ** 4}
    if p == 3:
        return {-3: 1 / e1 ** 3, -2: -3 * e2 / e1 ** 4,
                -1: -3 * (-2 * e2 ** 2 + e1 * e3) / e1 ** 5,
                0: (-10 * e2 ** 3 + 12 * e1 * e2 * e3 - 3 * e1 ** 2 * e4) / e1 ** 6}
    raise UnsupportedOrder(p)


def exact_sum_rule(d, p, tol=DEFAULT_TOL, engine=None):
    """Exact renormalized sum rule sum_{n>=1} 1/E_n^p for p in {2, 3}."""
    if p not in (2, 3):
        raise UnsupportedOrder(f"sum rules implemented for orders 2 and 3, not {p}")
    eng = engine or SpectralEngine(d, tol=tol)
    # every report carries all five components so orders are comparable
    parts = {
        "I1_0": eng.i1(0),
        "I2_00": eng.i2(0, 0),
        "I3_000": eng.i3(0, 0, 0),
        "J1_00": eng.j1(0, 0),
        "J2_000": eng.j2(0, 0, 0),
    }
    components = {k: float(v.value) for k, v in parts.items()}
    used = ("I1_0", "I2_00", "J1_00") if p == 2 else ("I1_0", "I2_00", "I3_000", "J2_000")
    error = sum(parts[k].error for k in used)
    cutoff = max(parts[k].cutoff for k in used)
    return SumRuleReport(p, assemble(p, components), components,
                         e0_coefficients(d, engine=eng), cutoff, error)


def scale_sum_rule(value, p, factor):
    """Sum rule for the density factor * Sigma given the value for Sigma."""
    return value * factor ** p
