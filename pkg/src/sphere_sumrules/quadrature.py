"""Sphere quadrature and brute-force oracles for I1 and J1.

The oracles never touch Gaunt coefficients or density matrices: they integrate
Sigma(a) K(a.b) Sigma(b) directly, with the closed-form Green's functions as
kernel.  Around every outer node the inner integral uses local polar angles
(alpha, beta) with the substitution 1 - cos(alpha) = 2 t^4, which removes the
logarithmic singularity at coincidence.
"""
from dataclasses import dataclass

import numpy as np

from .errors import NonConverged
from .greens import green_closed
from .harmonics import DensitySpec, density_eval, ylm


@dataclass(frozen=True)
class SphereGrid:
    """Gauss-Legendre nodes in cos(theta) times uniform trapezoid nodes in phi."""

    n_theta: int
    n_phi: int

    def nodes(self):
        x, wx = np.polynomial.legendre.leggauss(self.n_theta)
        phi = 2 * np.pi * np.arange(self.n_phi) / self.n_phi
        theta, ph = np.meshgrid(np.arccos(x), phi, indexing="ij")
        w = np.outer(wx, np.full(self.n_phi, 2 * np.pi / self.n_phi))
        return theta, ph, w

    @property
    def exact_degree(self):
        return min(2 * self.n_theta - 1, self.n_phi - 1)

    @classmethod
    def for_degree(cls, degree):
        return cls(degree // 2 + 1, degree + 1)


def integrate_sphere(f, grid):
    """Integrate ``f(theta, phi)`` (callable or values on the grid nodes)."""
    theta, phi, w = grid.nodes()
    values = f(theta, phi) if callable(f) else np.asarray(f)
    return np.sum(w * values)


def project_function(f, L, grid=None):
    """Harmonic coefficients of ``f`` for 1 <= l <= L (exact for band-limited f)."""
    grid = grid or SphereGrid.for_degree(2 * L + 2)
    theta, phi, w = grid.nodes()
    values = f(theta, phi)
    return {(l, m): complex(np.sum(w * values * np.conj(ylm(l, m, theta, phi))))
            for l in range(1, L + 1) for m in range(-l, l + 1)}


def rotate_density(d, rotation):
    """Density whose values are Sigma(R^T e): coefficients mix within each degree.

    Coefficients with m >= 0 come from quadrature projection and those with
    m < 0 from the reality rule, so the result is exactly real.
    """
    R = np.asarray(rotation, dtype=float)

    def rotated(theta, phi):
        e = _unit(theta, phi)
        back = np.einsum("ji,...j->...i", R, e)
        t, p = _angles(back)
        return density_eval(d, t, p) - 1.0

    raw = project_function(rotated, d.band_limit)
    coeffs = {}
    for (l, m), c in raw.items():
        if m > 0:
            coeffs[(l, m)] = c
            coeffs[(l, -m)] = (-1) ** m * c.conjugate()
        elif m == 0:
            coeffs[(l, 0)] = complex(c.real, 0.0)
    cleaned = {k: v for k, v in coeffs.items() if abs(v) > 1e-15}
    return DensitySpec(cleaned)


def _unit(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def _angles(e):
    z = np.clip(e[..., 2], -1.0, 1.0)
    return np.arccos(z), np.mod(np.arctan2(e[..., 1], e[..., 0]), 2 * np.pi)


def _frame(e):
    # two unit vectors orthogonal to e (and to each other)
    helper = np.where(np.abs(e[..., 2:3]) < 0.9, [0.0, 0.0, 1.0], [1.0, 0.0, 0.0])
    u = np.cross(e, helper)
    u /= np.linalg.norm(u, axis=-1, keepdims=True)
    w = np.cross(e, u)
    return u, w


@dataclass(frozen=True)
class OracleResult:
    value: float
    estimate: float
    n_t: int


def _pair_integral(d, kernel, n_t, power=4):
    """Integral of Sigma(a) K(a.b) Sigma(b) over both spheres."""
    Lc = d.band_limit
    outer = SphereGrid(Lc + 2, 2 * Lc + 3)
    th, ph, w_out = outer.nodes()
    e = _unit(th.ravel(), ph.ravel())
    u, v = _frame(e)

    t, wt = np.polynomial.legendre.leggauss(n_t)
    t = 0.5 * (t + 1.0)
    wt = 0.5 * wt
    x = 1.0 - 2.0 * t ** power
    wx = wt * 2.0 * power * t ** (power - 1)
    k_vals = kernel(x)
    n_beta = 2 * Lc + 2
    beta = 2 * np.pi * np.arange(n_beta) / n_beta
    sin_a = np.sqrt(np.clip(1.0 - x * x, 0.0, None))

    # inner points: x e + sin(alpha) (cos(beta) u + sin(beta) w)
    circ = (np.cos(beta)[:, None, None] * u[None, :, :]
            + np.sin(beta)[:, None, None] * v[None, :, :])            # (beta, node, 3)
    pts = (x[:, None, None, None] * e[None, None, :, :]
           + sin_a[:, None, None, None] * circ[None, :, :, :])       # (alpha, beta, node, 3)
    tb, pb = _angles(pts)
    sig_inner = density_eval(d, tb, pb)
    inner = np.einsum("a,a,abn->n", wx, k_vals, sig_inner) * (2 * np.pi / n_beta)
    sig_outer = density_eval(d, th.ravel(), ph.ravel())
    return float(np.sum(w_out.ravel() * sig_outer * inner))


def _refine(d, kernel, n_t, rtol, max_n_t, atol=1e-12):
    prev = _pair_integral(d, kernel, n_t)
    while True:
        n2 = 2 * n_t
        cur = _pair_integral(d, kernel, n2)
        est = abs(cur - prev)
        if est <= max(rtol * abs(cur), atol):
            return OracleResult(cur, est, n2)
        if n2 >= max_n_t:
            raise NonConverged(f"oracle refinement stalled at n_t={n2}", value=cur, estimate=est)
        n_t, prev = n2, cur


def oracle_I1(d, q, n_t=64, rtol=1e-7, max_n_t=4096):
    """Brute-force I1(q) = int Sigma(a) G^(q)(a, b) Sigma(b) da db."""
    return _refine(d, lambda x: green_closed(q, x), n_t, rtol, max_n_t)


def oracle_J1(d, q, p, n_t=64, rtol=1e-7, max_n_t=4096):
    """Brute-force J1(q,p) = int Sigma(a) G^(q)(a, b) Sigma(b) G^(p)(b, a) da db."""
    return _refine(d, lambda x: green_closed(q, x) * green_closed(p, x), n_t, rtol, max_n_t)
