"""Coefficient-space engine for the integrals I1, I2, I3, J1, J2.

Everything lives on the basis Y_lm, 1 <= l <= L, ordered by
``index(l, m) = l*l - 1 + l + m``.  With

* ``S``   the density matrix <Y_lm | Sigma | Y_l'm'> = I + S',
* ``D_q`` the diagonal 1 / (l(l+1))^(q+1),
* ``v``   the density coefficients c_lm,

the integrals are

    I1(q)     = v^H D_q v
    I2(q,p)   = v^H D_q S D_p v
    I3(q,p,r) = v^H D_q S D_p S D_r v
    J1(q,p)   = tr(D_q S D_p S)
    J2(q,p,r) = tr(D_q S D_p S D_r S).

The I-integrals are exact once L >= 2 * band_limit.  The J-integrals are split
into the homogeneous part Z_n (closed form), terms linear in S' (zero shell by
shell), terms quadratic in S' (matrix trace up to L plus an exact
power-spectrum reduction for degrees beyond L) and, for J2, a cubic trace
converged by doubling L.

:class:`NestedSums` evaluates the same quantities a second way, as explicit
index sums over scalar Gaunt coefficients.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.sparse as sp
from scipy.special import gammaln, zeta

from .errors import DomainError, NonConverged
from .harmonics import GauntTable, gaunt_array

FOUR_PI = 4.0 * math.pi
DEFAULT_TOL = 1e-8
DEFAULT_MAX_CUTOFF = 512
REDUCED_SUM_DEGREE = 1 << 17


# ---------------------------------------------------------------------------
# basis and elementary objects
# ---------------------------------------------------------------------------

def dimension(L):
    return L * (L + 2)


def basis_index(l, m):
    return l * l - 1 + l + m


def basis_arrays(L):
    """Degree and order arrays of the l >= 1 basis up to degree L."""
    ls = np.concatenate([np.full(2 * l + 1, l) for l in range(1, L + 1)]) if L else np.zeros(0, int)
    ms = np.concatenate([np.arange(-l, l + 1) for l in range(1, L + 1)]) if L else np.zeros(0, int)
    return ls.astype(np.int64), ms.astype(np.int64)


@dataclass(frozen=True)
class PropagatorWeights:
    order: int
    cutoff: int
    values: np.ndarray  # 1/(l(l+1))^(q+1), l = 1..L

    def on_basis(self):
        ls, _ = basis_arrays(self.cutoff)
        return self.values[ls - 1]


def propagator_weights(q, L):
    if q < 0:
        raise DomainError("propagator order must be >= 0")
    l = np.arange(1, L + 1, dtype=float)
    return PropagatorWeights(q, L, 1.0 / (l * (l + 1)) ** (q + 1))


def _diag_weights(q, L):
    ls, _ = basis_arrays(L)
    return 1.0 / (ls * (ls + 1.0)) ** (q + 1)


def border_vector(d, L):
    """Density coefficients placed on the basis (components with l > L dropped)."""
    v = np.zeros(dimension(L), dtype=complex)
    for (l, m), c in d.items():
        if l <= L:
            v[basis_index(l, m)] = c
    return v


# ---------------------------------------------------------------------------
# homogeneous sums
# ---------------------------------------------------------------------------

def _partial_fraction(a, b):
    """Coefficients of 1/(x^a (x+1)^b) = sum_i A_i/x^i + sum_j B_j/(x+1)^j."""
    A = {i: (-1) ** (a - i) * math.comb(a + b - i - 1, b - 1) for i in range(1, a + 1)}
    B = {j: (-1) ** a * math.comb(a + b - j - 1, a - 1) for j in range(1, b + 1)}
    return A, B


def homogeneous_z(p):
    """Z_p = sum_{l>=1} (2l+1) / (l(l+1))^p for integer p >= 2."""
    if int(p) != p or p < 2:
        raise DomainError(f"Z_p diverges for p < 2 (got {p})")
    p = int(p)
    if p == 2:
        return 1.0
    if p == 3:
        return 2.0 * (float(zeta(3)) - 1.0)
    # (2l+1)/(l(l+1))^p = 1/(l^p (l+1)^(p-1)) + 1/(l^(p-1) (l+1)^p)
    coef_l, coef_l1 = {}, {}
    for a, b in ((p, p - 1), (p - 1, p)):
        A, B = _partial_fraction(a, b)
        for i, v in A.items():
            coef_l[i] = coef_l.get(i, 0) + v
        for j, v in B.items():
            coef_l1[j] = coef_l1.get(j, 0) + v
    # the 1/l and 1/(l+1) parts cancel pairwise and telescope to coef_l[1]
    terms = [float(coef_l[1])]
    terms += [v * float(zeta(i)) for i, v in coef_l.items() if i >= 2]
    terms += [v * (float(zeta(j)) - 1.0) for j, v in coef_l1.items() if j >= 2]
    return math.fsum(terms)


# ---------------------------------------------------------------------------
# density matrix
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SigmaMatrix:
    """Hermitian S = I + S' on the l >= 1 basis, truncated at degree ``cutoff``.

    ``m_modulus`` describes the m-block structure: 0 means every m is its own
    block (axisymmetric density), g > 1 means blocks are residue classes of m
    mod g, 1 means no decomposition.
    """

    cutoff: int
    perturbation: sp.csr_matrix
    m_modulus: int

    @property
    def dim(self):
        return dimension(self.cutoff)

    @property
    def matrix(self):
        return (sp.identity(self.dim, dtype=complex, format="csr") + self.perturbation).tocsr()

    @property
    def decomposable(self):
        return self.m_modulus != 1

    def dense(self):
        return self.matrix.toarray()

    def block_labels(self):
        _, ms = basis_arrays(self.cutoff)
        if self.m_modulus == 0:
            return ms
        return np.mod(ms, self.m_modulus)


def m_modulus(d):
    ms = [abs(m) for m in d.m_support if m != 0]
    if not ms:
        return 0
    return reduce(math.gcd, ms)


def assemble_sigma_matrix(d, L, max_cutoff=DEFAULT_MAX_CUTOFF):
    """Assemble S for density ``d`` on degrees 1..L.

    Only the upper triangle is computed from Gaunt coefficients; the lower
    triangle is its conjugate transpose, so Hermiticity is exact.
    """
    if L < max(1, d.band_limit):
        raise DomainError(f"cutoff {L} below the density band limit {d.band_limit}")
    if L > max_cutoff:
        raise DomainError(f"cutoff {L} exceeds the guard {max_cutoff}")
    n = dimension(L)
    ls, ms = basis_arrays(L)
    rows, cols, vals = [], [], []
    for (l1, m1), c in d.items():
        # l' = l + k with k >= 0 covers the upper triangle
        for k in range(0, l1 + 1):
            if (k + l1) % 2:
                continue
            sel = ls + k <= L
            la, ma = ls[sel], ms[sel]
            lb, mb = la + k, ma - m1
            ok = np.abs(mb) <= lb
            la, ma, lb, mb = la[ok], ma[ok], lb[ok], mb[ok]
            w = gaunt_array(la, ma, lb, mb, l1, m1)
            ra, cb = basis_index(la, ma), basis_index(lb, mb)
            keep = (ra <= cb) & (w != 0)
            rows.append(ra[keep])
            cols.append(cb[keep])
            vals.append(c * w[keep])
    if rows:
        r = np.concatenate(rows)
        cc = np.concatenate(cols)
        vv = np.concatenate(vals)
    else:
        r = cc = np.zeros(0, int)
        vv = np.zeros(0, complex)
    upper = sp.coo_matrix((vv, (r, cc)), shape=(n, n)).tocsr()
    upper.sum_duplicates()
    diag = upper.diagonal().real
    strict = sp.triu(upper, k=1, format="csr")
    pert = (strict + strict.conj().T + sp.diags(diag)).tocsr()
    pert.eliminate_zeros()
    return SigmaMatrix(L, pert.astype(complex), m_modulus(d))


# ---------------------------------------------------------------------------
# trace path at fixed cutoff
# ---------------------------------------------------------------------------

def integral_i1_exact(d, q):
    """I1(q) = sum |c_lm|^2 / (l(l+1))^(q+1): a finite sum over the support."""
    return math.fsum(abs(c) ** 2 / (l * (l + 1.0)) ** (q + 1) for (l, _), c in d.items())


def i2_trace(d, q, p, L, sigma=None):
    sigma = sigma or assemble_sigma_matrix(d, L)
    v = border_vector(d, L)
    w = sigma.matrix @ (_diag_weights(p, L) * v)
    return float(np.real(np.vdot(v, _diag_weights(q, L) * w)))


def i3_trace(d, q, p, r, L, sigma=None):
    sigma = sigma or assemble_sigma_matrix(d, L)
    S = sigma.matrix
    v = border_vector(d, L)
    w = S @ (_diag_weights(r, L) * v)
    w = S @ (_diag_weights(p, L) * w)
    return float(np.real(np.vdot(v, _diag_weights(q, L) * w)))


def linear_trace(sigma, a):
    """tr(D_a S')."""
    return float(np.sum(_diag_weights(a, sigma.cutoff) * sigma.perturbation.diagonal().real))


def quadratic_trace(sigma, a, b):
    """tr(D_a S' D_b S') = sum_ij a_i b_j |S'_ij|^2."""
    P = sigma.perturbation.tocoo()
    wa = _diag_weights(a, sigma.cutoff)
    wb = _diag_weights(b, sigma.cutoff)
    return float(np.sum(wa[P.row] * wb[P.col] * np.abs(P.data) ** 2))


def cubic_trace(sigma, a, b, c):
    """tr(D_a S' D_b S' D_c S')."""
    L = sigma.cutoff
    P = sigma.perturbation
    A = sp.diags(_diag_weights(a, L)) @ P
    B = sp.diags(_diag_weights(b, L)) @ P
    C = sp.diags(_diag_weights(c, L)) @ P
    M = (A @ B).tocsr()
    return float(np.real(M.multiply(C.T.tocsr()).sum()))


# ---------------------------------------------------------------------------
# power-spectrum reduction of quadratic traces
# ---------------------------------------------------------------------------

def wigner3j_000_squared(l1, l2, l3):
    """(l1 l2 l3; 0 0 0)^2 from the product formula, vectorized (no alternating sum)."""
    l1, l2, l3 = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (l1, l2, l3)))
    J = l1 + l2 + l3
    ok = (np.mod(J, 2) == 0) & (np.abs(l1 - l2) <= l3) & (l3 <= l1 + l2)
    out = np.zeros(l1.shape)
    a, b, c, JJ = l1[ok], l2[ok], l3[ok], J[ok]
    g = JJ / 2
    log_val = (gammaln(JJ - 2 * a + 1) + gammaln(JJ - 2 * b + 1) + gammaln(JJ - 2 * c + 1)
               - gammaln(JJ + 2)
               + 2 * (gammaln(g + 1) - gammaln(g - a + 1) - gammaln(g - b + 1) - gammaln(g - c + 1)))
    out[ok] = np.exp(log_val)
    return out


def reduced_quadratic_trace(d, a, b, lo=0, hi=REDUCED_SUM_DEGREE):
    """Part of tr(D_a S' D_b S') from degree pairs with lo < max(l, l') <= hi.

    Uses sum_{m,m'} |S'_{lm,l'm'}|^2 = sum_{l1} P_{l1} (2l+1)(2l'+1) (l l' l1;000)^2 / 4pi,
    P the power spectrum of the density.  Returns (value, tail_bound) where
    tail_bound estimates the omitted pairs beyond ``hi``.
    """
    total, last_shell = [], 0.0
    l = np.arange(1, hi + 1, dtype=float)
    da = 1.0 / (l * (l + 1)) ** (a + 1)
    db = 1.0 / (l * (l + 1)) ** (b + 1)
    for l1, power in d.power_spectrum().items():
        for k in range(-l1, l1 + 1):
            if (k + l1) % 2:
                continue
            lp = l + k
            ok = (lp >= 1) & (lp <= hi) & (np.maximum(l, lp) > lo)
            la, lb = l[ok], lp[ok]
            w = wigner3j_000_squared(la, lb, l1)
            terms = (power / FOUR_PI) * da[la.astype(int) - 1] * db[lb.astype(int) - 1] \
                * (2 * la + 1) * (2 * lb + 1) * w
            total.append(math.fsum(np.sort(terms)))
            if terms.size:
                last_shell += float(np.sum(terms[np.maximum(la, lb) > hi - 1]))
    # shell sums decay at least like 1/l^3, so the omitted tail is below hi * last/2
    return math.fsum(total), last_shell * hi / 2.0


# ---------------------------------------------------------------------------
# converged integrals
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Estimate:
    """A truncated value with its error estimate and the cutoff used."""

    value: float
    error: float
    cutoff: int

    def __float__(self):
        return float(self.value)


def default_cutoff(d):
    return max(64, 8 * d.band_limit)


def _converge(fn, L0, tol, max_cutoff):
    L = L0
    prev = fn(L)
    while True:
        L2 = 2 * L
        if L2 > max_cutoff:
            raise NonConverged(
                f"no convergence to {tol:g} below cutoff {max_cutoff}", value=prev, estimate=None)
        cur = fn(L2)
        err = abs(cur - prev)
        if err <= tol:
            return Estimate(cur, err, L2)
        L, prev = L2, cur


class SpectralEngine:
    """Caches density matrices per cutoff for one density."""

    def __init__(self, d, tol=DEFAULT_TOL, cutoff=None, max_cutoff=DEFAULT_MAX_CUTOFF):
        self.density = d
        self.tol = tol
        self.L0 = cutoff or default_cutoff(d)
        self.max_cutoff = max(max_cutoff, 2 * self.L0)
        self._sigma = {}
        self._reduced = {}

    def sigma(self, L):
        if L not in self._sigma:
            self._sigma[L] = assemble_sigma_matrix(self.density, L, max_cutoff=self.max_cutoff)
        return self._sigma[L]

    def _reduced_tail(self, a, b, L):
        key = (a, b, L)
        if key not in self._reduced:
            self._reduced[key] = reduced_quadratic_trace(self.density, a, b, lo=L)
        return self._reduced[key]

    def _quad(self, a, b, L):
        tail, _ = self._reduced_tail(a, b, L)
        return quadratic_trace(self.sigma(L), a, b) + tail

    # -- I integrals: finite sums, one doubling confirms ------------------
    def i1(self, q):
        return Estimate(integral_i1_exact(self.density, q), 0.0, self.density.band_limit)

    def _i_cutoff(self):
        return max(2 * self.density.band_limit, self.density.band_limit + 1, 1)

    def i2(self, q, p):
        if self.density.is_homogeneous:
            return Estimate(0.0, 0.0, 0)
        return _converge(lambda L: i2_trace(self.density, q, p, L, self.sigma(L)),
                         self._i_cutoff(), self.tol, self.max_cutoff)

    def i3(self, q, p, r):
        if self.density.is_homogeneous:
            return Estimate(0.0, 0.0, 0)
        return _converge(lambda L: i3_trace(self.density, q, p, r, L, self.sigma(L)),
                         self._i_cutoff(), self.tol, self.max_cutoff)

    # -- J integrals -------------------------------------------------------
    def j1(self, q, p):
        z = homogeneous_z(q + p + 2)
        if self.density.is_homogeneous:
            return Estimate(z, 0.0, 0)

        def at(L):
            s = self.sigma(L)
            return 2.0 * linear_trace(s, q + p + 1) + self._quad(q, p, L)

        est = _converge(at, self.L0, self.tol, self.max_cutoff)
        _, bound = self._reduced_tail(q, p, est.cutoff)
        return Estimate(z + est.value, est.error + bound, est.cutoff)

    def j2(self, q, p, r):
        z = homogeneous_z(q + p + r + 3)
        if self.density.is_homogeneous:
            return Estimate(z, 0.0, 0)
        pairs = ((q + r + 1, p), (q, p + r + 1), (q + p + 1, r))

        def at(L):
            s = self.sigma(L)
            lin = 3.0 * linear_trace(s, q + p + r + 2)
            quad = sum(self._quad(a, b, L) for a, b in pairs)
            return lin + quad + cubic_trace(s, q, p, r)

        est = _converge(at, self.L0, self.tol, self.max_cutoff)
        bound = sum(self._reduced_tail(a, b, est.cutoff)[1] for a, b in pairs)
        return Estimate(z + est.value, est.error + bound, est.cutoff)


def integral_I1(d, q):
    return integral_i1_exact(d, q)


def integral_I2(d, q, p, L=None, tol=DEFAULT_TOL):
    return SpectralEngine(d, tol=tol, cutoff=L).i2(q, p)


def integral_I3(d, q, p, r, L=None, tol=DEFAULT_TOL):
    return SpectralEngine(d, tol=tol, cutoff=L).i3(q, p, r)


def integral_J1(d, q, p, L=None, tol=DEFAULT_TOL):
    return SpectralEngine(d, tol=tol, cutoff=L).j1(q, p)


def integral_J2(d, q, p, r, L=None, tol=DEFAULT_TOL):
    return SpectralEngine(d, tol=tol, cutoff=L).j2(q, p, r)


def j1_truncated(d, q, p, L):
    """J1 with every trace cut at degree L (homogeneous part still exact)."""
    s = assemble_sigma_matrix(d, L)
    return homogeneous_z(q + p + 2) + 2.0 * linear_trace(s, q + p + 1) + quadratic_trace(s, q, p)


def j2_truncated(d, q, p, r, L):
    s = assemble_sigma_matrix(d, L)
    pairs = ((q + r + 1, p), (q, p + r + 1), (q + p + 1, r))
    return (homogeneous_z(q + p + r + 3) + 3.0 * linear_trace(s, q + p + r + 2)
            + sum(quadratic_trace(s, a, b) for a, b in pairs) + cubic_trace(s, q, p, r))


# ---------------------------------------------------------------------------
# nested-sum path
# ---------------------------------------------------------------------------

class NestedSums:
    """Explicit index sums over products of density coefficients and Gaunt coefficients.

    The density-weighted coupling ``s(lm, l'm') = sum_{l1 m1} c_{l1m1} W(l,m,l',m',l1,m1)``
    is enumerated with the selection rule m = m' + m1, then the outer sums
    run over explicit neighbour lists truncated at degree L.

    The quartic term of I3 and the quadratic terms of J2 follow the index
    structure of the corresponding traces: in I3 it is
    sum conj(c_lm) c_{l''m''} s(lm,l'm') s(l'm',l''m'') d_q(l) d_p(l') d_r(l''),
    and J2 carries the three weight patterns (q+r+1, p), (q, p+r+1), (q+p+1, r),
    which coincide only when q = p = r.
    """

    def __init__(self, d, L, table=None):
        self.density = d
        self.L = L
        self.W = table or GauntTable()
        self.coeff = dict(d.items())
        self._coupling = {}
        for l in range(1, L + 1):
            for m in range(-l, l + 1):
                row = {}
                for (l1, m1), c in self.coeff.items():
                    mp = m - m1
                    for lp in range(max(abs(l - l1), abs(mp), 1), min(l + l1, L) + 1):
                        w = self.W(l, m, lp, mp, l1, m1)
                        if w != 0.0:
                            row[(lp, mp)] = row.get((lp, mp), 0j) + c * w
                self._coupling[(l, m)] = row

    @staticmethod
    def _d(q, l):
        return 1.0 / (l * (l + 1.0)) ** (q + 1)

    def _c(self, l, m):
        return self.coeff.get((l, m), 0j) if l <= self.L else 0j

    def i2(self, q, p):
        d = self._d
        lin = sum(abs(c) ** 2 * d(p + q + 1, l) for (l, _), c in self.coeff.items())
        cub = 0j
        for (l, m), cl in self.coeff.items():
            for (lp, mp), s in self._coupling[(l, m)].items():
                cub += cl.conjugate() * s * self._c(lp, mp) * d(q, l) * d(p, lp)
        return float(lin + cub.real)

    def i3(self, q, p, r):
        d = self._d
        lin = sum(abs(c) ** 2 * d(p + q + r + 2, l) for (l, _), c in self.coeff.items())
        cub = 0j
        for (l, m), cl in self.coeff.items():
            for (lp, mp), s in self._coupling[(l, m)].items():
                w = d(q, l) * d(p + r + 1, lp) + d(q + p + 1, l) * d(r, lp)
                cub += cl.conjugate() * s * self._c(lp, mp) * w
        quart = 0j
        for (l, m), cl in self.coeff.items():
            for (lp, mp), s1 in self._coupling[(l, m)].items():
                for (lpp, mpp), s2 in self._coupling[(lp, mp)].items():
                    c3 = self._c(lpp, mpp)
                    if c3:
                        quart += cl.conjugate() * s1 * s2 * c3 * d(q, l) * d(p, lp) * d(r, lpp)
        return float(lin + cub.real + quart.real)

    def _pair_sum(self, a, b):
        d = self._d
        total = 0.0
        for (l, m), row in self._coupling.items():
            for (lp, mp), s in row.items():
                total += d(a, l) * d(b, lp) * abs(s) ** 2
        return total

    def _diag_sum(self, a):
        d = self._d
        return sum(d(a, l) * row.get((l, m), 0j).real for (l, m), row in self._coupling.items())

    def j1(self, q, p):
        return homogeneous_z(q + p + 2) + 2.0 * self._diag_sum(q + p + 1) + self._pair_sum(q, p)

    def j2(self, q, p, r):
        d = self._d
        lin = 3.0 * self._diag_sum(q + p + r + 2)
        quad = (self._pair_sum(q + r + 1, p) + self._pair_sum(q, p + r + 1)
                + self._pair_sum(q + p + 1, r))
        cub = 0j
        for (l, m), row in self._coupling.items():
            for (lp, mp), s1 in row.items():
                for (lpp, mpp), s2 in self._coupling[(lp, mp)].items():
                    s3 = self._coupling[(lpp, mpp)].get((l, m))
                    if s3:
                        cub += s1 * s2 * s3 * d(q, l) * d(p, lp) * d(r, lpp)
        return homogeneous_z(q + p + r + 3) + lin + quad + cub.real
