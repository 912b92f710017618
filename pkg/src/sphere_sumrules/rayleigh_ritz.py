"""Rayleigh-Ritz spectrum of -Lap psi = E Sigma psi and Weyl-completed sum rules.

The trial space is spanned by Y_lm with 0 <= l <= l_max.  The constant is the
exact zero mode, so the remaining eigenvalues are those of the pencil
(A, B) on 1 <= l <= l_max with A = diag(l(l+1)) and B the Schur complement
S - v v^H / (4 pi) of the full overlap matrix.  Dropping the rank-one term
(``remove_zero_mode=False``) restricts the trial space to functions of zero
mean instead, which is a different problem: its sums converge to J1, J2
rather than to the sum rules.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DomainError, NotPositiveDefinite, UnsupportedOrder
from .spectral_core import assemble_sigma_matrix, basis_arrays, border_vector, dimension

FOUR_PI = 4.0 * math.pi
MAX_LMAX = 96

# B_2k / (2k)! for the Euler-Maclaurin remainder
_EM = [1 / 12, -1 / 720, 1 / 30240, -1 / 1209600, 1 / 47900160, -691 / 1307674368000]


@dataclass(frozen=True)
class SpectrumApprox:
    l_max: int
    eigenvalues: np.ndarray
    n_retained: int
    n_blocks: int

    @property
    def dim(self):
        return dimension(self.l_max)


@dataclass(frozen=True)
class WeylTail:
    p: int
    N: int
    value: float


@dataclass(frozen=True)
class NumericSumRule:
    value: float
    order: int
    n_retained: int
    partial_sum: float
    weyl_tail: float

    def __float__(self):
        return self.value


def default_retained(l_max):
    return dimension(l_max) // 3


def _check_lmax(d, l_max, allow_large):
    if l_max < d.band_limit + 1:
        raise DomainError(f"l_max={l_max} must exceed the band limit {d.band_limit}")
    if l_max > MAX_LMAX and not allow_large:
        raise DomainError(f"l_max={l_max} exceeds the guard {MAX_LMAX}; pass allow_large")


def _overlap(d, l_max, remove_zero_mode):
    sigma = assemble_sigma_matrix(d, l_max, max_cutoff=max(512, l_max))
    S = sigma.matrix.tocsr()
    v = border_vector(d, l_max) if remove_zero_mode else None
    return sigma, S, v


def _block(S, v, idx):
    B = S[idx][:, idx].toarray()
    if v is not None:
        vb = v[idx]
        B = B - np.outer(vb, vb.conj()) / FOUR_PI
    return B.real if not np.any(B.imag) else B


def stiffness(l_max):
    ls, _ = basis_arrays(l_max)
    return ls * (ls + 1.0)


def pencil_matrices(d, l_max, remove_zero_mode=True, allow_large=False):
    """Dense stiffness A = diag(l(l+1)) and overlap B on 1 <= l <= l_max."""
    _check_lmax(d, l_max, allow_large)
    _, S, v = _overlap(d, l_max, remove_zero_mode)
    return np.diag(stiffness(l_max)), _block(S, v, np.arange(S.shape[0]))


def pencil_eigenvalues(A, B):
    """Ascending eigenvalues of A c = E B c for Hermitian A and positive definite B."""
    try:
        return sla.eigh(A, B, eigvals_only=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("overlap matrix is not positive definite") from exc


def solve_spectrum(d, l_max, allow_large=False, remove_zero_mode=True, n_retained=None,
                   use_blocks=True):
    """Ritz values of the density-weighted Laplacian on degrees up to l_max."""
    _check_lmax(d, l_max, allow_large)
    sigma, S, v = _overlap(d, l_max, remove_zero_mode)
    stiff = stiffness(l_max)
    if use_blocks and sigma.decomposable:
        labels = sigma.block_labels()
    else:
        labels = np.zeros(sigma.dim, int)
    blocks = np.unique(labels)
    values = []
    for b in blocks:
        idx = np.flatnonzero(labels == b)
        try:
            values.append(pencil_eigenvalues(np.diag(stiff[idx]), _block(S, v, idx)))
        except NotPositiveDefinite as exc:
            raise NotPositiveDefinite(
                f"overlap matrix not positive definite at l_max={l_max}") from exc
    ev = np.sort(np.concatenate(values), kind="stable")
    n = default_retained(l_max) if n_retained is None else n_retained
    if not 0 < n <= len(ev):
        raise DomainError(f"retained count {n} outside 1..{len(ev)}")
    return SpectrumApprox(l_max, ev, n, len(blocks))


def weyl_tail(p, N):
    """sum_{n>N} n^-p: the Weyl completion E_n ~ n beyond the retained count."""
    if p < 2:
        raise UnsupportedOrder(f"Weyl tail needs p >= 2, got {p}")
    if N < 1:
        raise DomainError("N must be >= 1")
    M = max(N + 1, 64)
    direct = [n ** -float(p) for n in range(N + 1, M)]
    rem = [M ** (1.0 - p) / (p - 1), 0.5 * M ** -float(p)]
    rising = float(p)  # p (p+1) ... (p + 2k - 2)
    for k, coef in enumerate(_EM, start=1):
        rem.append(coef * rising * M ** (-p - 2 * k + 1.0))
        rising *= (p + 2 * k - 1) * (p + 2 * k)
    return WeylTail(p, N, math.fsum(direct + rem))


def numeric_sum_rule(spec, p, N=None):
    """Lowest-N Ritz sum of E_n^-p completed with the Weyl tail."""
    if p not in (2, 3):
        raise UnsupportedOrder(f"numeric sum rules for orders 2 and 3, not {p}")
    N = spec.n_retained if N is None else N
    if not 1 <= N <= len(spec.eigenvalues):
        raise DomainError(f"retained count {N} outside 1..{len(spec.eigenvalues)}")
    partial = math.fsum(spec.eigenvalues[:N] ** -float(p))
    tail = weyl_tail(p, N).value
    return NumericSumRule(partial + tail, p, N, partial, tail)


def counting_function(spec, E):
    """Number of Ritz values <= E."""
    return int(np.searchsorted(spec.eigenvalues, E, side="right"))


@dataclass(frozen=True)
class SweepRow:
    l_max: int
    numeric: float
    abs_err: float
    n_retained: int
    weyl_tail: float


def convergence_sweep(d, p, l_max_list, exact=None, allow_large=False):
    """Numeric sum rule and its error against the exact value for several cutoffs."""
    if exact is None:
        from .sumrules import exact_sum_rule
        exact = exact_sum_rule(d, p).value
    rows = []
    for l_max in l_max_list:
        spec = solve_spectrum(d, l_max, allow_large=allow_large)
        num = numeric_sum_rule(spec, p)
        rows.append(SweepRow(l_max, num.value, abs(num.value - exact), num.n_retained, num.weyl_tail))
    return rows


__all__ = [
    "SpectrumApprox", "WeylTail", "NumericSumRule", "SweepRow", "solve_spectrum",
    "weyl_tail", "numeric_sum_rule", "counting_function", "convergence_sweep",
    "default_retained", "pencil_matrices", "pencil_eigenvalues", "stiffness",
]
