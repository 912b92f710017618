"""Regularized Green's functions of the sphere Laplacian and the real polylogarithms they need.

``G^(q)(x) = (1/4pi) sum_{l>=1} (2l+1) P_l(x) / (l(l+1))^(q+1)`` where ``x`` is
the cosine of the geodesic angle.  Closed forms exist for q = 0, 1, 2.
"""
import math

import numpy as np

from .errors import DomainError, SingularPoint

ZETA2 = math.pi ** 2 / 6
ZETA3 = 1.2020569031595942853997381615114
LOG2 = math.log(2.0)
FOUR_PI = 4.0 * math.pi

# Bernoulli numbers B_2..B_30, used for zeta at negative integers.
_BERNOULLI = {
    2: 1 / 6, 4: -1 / 30, 6: 1 / 42, 8: -1 / 30, 10: 5 / 66, 12: -691 / 2730,
    14: 7 / 6, 16: -3617 / 510, 18: 43867 / 798, 20: -174611 / 330,
    22: 854513 / 138, 24: -236364091 / 2730, 26: 8553103 / 6,
    28: -23749461029 / 870, 30: 8615841276005 / 14322,
}


def _series(z, power, tol=1e-18):
    total, zk, k = 0.0, z, 1
    while True:
        term = zk / k ** power
        total += term
        if abs(term) < tol * max(abs(total), 1e-300) or k > 400:
            return total
        k += 1
        zk *= z


def dilog(z):
    """Real dilogarithm Li2(z) for z <= 1.

    Arguments below -1 are mapped by inversion (needed by G^(1) for x < 0).
    """
    z = float(z)
    if not z <= 1.0 or math.isnan(z):
        raise DomainError(f"dilog: real argument must be <= 1, got {z}")
    if z == 1.0:
        return ZETA2
    if z == 0.0:
        return 0.0
    if z < -1.0:
        return -ZETA2 - 0.5 * math.log(-z) ** 2 - dilog(1.0 / z)
    if z < -0.5:
        # Landen: z/(z-1) lies in [1/3, 1/2)
        return -dilog(z / (z - 1.0)) - 0.5 * math.log1p(-z) ** 2
    if z <= 0.5:
        return _series(z, 2)
    return ZETA2 - math.log(z) * math.log1p(-z) - _series(1.0 - z, 2)


def _li3_log_expansion(mu):
    # Li3(e^mu) for -log 2 <= mu <= 0, convergent for |mu| < 2pi
    if mu == 0.0:
        return ZETA3
    total = ZETA3 + ZETA2 * mu + 0.5 * mu * mu * (1.5 - math.log(-mu))
    # k >= 3: zeta(3-k) mu^k / k!, zeta(-n) = -B_{n+1}/(n+1), zero for even n > 0
    fact = 2.0
    for k in range(3, 32):
        fact *= k
        n = k - 3
        if n == 0:
            zeta_val = -0.5
        elif n % 2 == 0:
            continue
        else:
            zeta_val = -_BERNOULLI[n + 1] / (n + 1)
        term = zeta_val * mu ** k / fact
        total += term
        if abs(term) < 1e-18:
            break
    return total


def trilog(z):
    """Real trilogarithm Li3(z) on [-1, 1]."""
    z = float(z)
    if not -1.0 <= z <= 1.0:
        raise DomainError(f"trilog: argument must lie in [-1, 1], got {z}")
    if z == 0.0:
        return 0.0
    if abs(z) <= 0.5:
        return _series(z, 3)
    if z > 0.5:
        return _li3_log_expansion(math.log(z))
    # duplication: Li3(z) + Li3(-z) = Li3(z^2) / 4
    return 0.25 * trilog(z * z) - trilog(-z)


def _green0(x):
    if x == 1.0:
        raise SingularPoint("G^(0) is logarithmically singular at x = 1")
    return (LOG2 - 1.0 - math.log1p(-x)) / FOUR_PI


def _green1(x):
    if x == -1.0:
        raise SingularPoint("closed form of G^(1) requires a limit at x = -1")
    if x == 1.0:
        return 1.0 / FOUR_PI
    log_ratio = math.log1p(-x) - math.log1p(x)
    log_two_over = LOG2 - math.log1p(x)
    ratio = (1.0 - x) / (1.0 + x)
    value = log_ratio * log_two_over - 0.5 * log_two_over ** 2 + dilog(-ratio) + 1.0
    return value / FOUR_PI


def _green2(x):
    u = 0.5 * (1.0 - x)
    w = 0.5 * (1.0 + x)
    log_term = 0.0 if u == 0.0 else math.log(u) * dilog(u)
    value = ZETA2 - 2.0 + 2.0 * ZETA3 + log_term - dilog(w) - 2.0 * trilog(u)
    return value / FOUR_PI


def geodesic_cosine(theta, phi, theta2, phi2):
    """Inner product of the unit vectors at two points, clipped to [-1, 1]."""
    x = (np.cos(theta) * np.cos(theta2)
         + np.sin(theta) * np.sin(theta2) * np.cos(np.asarray(phi) - phi2))
    return np.clip(x, -1.0, 1.0)


_CLOSED = {0: _green0, 1: _green1, 2: _green2}


def green_closed(q, x):
    """Closed-form G^(q)(x) for q in {0, 1, 2}, including the 1/(4 pi) factor.

    Accepts a scalar or an array of geodesic cosines.
    """
    if q not in _CLOSED:
        raise DomainError(f"closed form available only for q in {{0, 1, 2}}, got {q}")
    fn = _CLOSED[q]
    arr = np.asarray(x, dtype=float)
    if np.any(np.abs(arr) > 1.0) or np.any(np.isnan(arr)):
        raise DomainError("geodesic cosine must lie in [-1, 1]")
    if arr.ndim == 0:
        return fn(float(arr))
    return np.array([fn(v) for v in arr.ravel()]).reshape(arr.shape)


def _legendre_partial_sums(q, x, L):
    x = np.asarray(x, dtype=float)
    p_prev, p_cur = np.ones_like(x), x.copy()
    total = np.zeros_like(x)
    sums = []
    for l in range(1, L + 1):
        total = total + (2 * l + 1) / (l * (l + 1.0)) ** (q + 1) * p_cur
        sums.append(total)
        p_prev, p_cur = p_cur, ((2 * l + 1) * x * p_cur - l * p_prev) / (l + 1)
    return np.array(sums) / FOUR_PI


def green_series(q, x, L):
    """Legendre series of G^(q) truncated at degree L (three-term recurrence)."""
    if q < 0 or int(q) != q:
        raise DomainError("q must be a non-negative integer")
    if L < 1:
        raise DomainError("truncation degree must be >= 1")
    x = np.asarray(x, dtype=float)
    p_prev, p_cur = np.ones_like(x), x.copy()
    total = np.zeros_like(x)
    for l in range(1, L + 1):
        total = total + (2 * l + 1) / (l * (l + 1.0)) ** (q + 1) * p_cur
        p_prev, p_cur = p_cur, ((2 * l + 1) * x * p_cur - l * p_prev) / (l + 1)
    total = total / FOUR_PI
    return float(total) if total.ndim == 0 else total


def green_series_cesaro(q, x, L, start=None):
    """Arithmetic mean of the partial Legendre sums of degree start..L.

    ``start=1`` is the plain (C,1) mean.  The default ``start = L//2 + 1``
    (delayed mean) discards the early partial sums, whose bias otherwise
    decays only like 1/L.
    """
    if start is None:
        start = L // 2 + 1
    if not 1 <= start <= L:
        raise DomainError("need 1 <= start <= L")
    sums = _legendre_partial_sums(q, x, L)[start - 1:]
    out = sums.mean(axis=0)
    return float(out) if np.ndim(out) == 0 else out
