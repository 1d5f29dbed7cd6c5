"""Bessel functions J_nu for integer and half-integer orders.

Regimes:
  * power series for x <= 8 (cancellation past that point costs digits),
  * cosine integral representation (64-point trapezoid, exact to aliasing
    order J_{128-n}) for integer orders on 8 < x < 20,
  * Hankel asymptotic expansion for J_0, J_1 at x >= 20,
  * closed trigonometric forms j_0, j_1 plus order recurrences for
    half-integer orders at x > 8,
  * upward recurrence for order < 0.9 x, Miller downward recurrence with
    normalization otherwise.

Absolute accuracy target is 1e-12 for x <= 1e4; the test-suite checks this
against an independent high-precision oracle.
"""

import math

import numpy as np

from .errors import DomainError

_SERIES_CUT = 8.0
_ASYMPTOTIC_CUT = 20.0
_SERIES_TERMS = 34
_ASYM_TERMS = 17  # c_k/x^k for k < 17; at x = 20 the tail is below 1e-14


def _check_order(order):
    k2 = 2.0 * order
    if order < 0 or abs(k2 - round(k2)) > 1e-12:
        raise DomainError(f"order must be a nonnegative half-integer, got {order}")
    return round(k2) / 2.0


def _series(order, x, scaled):
    """Power series; with scaled=True returns J_nu(x)/x^nu (entire part)."""
    q = 0.25 * x * x
    if scaled:
        term = np.full_like(x, 2.0 ** (-order) / math.gamma(order + 1.0))
    else:
        term = (0.5 * x) ** order / math.gamma(order + 1.0)
    acc = term.copy()
    for m in range(1, _SERIES_TERMS):
        term = term * (-q) / (m * (m + order))
        acc += term
    return acc


def _asymptotic_int(n, x):
    """Hankel expansion for integer n in {0, 1}, x >= 20."""
    c = 1.0
    p = np.ones_like(x)
    qq = np.zeros_like(x)
    xk = x.copy()
    four_nu2 = 4.0 * n * n
    for k in range(1, _ASYM_TERMS):
        c = c * (four_nu2 - (2 * k - 1) ** 2) / (k * 8.0)
        sgn = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p = p + sgn * c / xk
        else:
            qq = qq + sgn * c / xk
        xk = xk * x
    chi = x - (2 * n + 1) * np.pi / 4.0
    return np.sqrt(2.0 / (np.pi * x)) * (p * np.cos(chi) - qq * np.sin(chi))


def _integral_rep_int(n, x):
    """(1/pi) * integral_0^pi cos(n t - x sin t) dt via 64-interval trapezoid."""
    m = 64
    theta = np.linspace(0.0, np.pi, m + 1)
    w = np.full(m + 1, np.pi / m)
    w[0] *= 0.5
    w[-1] *= 0.5
    phase = n * theta[None, :] - x[:, None] * np.sin(theta)[None, :]
    return (np.cos(phase) @ w) / np.pi


def _j01_int(n, x):
    """J_0 or J_1 on x > 8, split at the asymptotic switch point."""
    out = np.empty_like(x)
    mid = x < _ASYMPTOTIC_CUT
    if np.any(mid):
        out[mid] = _integral_rep_int(n, x[mid])
    if np.any(~mid):
        out[~mid] = _asymptotic_int(n, x[~mid])
    return out


def _upward_int(n, x):
    jm = _j01_int(0, x)
    jc = _j01_int(1, x)
    for k in range(1, n):
        jm, jc = jc, (2.0 * k / x) * jc - jm
    return jc if n >= 1 else jm


def _miller_int(n, x):
    """Downward recurrence with Neumann-series normalization, n >= 0.9 x."""
    m_start = int(max(n, np.max(x))) + int(math.sqrt(40.0 * max(n, 1))) + 14
    if m_start % 2:
        m_start += 1
    jp = np.zeros_like(x)
    jc = np.full_like(x, 1e-30)
    ans = np.zeros_like(x)
    norm = np.zeros_like(x)
    for k in range(m_start, 0, -1):
        jm = (2.0 * k / x) * jc - jp
        jp = jc
        jc = jm
        big = np.abs(jc) > 1e10
        if np.any(big):
            scale = np.where(big, 1e-10, 1.0)
            jc *= scale
            jp *= scale
            ans *= scale
            norm *= scale
        if (k - 1) == n:
            ans = jc.copy()
        if (k - 1) % 2 == 0:
            norm += jc if (k - 1) == 0 else 2.0 * jc
    return ans / norm


def _sph_closed(n, x):
    """Spherical j_n for n in {0, 1} from closed trigonometric forms."""
    if n == 0:
        return np.sin(x) / x
    return np.sin(x) / (x * x) - np.cos(x) / x


def _sph_upward(n, x):
    jm = _sph_closed(0, x)
    jc = _sph_closed(1, x)
    for k in range(1, n):
        jm, jc = jc, ((2.0 * k + 1.0) / x) * jc - jm
    return jc if n >= 1 else jm


def _sph_miller(n, x):
    m_start = int(max(n, np.max(x))) + int(math.sqrt(40.0 * max(n, 1))) + 14
    jp = np.zeros_like(x)
    jc = np.full_like(x, 1e-30)
    ans = np.zeros_like(x)
    v0 = np.zeros_like(x)
    v1 = np.zeros_like(x)
    for k in range(m_start, 0, -1):
        jm = ((2.0 * k + 1.0) / x) * jc - jp
        jp = jc
        jc = jm
        big = np.abs(jc) > 1e10
        if np.any(big):
            scale = np.where(big, 1e-10, 1.0)
            jc *= scale
            jp *= scale
            ans *= scale
            v1 *= scale
        if (k - 1) == n:
            ans = jc.copy()
        if (k - 1) == 1:
            v1 = jc.copy()
        if (k - 1) == 0:
            v0 = jc.copy()
    t0, t1 = _sph_closed(0, x), _sph_closed(1, x)
    use0 = np.abs(v0) >= np.abs(v1)
    ratio = np.where(use0, t0 / np.where(v0 != 0, v0, 1.0),
                     t1 / np.where(v1 != 0, v1, 1.0))
    return ans * ratio


def _large_x(order, x):
    if order == round(order):
        n = int(order)
        if n <= 1:
            return _j01_int(n, x)
        if n < 0.9 * np.min(x):
            return _upward_int(n, x)
        return _miller_int(n, x)
    n = int(order - 0.5)
    pref = np.sqrt(2.0 * x / np.pi)
    if n <= 1:
        return pref * _sph_closed(n, x)
    if n < 0.9 * np.min(x):
        return pref * _sph_upward(n, x)
    return pref * _sph_miller(n, x)


def bessel_j(order, x):
    """J_nu(x) for half-integer or integer nu >= 0 and x >= 0."""
    order = _check_order(order)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(x < 0):
        raise DomainError("argument must be nonnegative")
    out = np.empty_like(x)
    small = x <= _SERIES_CUT
    if np.any(small):
        out[small] = _series(order, x[small], scaled=False)
    if np.any(~small):
        # split the large lane again so the recurrence regime switch
        # (which compares order against min(x)) stays sharp
        xl = x[~small]
        res = np.empty_like(xl)
        lo = xl < max(2.0 * order, _ASYMPTOTIC_CUT)
        for lane in (lo, ~lo):
            if np.any(lane):
                res[lane] = _large_x(order, xl[lane])
        out[~small] = res
    return float(out[0]) if scalar else out


def bessel_j_scaled(order, x):
    """The entire function J_nu(x) / x^nu; at x = 0 equals 1/(2^nu Gamma(nu+1)).

    This is the natural kernel for radial transforms: the integrand
    m(r) * scaled(r*rho) * r^(d-1) stays smooth through rho = 0.
    """
    order = _check_order(order)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    if np.any(x < 0):
        raise DomainError("argument must be nonnegative")
    out = np.empty_like(x)
    small = x <= _SERIES_CUT
    if np.any(small):
        out[small] = _series(order, x[small], scaled=True)
    if np.any(~small):
        xb = x[~small]
        out[~small] = bessel_j(order, xb) / xb ** order
    return float(out[0]) if scalar else out


def surface_area(dim):
    """Surface measure of the unit sphere in R^dim."""
    return 2.0 * math.pi ** (dim / 2.0) / math.gamma(dim / 2.0)
