"""Scalar special functions used inside the compiled kernels.

Each scalar routine has an array twin (``*_array``) used by the numpy backend.
"""
import math

import numpy as np

from ._jit import njit

_EPS = 1e-16
_TINY = 1e-300
_MAXITER = 1000

# Bernoulli-number coefficients B_2k / (2k) of the digamma asymptotic series
_PSI_COEF = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    5.0 / 660.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
_PSI_SHIFT = 6.0


@njit
def digamma(x):
    """Digamma function for ``x > 0`` (NaN otherwise)."""
    if not x > 0.0:
        return math.nan
    acc = 0.0
    while x < _PSI_SHIFT:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    p = inv2
    for c in _PSI_COEF:
        series += c * p
        p *= inv2
    return acc + math.log(x) - 0.5 / x - series


def digamma_array(x):
    x = np.array(x, dtype=np.float64, copy=True)
    out = np.where(x > 0.0, 0.0, np.nan)
    small = x < _PSI_SHIFT
    while np.any(small):
        out[small] -= 1.0 / x[small]
        x[small] += 1.0
        small = x < _PSI_SHIFT
    inv2 = 1.0 / (x * x)
    series = np.zeros_like(x)
    p = inv2.copy()
    for c in _PSI_COEF:
        series += c * p
        p *= inv2
    return out + np.log(x) - 0.5 / x - series


@njit
def _gamma_p_series(a, x):
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAXITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


@njit
def _gamma_q_contfrac(a, x):
    # modified Lentz evaluation of the continued fraction for Q(a, x)
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAXITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


@njit
def gammaincc(a, x):
    """Regularized upper incomplete gamma function Q(a, x), ``a > 0``, ``x >= 0``."""
    if x <= 0.0:
        return 1.0
    if x < a + 1.0:
        q = 1.0 - _gamma_p_series(a, x)
    else:
        q = _gamma_q_contfrac(a, x)
    return min(max(q, 0.0), 1.0)


@njit
def chi2_sf(x, dof):
    """Upper tail Pr(chi2_dof > x)."""
    return gammaincc(0.5 * dof, 0.5 * x)


def gammaincc_array(a, x):
    a = np.broadcast_to(np.asarray(a, dtype=np.float64), np.shape(x)).astype(np.float64)
    x = np.asarray(x, dtype=np.float64)
    out = np.ones(x.shape)
    pos = x > 0.0
    ser = pos & (x < a + 1.0)
    cf = pos & ~ser

    if np.any(ser):
        aa, xx = a[ser], x[ser]
        term = 1.0 / aa
        total = term.copy()
        ap = aa.copy()
        active = np.ones(aa.shape, dtype=bool)
        for _ in range(_MAXITER):
            ap = ap + active
            term = np.where(active, term * xx / ap, term)
            total = np.where(active, total + term, total)
            active &= ~(np.abs(term) < np.abs(total) * _EPS)
            if not active.any():
                break
        lg = np.array([math.lgamma(v) for v in aa.ravel()]).reshape(aa.shape)
        out[ser] = 1.0 - total * np.exp(-xx + aa * np.log(xx) - lg)

    if np.any(cf):
        aa, xx = a[cf], x[cf]
        b = xx + 1.0 - aa
        c = np.full(aa.shape, 1.0 / _TINY)
        d = 1.0 / b
        h = d.copy()
        active = np.ones(aa.shape, dtype=bool)
        for i in range(1, _MAXITER):
            an = -i * (i - aa)
            b = b + 2.0
            dn = an * d + b
            dn = np.where(np.abs(dn) < _TINY, _TINY, dn)
            cn = b + an / c
            cn = np.where(np.abs(cn) < _TINY, _TINY, cn)
            dn = 1.0 / dn
            delta = dn * cn
            d = np.where(active, dn, d)
            c = np.where(active, cn, c)
            h = np.where(active, h * delta, h)
            active &= ~(np.abs(delta - 1.0) < _EPS)
            if not active.any():
                break
        lg = np.array([math.lgamma(v) for v in aa.ravel()]).reshape(aa.shape)
        out[cf] = np.exp(-xx + aa * np.log(xx) - lg) * h

    return np.clip(out, 0.0, 1.0)


def chi2_sf_array(x, dof):
    return gammaincc_array(0.5 * dof, 0.5 * np.asarray(x, dtype=np.float64))
