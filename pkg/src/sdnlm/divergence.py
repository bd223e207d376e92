"""Stochastic-distance tests between two estimated Wishart laws.

Only the Hellinger member of the h-phi family is shipped. Other distances plug
in through ``DISTANCES``: a kernel returning the symmetrized distance scaled by
``2mn / ((m+n) h'(0) phi''(1))``.
"""
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from ._jit import njit
from .errors import DegenerateSample, DomainError
from .hermitian import det_packed, hermitian_det, inv_packed, is_pd_packed, pack
from .special import chi2_sf
from .wishart import WishartParams, ml_estimate


@dataclass(frozen=True)
class CommonLooks:
    """All samples share a known number of looks; only sigma is estimated."""

    looks: float

    def __post_init__(self):
        if not self.looks > 0:
            raise DomainError(f"looks must be positive, got {self.looks}")


@dataclass(frozen=True)
class PerPatchLooks:
    """Sigma and looks are both estimated on every patch."""


LooksMode = Union[CommonLooks, PerPatchLooks]


def degrees_of_freedom(mode):
    # 9 real parameters of a Hermitian 3x3 sigma, plus looks when estimated
    return 9 if isinstance(mode, CommonLooks) else 10


@dataclass(frozen=True)
class SamplePair:
    left: WishartParams
    right: WishartParams
    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise DomainError("sample sizes must be >= 1")


@dataclass(frozen=True)
class TestResult:
    statistic: float
    dof: int
    p_value: float

    __test__ = False  # not a pytest class


@njit
def _det9(a, d, f, br, bi, cr, ci, er, ei):
    be_r = br * er - bi * ei
    be_i = br * ei + bi * er
    return (a * d * f + 2.0 * (be_r * cr + be_i * ci)
            - a * (er * er + ei * ei) - d * (cr * cr + ci * ci) - f * (br * br + bi * bi))


@njit
def _det_mix(p, wp, q, wq):
    return _det9(wp * p[0] + wq * q[0], wp * p[1] + wq * q[1], wp * p[2] + wq * q[2],
                 wp * p[3] + wq * q[3], wp * p[4] + wq * q[4], wp * p[5] + wq * q[5],
                 wp * p[6] + wq * q[6], wp * p[7] + wq * q[7], wp * p[8] + wq * q[8])


@njit
def _same(p, q):
    for k in range(9):
        if p[k] != q[k]:
            return False
    return True


@njit
def hellinger_log_affinity(inv1, logdet1, looks1, inv2, logdet2, looks2):
    """Log of the Hellinger affinity between W(S1, L1) and W(S2, L2).

    Takes packed inverses and log-determinants of the scale matrices. Uses the
    common-looks form with exponent (L1+L2)/2 when min(L1, L2) < 3. Returns
    NaN when the mixed precision matrix is not positive definite.
    """
    if looks1 == looks2 and logdet1 == logdet2 and _same(inv1, inv2):
        return 0.0
    half = 0.5 * (looks1 + looks2)
    if min(looks1, looks2) < 3.0:
        det = _det_mix(inv1, 0.5, inv2, 0.5)
        if not det > 0.0:
            return math.nan
        return half * (-math.log(det) - 0.5 * (logdet1 + logdet2))
    det = _det_mix(inv1, 0.5 * looks1, inv2, 0.5 * looks2)
    if not det > 0.0:
        return math.nan
    out = (-half * math.log(det)
           - 0.5 * (looks1 * logdet1 + looks2 * logdet2)
           + 1.5 * (looks1 * math.log(looks1) + looks2 * math.log(looks2)))
    for q in range(3):
        out += math.lgamma(half - q) - 0.5 * (math.lgamma(looks1 - q) + math.lgamma(looks2 - q))
    return out


@njit
def hellinger_from_log_affinity(log_aff, m, n):
    aff = min(math.exp(log_aff), 1.0)
    return max(8.0 * m * n / (m + n) * (1.0 - aff), 0.0)


def _prepare(params):
    p = pack(params.sigma)
    det = float(det_packed(p))
    if not is_pd_packed(p, det):
        raise DomainError("scale matrix is not positive definite")
    return np.array(inv_packed(p, det)), math.log(det)


def hellinger_statistic(pair):
    """Scaled Hellinger test statistic ``8mn/(m+n) (1 - affinity)``, clamped at 0."""
    l1, l2 = float(pair.left.looks), float(pair.right.looks)
    if min(l1, l2) >= 3.0 and 0.5 * (l1 + l2) - 2.0 <= 0.0:
        raise DomainError("Gamma argument (L1+L2)/2 - 2 must be positive")
    inv1, ld1 = _prepare(pair.left)
    inv2, ld2 = _prepare(pair.right)
    log_aff = hellinger_log_affinity(inv1, ld1, l1, inv2, ld2, l2)
    if math.isnan(log_aff):
        raise DomainError("mixed precision matrix is not positive definite")
    return float(hellinger_from_log_affinity(log_aff, float(pair.m), float(pair.n)))


DISTANCES = {"hellinger": hellinger_statistic}


def chi2_upper_tail(x, dof):
    """Pr(chi2_dof > x), via the regularized upper incomplete gamma function."""
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x}")
    return float(chi2_sf(float(x), float(dof)))


def _estimate(sample, mode):
    if isinstance(mode, CommonLooks):
        arr = np.asarray(sample)
        if arr.ndim == 2:
            arr = arr[None]
        if arr.shape[0] == 0:
            raise DegenerateSample("empty sample")
        mean = arr.mean(axis=0)
        if not np.all(np.isfinite(mean)) or hermitian_det(mean) <= 0:
            raise DegenerateSample("sample mean is not positive definite")
        p = pack(mean)
        if not is_pd_packed(p, det_packed(p)):
            raise DegenerateSample("sample mean is not positive definite")
        return WishartParams(mean, mode.looks), arr.shape[0]
    params = ml_estimate(sample)
    return params, len(sample)


def patch_test(left_sample, right_sample, mode=PerPatchLooks(), distance="hellinger"):
    """Test equality of the Wishart laws behind two samples of covariance matrices."""
    left, m = _estimate(left_sample, mode)
    right, n = _estimate(right_sample, mode)
    stat = DISTANCES[distance](SamplePair(left, right, m, n))
    dof = degrees_of_freedom(mode)
    return TestResult(stat, dof, chi2_upper_tail(stat, dof))
