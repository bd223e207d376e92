"""Scaled complex Wishart model: density, score, ML estimation and sampling."""
import math
from dataclasses import dataclass

import numpy as np

from ._jit import njit
from .errors import DegenerateSample, DomainError
from .hermitian import (
    det_packed,
    hermitian_det,
    hermitian_inv,
    is_pd_packed,
    is_positive_definite,
    pack,
    py,
    unpack,
)
from .special import digamma, digamma_array

L_MIN = 2.2
L_MAX = 120.0
ROOT_XTOL = 1e-12
ROOT_MAXITER = 200


@dataclass(frozen=True)
class WishartParams:
    """Scale matrix (3x3 complex Hermitian PD) and number of looks.

    ``clamped`` is set by ``ml_estimate`` when the looks equation had no root
    inside ``[L_MIN, L_MAX]``.
    """

    sigma: np.ndarray
    looks: float
    clamped: bool = False

    def __post_init__(self):
        sigma = np.asarray(self.sigma)
        if sigma.shape == (9,):
            sigma = unpack(sigma)
        object.__setattr__(self, "sigma", np.array(sigma, dtype=np.complex128))
        if self.sigma.shape != (3, 3):
            raise DomainError(f"sigma must be 3x3, got {self.sigma.shape}")
        if not self.looks > 0:
            raise DomainError(f"looks must be positive, got {self.looks}")


def _check_pd(m, what):
    if not is_positive_definite(m):
        raise DomainError(f"{what} is not positive definite")


def log_multigamma3(looks):
    """log of pi^3 * prod_{i=0..2} Gamma(L - i)."""
    return 3.0 * math.log(math.pi) + sum(math.lgamma(looks - i) for i in range(3))


def wishart_log_density(z, params):
    """Log-density of the scaled complex Wishart law at ``z``."""
    L = float(params.looks)
    if L - 2.0 <= 0.0:
        raise DomainError(f"looks must exceed 2 for a finite normalizer, got {L}")
    _check_pd(z, "z")
    _check_pd(params.sigma, "sigma")
    z = np.asarray(z)
    tr = np.trace(hermitian_inv(params.sigma) @ z).real
    return (3.0 * L * math.log(L)
            + (L - 3.0) * math.log(hermitian_det(z))
            - L * math.log(hermitian_det(params.sigma))
            - log_multigamma3(L)
            - L * tr)


def wishart_score(z, params):
    """Gradient of the log-likelihood.

    Returns ``(sigma_gradient, looks_gradient)``; ``sigma_gradient`` is the
    Hermitian matrix ``L (S^-1 z S^-1 - S^-1)``. For a Hermitian perturbation
    ``E`` the directional derivative is ``tr(sigma_gradient @ E)``.
    """
    L = float(params.looks)
    if L - 2.0 <= 0.0:
        raise DomainError(f"looks must exceed 2, got {L}")
    _check_pd(z, "z")
    _check_pd(params.sigma, "sigma")
    z = np.asarray(z, dtype=np.complex128)
    s_inv = hermitian_inv(params.sigma)
    grad = L * (s_inv @ z @ s_inv - s_inv)
    grad = 0.5 * (grad + grad.conj().T)
    looks_grad = (3.0 * (math.log(L) + 1.0)
                  + math.log(hermitian_det(z))
                  - math.log(hermitian_det(params.sigma))
                  - sum(digamma(L - j) for j in range(3))
                  - np.trace(s_inv @ z).real)
    return grad, float(looks_grad)


@njit
def looks_equation(L, c):
    """Left side of the ML looks equation; ``c`` = mean log|Z_r| - log|mean Z|."""
    return 3.0 * math.log(L) + c - digamma(L) - digamma(L - 1.0) - digamma(L - 2.0)


@njit
def _brent(c, a, b, fa, fb):
    # Brent's zeroin on looks_equation(., c) over [a, b] with fa * fb < 0
    fc = fb
    cc = b
    d = b - a
    e = d
    for _ in range(ROOT_MAXITER):
        if (fb > 0.0) == (fc > 0.0):
            cc = a
            fc = fa
            d = b - a
            e = d
        if abs(fc) < abs(fb):
            a = b
            b = cc
            cc = a
            fa = fb
            fb = fc
            fc = fa
        tol = 2.0 * 2.2e-16 * abs(b) + 0.5 * ROOT_XTOL
        m = 0.5 * (cc - b)
        if abs(m) <= tol or fb == 0.0:
            return b
        if abs(e) >= tol and abs(fa) > abs(fb):
            s = fb / fa
            if a == cc:
                p = 2.0 * m * s
                q = 1.0 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0))
                q = (q - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0.0:
                q = -q
            else:
                p = -p
            if 2.0 * p < min(3.0 * m * q - abs(tol * q), abs(e * q)):
                e = d
                d = p / q
            else:
                d = m
                e = m
        else:
            d = m
            e = m
        a = b
        fa = fb
        if abs(d) > tol:
            b += d
        elif m > 0.0:
            b += tol
        else:
            b -= tol
        fb = looks_equation(b, c)
    return b


@njit
def solve_looks(c):
    """Root of the looks equation on [L_MIN, L_MAX]; returns (looks, clamped)."""
    if math.isnan(c):
        return L_MIN, True
    if math.isinf(c):
        # c -> -inf drives the root to the lower end, c -> +inf to the upper
        return (L_MIN, True) if c < 0.0 else (L_MAX, True)
    fa = looks_equation(L_MIN, c)
    fb = looks_equation(L_MAX, c)
    if fa == 0.0:
        return L_MIN, False
    if fb == 0.0:
        return L_MAX, False
    if (fa > 0.0) == (fb > 0.0):
        return (L_MIN, True) if abs(fa) <= abs(fb) else (L_MAX, True)
    return _brent(c, L_MIN, L_MAX, fa, fb), False


def solve_looks_array(c, iters=60):
    """Vectorized bisection twin of ``solve_looks`` (the equation is decreasing in L)."""
    c = np.asarray(c, dtype=np.float64)

    def g(L):
        return (3.0 * np.log(L) + c - digamma_array(L) - digamma_array(L - 1.0)
                - digamma_array(L - 2.0))

    with np.errstate(invalid="ignore"):
        fa = g(np.full(c.shape, L_MIN))
        fb = g(np.full(c.shape, L_MAX))
    lo = np.full(c.shape, L_MIN)
    hi = np.full(c.shape, L_MAX)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        pos = g(mid) > 0.0
        lo = np.where(pos, mid, lo)
        hi = np.where(pos, hi, mid)
    looks = 0.5 * (lo + hi)
    same = (fa > 0.0) == (fb > 0.0)
    end = np.where(np.abs(fa) <= np.abs(fb), L_MIN, L_MAX)
    end = np.where(np.isneginf(c) | np.isnan(c), L_MIN, np.where(np.isposinf(c), L_MAX, end))
    clamped = same | ~np.isfinite(c)
    return np.where(clamped, end, looks), clamped


def _as_sample(sample):
    arr = np.asarray(sample)
    if arr.ndim == 2 and arr.shape == (3, 3):
        arr = arr[None]
    if arr.shape[-2:] == (3, 3):
        arr = pack(arr)
    if arr.ndim != 2 or arr.shape[1] != 9 or arr.shape[0] == 0:
        raise DegenerateSample("sample must be a nonempty list of 3x3 matrices")
    return arr.astype(np.float64, copy=False)


def mean_log_det(packed):
    """Mean of log|Z_r| over a packed (N, 9) sample; -inf if any Z_r is singular."""
    stack = np.moveaxis(packed, -1, 0)
    det = py(det_packed)(stack)
    ok = py(is_pd_packed)(stack, det)
    if not np.all(ok):
        return -math.inf
    return float(np.mean(np.log(det)))


def ml_estimate(sample):
    """Maximum-likelihood (sigma, looks) of an i.i.d. Wishart sample.

    sigma is the sample mean; looks solves the ML looks equation with Brent's
    method on ``[L_MIN, L_MAX]``, clamping (``clamped=True``) when there is
    no sign change. Singular observations (e.g. single-look rank-1 matrices)
    make the mean log-determinant -inf, which clamps looks to ``L_MIN``.
    """
    packed = _as_sample(sample)
    mean = packed.mean(axis=0)
    det_mean = float(det_packed(mean))
    if not is_pd_packed(mean, det_mean):
        raise DegenerateSample(f"sample mean is not positive definite (det={det_mean:.3e})")
    c = mean_log_det(packed) - math.log(det_mean)
    looks, clamped = solve_looks(c)
    return WishartParams(unpack(mean), float(looks), bool(clamped))


def _cholesky(sigma):
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise DomainError("sigma is not positive definite") from exc


def sample_wishart(params, rng_seed=None, size=None):
    """Draw multilook covariance matrices ``(1/L) sum Y Y^H`` with ``Y ~ CN(0, sigma)``.

    ``params.looks`` must be a positive integer. Returns one (3, 3) matrix when
    ``size`` is None, else an array of shape ``(size, 3, 3)``.
    """
    L = params.looks
    if float(L) != int(L) or int(L) < 1:
        raise DomainError(f"sampling needs a positive integer number of looks, got {L}")
    L = int(L)
    if not is_positive_definite(params.sigma):
        raise DomainError("sigma is not positive definite")
    chol = _cholesky(params.sigma)
    rng = np.random.default_rng(rng_seed)
    n = 1 if size is None else int(size)
    w = (rng.standard_normal((n, L, 3)) + 1j * rng.standard_normal((n, L, 3))) / math.sqrt(2.0)
    y = w @ chol.T
    z = np.einsum("nli,nlj->nij", y, y.conj()) / L
    return z[0] if size is None else z
