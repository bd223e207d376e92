"""Closed-form kernels for 3x3 Hermitian matrices.

Matrices are stored packed as nine reals in the order
``c11, c22, c33, re c12, im c12, re c13, im c13, re c23, im c23``.
The kernels index ``c[0]..c[8]`` only, so the same source runs on a single
packed vector (compiled path) and on channel-first stacks ``(9, ...)``
(numpy path, via ``py_func``).
"""
import numpy as np

from ._jit import njit
from .errors import SingularMatrix

DET_EPSILON = 1e-300
# near-singular when det <= REL_EPSILON * c11 * c22 * c33 (Hadamard ratio)
REL_EPSILON = 1e-12

_UPPER = ((0, 1), (0, 2), (1, 2))


def py(f):
    """Uncompiled body of a kernel, for use on numpy stacks."""
    return getattr(f, "py_func", f)


@njit
def det_packed(c):
    a, d, f = c[0], c[1], c[2]
    br, bi, cr, ci, er, ei = c[3], c[4], c[5], c[6], c[7], c[8]
    # Re(b * e * conj(c))
    be_r = br * er - bi * ei
    be_i = br * ei + bi * er
    triple = be_r * cr + be_i * ci
    return (a * d * f + 2.0 * triple
            - a * (er * er + ei * ei)
            - d * (cr * cr + ci * ci)
            - f * (br * br + bi * bi))


@njit
def inv_packed(c, det):
    """Inverse via the adjugate; returns the nine packed entries."""
    a, d, f = c[0], c[1], c[2]
    br, bi, cr, ci, er, ei = c[3], c[4], c[5], c[6], c[7], c[8]
    i11 = (d * f - (er * er + ei * ei)) / det
    i22 = (a * f - (cr * cr + ci * ci)) / det
    i33 = (a * d - (br * br + bi * bi)) / det
    # (c conj(e) - b f) / det
    i12r = (cr * er + ci * ei - br * f) / det
    i12i = (ci * er - cr * ei - bi * f) / det
    # (b e - c d) / det
    i13r = (br * er - bi * ei - cr * d) / det
    i13i = (br * ei + bi * er - ci * d) / det
    # (c conj(b) - a e) / det
    i23r = (cr * br + ci * bi - a * er) / det
    i23i = (ci * br - cr * bi - a * ei) / det
    return i11, i22, i33, i12r, i12i, i13r, i13i, i23r, i23i


@njit
def trace_product(a, z):
    """tr(A Z) for Hermitian A, Z (real by symmetry)."""
    return (a[0] * z[0] + a[1] * z[1] + a[2] * z[2]
            + 2.0 * (a[3] * z[3] + a[4] * z[4]
                     + a[5] * z[5] + a[6] * z[6]
                     + a[7] * z[7] + a[8] * z[8]))


@njit
def is_pd_packed(c, det):
    """Numerical positive-definiteness test given the precomputed determinant."""
    minor = c[0] * c[1] - (c[3] * c[3] + c[4] * c[4])
    return ((c[0] > 0.0) & (minor > 0.0) & (det > DET_EPSILON)
            & (det > REL_EPSILON * c[0] * c[1] * c[2]))


def pack(m):
    """(..., 3, 3) complex Hermitian -> (..., 9) float64 (upper triangle)."""
    m = np.asarray(m)
    out = np.empty(m.shape[:-2] + (9,))
    out[..., 0] = m[..., 0, 0].real
    out[..., 1] = m[..., 1, 1].real
    out[..., 2] = m[..., 2, 2].real
    for k, (i, j) in enumerate(_UPPER):
        out[..., 3 + 2 * k] = m[..., i, j].real
        out[..., 4 + 2 * k] = m[..., i, j].imag
    return out


def unpack(p):
    """(..., 9) packed -> (..., 3, 3) complex Hermitian."""
    p = np.asarray(p, dtype=np.float64)
    m = np.zeros(p.shape[:-1] + (3, 3), dtype=np.complex128)
    for i in range(3):
        m[..., i, i] = p[..., i]
    for k, (i, j) in enumerate(_UPPER):
        v = p[..., 3 + 2 * k] + 1j * p[..., 4 + 2 * k]
        m[..., i, j] = v
        m[..., j, i] = np.conj(v)
    return m


def _as_packed(m):
    m = np.asarray(m)
    if m.shape[-2:] == (3, 3):
        return pack(m)
    if m.shape[-1] == 9:
        return m.astype(np.float64, copy=False)
    raise ValueError(f"expected a 3x3 matrix or packed 9-vector, got shape {m.shape}")


def hermitian_det(m):
    """Real determinant of a 3x3 Hermitian matrix (closed-form expansion)."""
    p = _as_packed(m)
    return float(det_packed(p)) if p.ndim == 1 else py(det_packed)(np.moveaxis(p, -1, 0))


def hermitian_inv(m):
    """Inverse of a 3x3 Hermitian positive-definite matrix.

    Raises SingularMatrix when the determinant is at or below ``DET_EPSILON``.
    """
    p = _as_packed(m)
    det = hermitian_det(p)
    if not np.all(det > DET_EPSILON):
        raise SingularMatrix(f"determinant {np.min(det):.3e} <= {DET_EPSILON:g}")
    if p.ndim == 1:
        inv = np.array(inv_packed(p, det))
    else:
        inv = np.stack(py(inv_packed)(np.moveaxis(p, -1, 0), det), axis=-1)
    return unpack(inv)


def is_positive_definite(m):
    p = _as_packed(m)
    det = hermitian_det(p)
    if p.ndim == 1:
        return bool(is_pd_packed(p, det))
    return py(is_pd_packed)(np.moveaxis(p, -1, 0), det)


def is_psd(m, rtol=1e-12):
    """Eigenvalue test: every eigenvalue >= -rtol * trace."""
    m = unpack(_as_packed(m))
    w = np.linalg.eigvalsh(m)
    tr = np.trace(m, axis1=-2, axis2=-1).real
    return np.all(w >= -rtol * np.abs(tr)[..., None], axis=-1)
