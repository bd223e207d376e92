"""Per-iteration SDNLM kernels: patch statistics and weighted averaging.

Both backends work on a mirror-padded raster ``P`` of shape (Hp, Wp, 9).
Row bands ``[y0, y1)`` are independent, so bands can run on separate threads
and the result does not depend on how rows are split. Weighted means are
accumulated as ``Z1 + sum w (Zi - Z1) / sum w`` so identical neighbors leave
the center value bit-exact.
"""
import math

import numpy as np
from scipy.special import gammaln

from ._jit import njit
from .divergence import _det_mix, hellinger_from_log_affinity, hellinger_log_affinity
from .hermitian import det_packed, inv_packed, is_pd_packed, py
from .special import chi2_sf, chi2_sf_array
from .wishart import solve_looks, solve_looks_array


@njit
def weight(p, eta):
    """Soft-threshold weight of a p-value at significance ``eta``."""
    if p >= eta:
        return 1.0
    if p > 0.5 * eta:
        return 2.0 / eta * p - 1.0
    return 0.0


def weight_array(p, eta):
    return np.where(p >= eta, 1.0, np.where(p > 0.5 * eta, 2.0 / eta * p - 1.0, 0.0))


def pixel_log_det(P):
    """log|Z| per pixel, -inf where the pixel is numerically singular."""
    stack = np.moveaxis(P, -1, 0)
    det = py(det_packed)(stack)
    ok = py(is_pd_packed)(stack, det)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(ok, np.log(np.where(ok, det, 1.0)), -np.inf)


class PatchStats:
    """Per-center ML estimates over ``side x side`` patches of the padded raster."""

    def __init__(self, shape):
        hp, wp = shape
        self.mean = np.zeros((hp, wp, 9))
        self.inv = np.zeros((hp, wp, 9))
        self.logdet = np.zeros((hp, wp))
        self.looks = np.zeros((hp, wp))
        self.ok = np.zeros((hp, wp), dtype=np.bool_)


@njit
def _stats_rows_nb(P, pld, side, common_looks, y0, y1, mean, inv, logdet, looks, ok):
    r = side // 2
    wp = P.shape[1]
    inv_n = 1.0 / (side * side)
    acc = np.empty(9)
    for cy in range(y0, y1):
        for cx in range(r, wp - r):
            for k in range(9):
                acc[k] = 0.0
            sld = 0.0
            for u in range(cy - r, cy + r + 1):
                for v in range(cx - r, cx + r + 1):
                    for k in range(9):
                        acc[k] += P[u, v, k]
                    sld += pld[u, v]
            for k in range(9):
                mean[cy, cx, k] = acc[k] * inv_n
            m = mean[cy, cx]
            det = det_packed(m)
            good = is_pd_packed(m, det)
            ok[cy, cx] = good
            if not good:
                continue
            iv = inv_packed(m, det)
            for k in range(9):
                inv[cy, cx, k] = iv[k]
            ld = math.log(det)
            logdet[cy, cx] = ld
            if common_looks > 0.0:
                looks[cy, cx] = common_looks
            else:
                looks[cy, cx] = solve_looks(sld * inv_n - ld)[0]


def _stats_rows_np(P, pld, side, common_looks, y0, y1, st):
    r = side // 2
    hp, wp = P.shape[:2]
    rows = slice(y0, y1)
    cols = slice(r, wp - r)
    acc = np.zeros((y1 - y0, wp - 2 * r, 9))
    sld = np.zeros((y1 - y0, wp - 2 * r))
    for du in range(-r, r + 1):
        for dv in range(-r, r + 1):
            acc += P[y0 + du:y1 + du, r + dv:wp - r + dv]
            sld += pld[y0 + du:y1 + du, r + dv:wp - r + dv]
    n = side * side
    mean = acc * (1.0 / n)
    m = np.moveaxis(mean, -1, 0)
    det = py(det_packed)(m)
    good = py(is_pd_packed)(m, det)
    safe_det = np.where(good, det, 1.0)
    inv = np.stack(py(inv_packed)(m, safe_det), axis=-1)
    ld = np.log(safe_det)
    if common_looks > 0.0:
        lk = np.full(ld.shape, common_looks)
    else:
        with np.errstate(invalid="ignore"):
            lk = solve_looks_array(sld * (1.0 / n) - ld)[0]
    st.mean[rows, cols] = mean
    st.ok[rows, cols] = good
    st.inv[rows, cols] = np.where(good[..., None], inv, 0.0)
    st.logdet[rows, cols] = np.where(good, ld, 0.0)
    st.looks[rows, cols] = np.where(good, lk, 0.0)


@njit
def _filter_rows_nb(P, mean, inv, logdet, looks, ok, pad, window, m, dof, eta,
                    y0, y1, out):
    R = window // 2
    w_out = out.shape[1]
    acc = np.empty(9)
    degenerate = 0
    for y in range(y0, y1):
        for x in range(w_out):
            cy = y + pad
            cx = x + pad
            for k in range(9):
                acc[k] = 0.0
            wsum = 0.0
            centre_ok = ok[cy, cx]
            for dy in range(-R, R + 1):
                for dx in range(-R, R + 1):
                    ny = cy + dy
                    nx = cx + dx
                    if dy == 0 and dx == 0:
                        w = 1.0
                    elif not (centre_ok and ok[ny, nx]):
                        degenerate += 1
                        w = 0.0
                    else:
                        la = hellinger_log_affinity(inv[cy, cx], logdet[cy, cx], looks[cy, cx],
                                                    inv[ny, nx], logdet[ny, nx], looks[ny, nx])
                        if math.isnan(la):
                            degenerate += 1
                            w = 0.0
                        else:
                            stat = hellinger_from_log_affinity(la, m, m)
                            w = weight(chi2_sf(stat, dof), eta)
                    if w > 0.0:
                        for k in range(9):
                            acc[k] += w * (P[ny, nx, k] - P[cy, cx, k])
                        wsum += w
            for k in range(9):
                out[y, x, k] = P[cy, cx, k] + acc[k] / wsum
    return degenerate


def _log_affinity_np(inv1, ld1, l1, inv2, ld2, l2):
    a = np.moveaxis(inv1, -1, 0)
    b = np.moveaxis(inv2, -1, 0)
    half = 0.5 * (l1 + l2)
    low = np.minimum(l1, l2) < 3.0
    det_low = py(_det_mix)(a, 0.5, b, 0.5)
    det_high = py(_det_mix)(a, 0.5 * l1, b, 0.5 * l2)
    det = np.where(low, det_low, det_high)
    bad = ~(det > 0.0)
    ldm = np.log(np.where(bad, 1.0, det))
    out_low = half * (-ldm - 0.5 * (ld1 + ld2))
    hl1 = np.where(low, 3.0, l1)
    hl2 = np.where(low, 3.0, l2)
    hh = 0.5 * (hl1 + hl2)
    out_high = (-hh * ldm - 0.5 * (hl1 * ld1 + hl2 * ld2)
                + 1.5 * (hl1 * np.log(hl1) + hl2 * np.log(hl2)))
    for q in range(3):
        out_high = out_high + gammaln(hh - q) - 0.5 * (gammaln(hl1 - q) + gammaln(hl2 - q))
    same = (l1 == l2) & (ld1 == ld2) & np.all(inv1 == inv2, axis=-1)
    return np.where(same, 0.0, np.where(bad, np.nan, np.where(low, out_low, out_high)))


def _filter_rows_np(P, st, pad, window, m, dof, eta, y0, y1, out):
    R = window // 2
    w_out = out.shape[1]
    cy = slice(y0 + pad, y1 + pad)
    cx = slice(pad, pad + w_out)
    acc = np.zeros((y1 - y0, w_out, 9))
    wsum = np.zeros((y1 - y0, w_out))
    c_ok = st.ok[cy, cx]
    degenerate = 0
    for dy in range(-R, R + 1):
        for dx in range(-R, R + 1):
            ny = slice(y0 + pad + dy, y1 + pad + dy)
            nx = slice(pad + dx, pad + w_out + dx)
            if dy == 0 and dx == 0:
                w = np.ones((y1 - y0, w_out))
            else:
                both = c_ok & st.ok[ny, nx]
                with np.errstate(invalid="ignore", divide="ignore"):
                    la = _log_affinity_np(st.inv[cy, cx], st.logdet[cy, cx], st.looks[cy, cx],
                                          st.inv[ny, nx], st.logdet[ny, nx], st.looks[ny, nx])
                valid = both & ~np.isnan(la)
                degenerate += int(np.count_nonzero(~valid))
                aff = np.minimum(np.exp(np.where(valid, la, 0.0)), 1.0)
                stat = np.maximum(8.0 * m * m / (m + m) * (1.0 - aff), 0.0)
                w = np.where(valid, weight_array(chi2_sf_array(stat, dof), eta), 0.0)
            pos = w > 0.0
            acc += np.where(pos[..., None], w[..., None] * (P[ny, nx] - P[cy, cx]), 0.0)
            wsum += np.where(pos, w, 0.0)
    out[y0:y1] = P[cy, cx] + acc / wsum[..., None]
    return degenerate


def compute_stats(P, side, common_looks, bands, runner, use_numba):
    st = PatchStats(P.shape[:2])
    pld = pixel_log_det(P)
    r = side // 2

    def job(band):
        y0, y1 = band
        y0, y1 = max(y0, r), min(y1, P.shape[0] - r)
        if y1 <= y0:
            return
        if use_numba:
            _stats_rows_nb(P, pld, side, common_looks, y0, y1,
                           st.mean, st.inv, st.logdet, st.looks, st.ok)
        else:
            _stats_rows_np(P, pld, side, common_looks, y0, y1, st)

    runner(job, bands)
    return st


def filter_image(P, st, pad, window, m, dof, eta, out, bands, runner, use_numba):
    counts = []

    def job(band):
        y0, y1 = band
        if use_numba:
            counts.append(_filter_rows_nb(P, st.mean, st.inv, st.logdet, st.looks, st.ok,
                                          pad, window, float(m), float(dof), eta, y0, y1, out))
        else:
            counts.append(_filter_rows_np(P, st, pad, window, float(m), float(dof), eta,
                                          y0, y1, out))

    runner(job, bands)
    return sum(counts)
