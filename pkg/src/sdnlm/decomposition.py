"""Pauli false-color rendering and Cloude-Pottier entropy/alpha decomposition."""
import csv
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .hermitian import unpack

# lexicographic covariance -> Pauli-basis coherency, T = U C U^H
_PAULI = np.array([[1.0, 0.0, 1.0],
                   [1.0, 0.0, -1.0],
                   [0.0, np.sqrt(2.0), 0.0]]) / np.sqrt(2.0)

# Entropy splits and per-band alpha splits (degrees) of the nine-zone plane.
# Ties go to the higher-numbered zone: H <= 0.5 is low entropy, alpha <= 42.5 is zone 9, ...
ENTROPY_SPLITS = (0.5, 0.9)
ZONE_TABLE = (
    # (max entropy, [(max alpha, zone), ...])
    (0.5, ((42.5, 9), (47.5, 8), (90.0, 7))),
    (0.9, ((40.0, 6), (50.0, 5), (90.0, 4))),
    (1.0, ((40.0, 3), (55.0, 2), (90.0, 1))),
)
ZONE_NAMES = {
    1: "high entropy multiple scattering",
    2: "high entropy vegetation scattering",
    3: "high entropy surface scatter (non-feasible)",
    4: "medium entropy multiple scattering",
    5: "medium entropy vegetation scattering",
    6: "medium entropy surface scatter",
    7: "low entropy multiple scattering",
    8: "low entropy dipole scattering",
    9: "low entropy surface scatter",
}


@dataclass(frozen=True)
class HAlphaPoint:
    entropy: float
    alpha: float
    zone: int


def halpha_zone(entropy, alpha):
    for h_max, bands in ZONE_TABLE:
        if entropy <= h_max or h_max == 1.0:
            for a_max, zone in bands:
                if alpha <= a_max or a_max == 90.0:
                    return zone
    raise AssertionError("unreachable")


def pauli_channels(image):
    """|HH+VV|^2, |HH-VV|^2 and 2|HV|^2 per pixel, shape (height, width, 3)."""
    d = image.data
    s = d[..., 0] + d[..., 2]
    x = 2.0 * d[..., 5]
    return np.stack([s + x, s - x, 2.0 * d[..., 1]], axis=-1)


def pauli_rgb(image, stretch=(1.0, 99.0)):
    """8-bit Pauli false color; each channel clipped at the given percentiles."""
    lo_pct, hi_pct = stretch
    if not 0.0 <= lo_pct < hi_pct <= 100.0:
        raise DomainError(f"invalid percentile stretch {stretch}")
    chans = np.maximum(pauli_channels(image), 0.0)
    out = np.zeros(chans.shape, dtype=np.uint8)
    for k in range(3):
        c = chans[..., k]
        lo, hi = np.percentile(c, [lo_pct, hi_pct])
        if hi > lo:
            scaled = (np.clip(c, lo, hi) - lo) / (hi - lo) * 255.0
            out[..., k] = np.rint(scaled).astype(np.uint8)
    return out


def to_coherency(z):
    """Pauli-basis coherency matrix (or stack) of lexicographic covariance ``z``."""
    z = np.asarray(z)
    if z.shape[-1] == 9:
        z = unpack(z)
    return _PAULI @ z @ _PAULI.T


def _entropy_alpha(t):
    t = np.asarray(t, dtype=np.complex128)
    tr = np.trace(t, axis1=-2, axis2=-1).real
    if np.any(~(tr > 0.0)):
        raise DomainError("coherency matrix must have positive trace")
    t = t / tr[..., None, None]
    lam, vec = np.linalg.eigh(t)
    lam = np.clip(lam[..., ::-1], 0.0, None)
    vec = vec[..., ::-1]
    p = lam / lam.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(p > 0.0, p * np.log(p), 0.0)
    entropy = np.clip(-plogp.sum(axis=-1) / np.log(3.0), 0.0, 1.0) + 0.0
    alphas = np.degrees(np.arccos(np.clip(np.abs(vec[..., 0, :]), 0.0, 1.0)))
    alpha = np.clip((p * alphas).sum(axis=-1), 0.0, 90.0)
    return entropy, alpha


def h_alpha_coherency(t):
    h, a = _entropy_alpha(t)
    h, a = float(h), float(a)
    return HAlphaPoint(h, a, halpha_zone(h, a))


def h_alpha(z):
    """Entropy, mean alpha angle (degrees) and zone of one covariance matrix."""
    return h_alpha_coherency(to_coherency(z))


def h_alpha_scatter(image, regions):
    """(label, HAlphaPoint) for every pixel of each labelled region.

    ``regions`` is a sequence of ``(label, RegionOfInterest)`` pairs.
    """
    rows = []
    for label, roi in regions:
        roi.check_inside(image.width, image.height)
        pix = image.data[roi.slices].reshape(-1, 9)
        h, a = _entropy_alpha(to_coherency(pix))
        rows.extend((label, HAlphaPoint(float(hh), float(aa), halpha_zone(hh, aa)))
                    for hh, aa in zip(h, a))
    return rows


def write_scatter_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["region", "H", "alpha_deg", "zone"])
        for label, pt in rows:
            w.writerow([label, repr(pt.entropy), repr(pt.alpha), pt.zone])
