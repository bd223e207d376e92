"""Quantitative quality measures: equivalent number of looks and SSIM."""
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRange, DimensionMismatch, DomainError, ZeroVariance

CHANNELS = {"hh": 0, "hv": 1, "vv": 2}


@dataclass(frozen=True)
class RegionOfInterest:
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.w < 1 or self.h < 1 or self.w * self.h < 2:
            raise DomainError("region must have area >= 2")
        if self.x < 0 or self.y < 0:
            raise DomainError("region origin must be nonnegative")

    def check_inside(self, width, height):
        if self.x + self.w > width or self.y + self.h > height:
            raise DomainError(f"region {self} exceeds {width}x{height} image")

    @property
    def slices(self):
        return slice(self.y, self.y + self.h), slice(self.x, self.x + self.w)


def channel_extract(image, channel):
    """Intensity channel ("hh", "hv" or "vv") as a (height, width) array."""
    try:
        k = CHANNELS[channel.lower()]
    except KeyError:
        raise DomainError(f"unknown channel {channel!r}") from None
    return image.data[:, :, k].copy()


def enl(intensity, roi):
    """Moment estimate mean^2 / variance of an intensity array over ``roi``."""
    intensity = np.asarray(intensity, dtype=np.float64)
    roi.check_inside(intensity.shape[1], intensity.shape[0])
    values = intensity[roi.slices]
    var = values.var(ddof=1)
    if not var >= 1e-300:
        raise ZeroVariance("region has zero variance")
    return float(values.mean() ** 2 / var)


def _ssim_terms(f, g, c1, c2, c3):
    mf, mg = f.mean(), g.mean()
    df, dg = f - mf, g - mg
    n = f.size - 1
    vf = np.dot(df, df) / n
    vg = np.dot(dg, dg) / n
    cov = np.dot(df, dg) / n
    sfg = np.sqrt(vf * vg)
    return ((cov + c1) / (sfg + c1)
            * (2.0 * mf * mg + c2) / (mf * mf + mg * mg + c2)
            * (2.0 * sfg + c3) / (vf + vg + c3))


def ssim(f, g, block=8, k1=0.01, k2=0.03):
    """Mean SSIM over non-overlapping ``block x block`` tiles.

    ``f`` is the reference; its dynamic range sets the stabilizing constants.
    Trailing rows and columns that do not fill a tile are dropped.
    """
    f = np.asarray(f, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if f.shape != g.shape or f.ndim != 2:
        raise DimensionMismatch(f"shapes {f.shape} and {g.shape} differ")
    if block < 1 or block > min(f.shape):
        raise DimensionMismatch(f"block {block} does not fit a {f.shape} image")
    rng = float(f.max() - f.min())
    if not rng > 0.0:
        raise DegenerateRange("reference image has zero dynamic range")
    c1 = (k1 * rng) ** 2
    c2 = (k2 * rng) ** 2
    c3 = c2 / 2.0
    ny, nx = f.shape[0] // block, f.shape[1] // block
    total = 0.0
    for i in range(ny):
        for j in range(nx):
            tile = (slice(i * block, (i + 1) * block), slice(j * block, (j + 1) * block))
            total += _ssim_terms(f[tile].ravel(), g[tile].ravel(), c1, c2, c3)
    return float(total / (ny * nx))


def ssim_polsar(f, g, block=8):
    """Mean of the HH, HV and VV channel SSIMs of two PolSAR images."""
    if f.data.shape != g.data.shape:
        raise DimensionMismatch("images differ in size")
    return float(np.mean([ssim(f.data[:, :, k], g.data[:, :, k], block) for k in range(3)]))
