"""Stochastic-distances nonlocal means (SDNLM) and Boxcar filters.

Each output pixel is a weighted mean of the center pixels of a
``center_window x center_window`` grid. A neighbor's weight comes from the
p-value of a Hellinger test between its ``patch_side x patch_side`` patch and
the patch of the filtered pixel, passed through a soft threshold. With the
defaults (5x5 centers, 3x3 patches) the patches jointly cover a 7x7 search
area.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _jit
from ._kernels import compute_stats, filter_image, weight
from .divergence import CommonLooks, PerPatchLooks, degrees_of_freedom, patch_test
from .errors import DegenerateSample, DomainError
from .hermitian import unpack
from .image import PolSARImage

log = logging.getLogger(__name__)

BORDER_POLICIES = ("reflect",)


@dataclass(frozen=True)
class FilterConfig:
    """SDNLM settings.

    ``eta`` is the confidence level of the patch tests, as in "SDNLM 90%";
    the weight ramp runs at significance ``1 - eta``, so a larger ``eta``
    accepts more neighbors and smooths more.
    """

    eta: float = 0.90
    center_window: int = 5
    patch_side: int = 3
    looks_mode: object = field(default_factory=PerPatchLooks)
    iterations: int = 1
    border_policy: str = "reflect"

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise DomainError(f"eta must lie in (0, 1), got {self.eta}")
        if self.center_window < 3 or self.center_window % 2 == 0:
            raise DomainError(f"center_window must be odd and >= 3, got {self.center_window}")
        if self.patch_side < 1 or self.patch_side % 2 == 0:
            raise DomainError(f"patch_side must be odd and >= 1, got {self.patch_side}")
        if self.iterations < 1:
            raise DomainError("iterations must be >= 1")
        if self.border_policy not in BORDER_POLICIES:
            raise DomainError(f"unknown border policy {self.border_policy!r}")
        if not isinstance(self.looks_mode, (CommonLooks, PerPatchLooks)):
            raise DomainError(f"unknown looks mode {self.looks_mode!r}")

    @property
    def significance(self):
        return 1.0 - self.eta

    @property
    def pad(self):
        return self.center_window // 2 + self.patch_side // 2


def weight_function(p, eta):
    """1 above ``eta``, linear ramp on ``(eta/2, eta)``, 0 below (``eta`` is a significance)."""
    return float(weight(float(p), float(eta)))


def _pad(data, pad):
    return np.pad(data, ((pad, pad), (pad, pad), (0, 0)), mode="reflect")


def _bands(height, workers):
    n = max(1, min(int(workers), height))
    edges = np.linspace(0, height, n + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _runner(workers):
    if workers <= 1:
        return lambda job, bands: [job(b) for b in bands]

    def run(job, bands):
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(job, bands))

    return run


def _sdnlm_once(data, config, workers, use_numba):
    pad = config.pad
    P = _pad(data, pad)
    common = float(config.looks_mode.looks) if isinstance(config.looks_mode, CommonLooks) else 0.0
    runner = _runner(workers)
    st = compute_stats(P, config.patch_side, common, _bands(P.shape[0], workers), runner, use_numba)
    out = np.empty_like(data)
    degenerate = filter_image(P, st, pad, config.center_window, config.patch_side ** 2,
                              degrees_of_freedom(config.looks_mode), config.significance,
                              out, _bands(data.shape[0], workers), runner, use_numba)
    if degenerate:
        log.info("%d neighbor tests were degenerate and got weight 0", degenerate)
    return out


def sdnlm(image, config=FilterConfig(), workers=1, backend=None):
    """Filter ``image`` with SDNLM, ``config.iterations`` times.

    Each iteration re-estimates everything from the previous iterate. Rows are
    split into bands across ``workers`` threads; output does not depend on the
    split. ``backend`` is "numba" or "numpy" (default: numba when available).
    """
    use_numba = _use_numba(backend)
    data = image.data
    for _ in range(config.iterations):
        data = _sdnlm_once(data, config, workers, use_numba)
    return PolSARImage(data, image.nominal_looks)


def _use_numba(backend):
    if backend is None:
        return _jit.HAVE_NUMBA
    if backend == "numba":
        if not _jit.HAVE_NUMBA:
            raise RuntimeError("numba backend requested but disabled or unavailable")
        return True
    if backend == "numpy":
        return False
    raise ValueError(f"unknown backend {backend!r}")


def _patch(P, cx, cy, r):
    return P[cy - r:cy + r + 1, cx - r:cx + r + 1].reshape(-1, 9)


def weight_mask(image, x, y, config=FilterConfig()):
    """Normalized ``center_window x center_window`` weights used at pixel (x, y).

    Each neighbor is tested through ``patch_test``; degenerate tests count as
    rejections. The center carries weight 1 before normalization.
    """
    if not (0 <= x < image.width and 0 <= y < image.height):
        raise DomainError(f"pixel ({x}, {y}) outside {image.width}x{image.height} image")
    pad = config.pad
    R = config.center_window // 2
    r = config.patch_side // 2
    P = _pad(image.data, pad)
    cx, cy = x + pad, y + pad
    centre = unpack(_patch(P, cx, cy, r))
    mask = np.zeros((config.center_window, config.center_window))
    for dy in range(-R, R + 1):
        for dx in range(-R, R + 1):
            if dy == 0 and dx == 0:
                mask[R, R] = 1.0
                continue
            other = unpack(_patch(P, cx + dx, cy + dy, r))
            try:
                res = patch_test(centre, other, config.looks_mode)
            except (DegenerateSample, DomainError) as exc:
                log.debug("neighbor (%d, %d) of (%d, %d) rejected: %s", dx, dy, x, y, exc)
                continue
            mask[R + dy, R + dx] = weight_function(res.p_value, config.significance)
    return mask / mask.sum()


def filter_pixel(image, x, y, config=FilterConfig()):
    """Filtered value at pixel (x, y), computed test by test through ``patch_test``.

    Slow reference path for a single pixel; ``sdnlm`` computes the same
    quantity for every pixel with batched kernels. Returns a packed 9-vector.
    """
    mask = weight_mask(image, x, y, config)
    R = config.center_window // 2
    P = _pad(image.data, R)
    block = P[y:y + 2 * R + 1, x:x + 2 * R + 1]
    centre = image.data[y, x]
    return centre + np.einsum("ij,ijk->k", mask, block - centre)


def boxcar(image, window=5, iterations=1):
    """Moving average over ``window x window`` neighborhoods, mirror-reflected at borders."""
    if window < 3 or window % 2 == 0:
        raise DomainError(f"window must be odd and >= 3, got {window}")
    R = window // 2
    data = image.data
    for _ in range(iterations):
        P = _pad(data, R)
        h, w = data.shape[:2]
        acc = np.zeros_like(data)
        for dy in range(window):
            for dx in range(window):
                acc += P[dy:dy + h, dx:dx + w] - data
        data = data + acc / (window * window)
    return PolSARImage(data, image.nominal_looks)
