"""Six-class Wishart phantom: bundled class matrices, stock layout, simulation."""
import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import DomainError
from .hermitian import is_positive_definite, pack
from .image import PolSARImage
from .wishart import WishartParams, sample_wishart

STOCK_SIZE = 496


def _matrix(entry, scale):
    m = np.zeros((3, 3), dtype=np.complex128)
    m[0, 0], m[1, 1], m[2, 2] = entry["c11"], entry["c22"], entry["c33"]
    for (i, j), key in (((0, 1), "c12"), ((0, 2), "c13"), ((1, 2), "c23")):
        m[i, j] = complex(*entry[key])
        m[j, i] = np.conj(m[i, j])
    return m * scale


def bundled_covariances():
    """The six bundled class covariance matrices, as (3, 3) complex arrays."""
    text = resources.files("sdnlm").joinpath("data/covariances.json").read_text()
    raw = json.loads(text)
    return [_matrix(e, raw["scale"]) for e in raw["classes"]]


@dataclass
class PhantomSpec:
    """Class-index raster (values 1..K) and one (sigma, looks) per class."""

    class_map: np.ndarray
    classes: list

    def __post_init__(self):
        self.class_map = np.asarray(self.class_map, dtype=np.int64)
        if self.class_map.ndim != 2 or self.class_map.size == 0:
            raise DomainError("class_map must be a nonempty 2-D raster")
        k = len(self.classes)
        if self.class_map.min() < 1 or self.class_map.max() > k:
            raise DomainError(f"class indices must lie in 1..{k}")
        for sigma, looks in self.classes:
            if not is_positive_definite(sigma):
                raise DomainError("class covariance is not positive definite")
            if int(looks) != looks or looks < 1:
                raise DomainError(f"class looks must be a positive integer, got {looks}")

    def mean_image(self):
        """Noise-free image holding each pixel's class covariance."""
        table = np.stack([pack(np.asarray(s)) for s, _ in self.classes])
        looks = min(float(lk) for _, lk in self.classes)
        return PolSARImage(table[self.class_map - 1], looks)


def stock_layout(size=STOCK_SIZE):
    """Procedural six-class map (1-based), scaled to ``size x size``.

    Class 1 background; class 3 and class 4 rectangles in the upper half;
    class 2 field along the bottom; a 3-pixel horizontal strip of class 5 in
    the upper-left rectangle; an 11-pixel disc of class 6 in the class 2 field.
    """
    cmap = np.ones((size, size), dtype=np.int64)

    def span(a, b):
        return slice(int(round(a * size)), int(round(b * size)))

    cmap[span(0.08, 0.55), span(0.08, 0.45)] = 3
    cmap[span(0.08, 0.55), span(0.55, 0.92)] = 4
    cmap[span(0.62, 0.92), span(0.08, 0.92)] = 2
    strip = int(round(0.2 * size))
    cmap[strip - 1:strip + 2, span(0.12, 0.41)] = 5
    cy, cx = int(round(0.77 * size)), int(round(0.5 * size))
    yy, xx = np.mgrid[:size, :size]
    cmap[(yy - cy) ** 2 + (xx - cx) ** 2 <= 5 ** 2] = 6
    return cmap


def homogeneous_roi(size=STOCK_SIZE):
    """(x, y, w, h) of a class-4 area of the stock layout far from any edge."""
    x0, x1 = int(round(0.62 * size)), int(round(0.85 * size))
    y0, y1 = int(round(0.15 * size)), int(round(0.48 * size))
    return x0, y0, x1 - x0, y1 - y0


def stock_phantom(size=STOCK_SIZE, looks=1):
    return PhantomSpec(stock_layout(size), [(s, looks) for s in bundled_covariances()])


def simulate_phantom(spec, seed=None):
    """Draw every pixel independently from its class law. Deterministic per seed."""
    rng = np.random.default_rng(seed)
    h, w = spec.class_map.shape
    data = np.empty((h, w, 9))
    for k, (sigma, looks) in enumerate(spec.classes, start=1):
        mask = spec.class_map == k
        n = int(mask.sum())
        if n == 0:
            continue
        z = sample_wishart(WishartParams(sigma, looks), rng, size=n)
        data[mask] = pack(z)
    nominal = min(float(lk) for _, lk in spec.classes)
    return PolSARImage(data, nominal)
