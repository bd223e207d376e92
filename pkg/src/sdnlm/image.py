"""Raster container for per-pixel covariance matrices."""
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .hermitian import pack, unpack

LAYOUT = ("c11", "c22", "c33", "reC12", "imC12", "reC13", "imC13", "reC23", "imC23")


@dataclass
class PolSARImage:
    """Row-major raster of packed covariance matrices, ``data.shape == (height, width, 9)``."""

    data: np.ndarray
    nominal_looks: float = 1.0

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.ndim != 3 or self.data.shape[2] != 9:
            raise DomainError(f"expected (height, width, 9) data, got {self.data.shape}")
        if self.data.shape[0] < 1 or self.data.shape[1] < 1:
            raise DomainError("image must have positive width and height")
        if not self.nominal_looks > 0:
            raise DomainError("nominal_looks must be positive")

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @classmethod
    def from_matrices(cls, matrices, nominal_looks=1.0):
        """Build from an (height, width, 3, 3) complex array."""
        return cls(pack(matrices), nominal_looks)

    @classmethod
    def constant(cls, matrix, height, width, nominal_looks=1.0):
        p = pack(np.asarray(matrix))
        return cls(np.broadcast_to(p, (height, width, 9)).copy(), nominal_looks)

    def matrices(self):
        return unpack(self.data)

    def pixel(self, x, y):
        return unpack(self.data[y, x])

    def copy(self):
        return PolSARImage(self.data.copy(), self.nominal_looks)
