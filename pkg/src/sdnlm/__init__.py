"""Stochastic-distances nonlocal means filtering of PolSAR covariance images."""
from .divergence import (
    CommonLooks,
    PerPatchLooks,
    SamplePair,
    TestResult,
    chi2_upper_tail,
    hellinger_statistic,
    patch_test,
)
from .filters import FilterConfig, boxcar, filter_pixel, sdnlm, weight_function, weight_mask
from .hermitian import hermitian_det, hermitian_inv
from .image import PolSARImage
from .wishart import (
    WishartParams,
    ml_estimate,
    sample_wishart,
    wishart_log_density,
    wishart_score,
)

__version__ = "0.1.0"
