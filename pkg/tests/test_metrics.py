import numpy as np
import pytest

from sdnlm import FilterConfig, PolSARImage, boxcar, ml_estimate, sdnlm
from sdnlm.errors import DegenerateRange, DimensionMismatch, DomainError, ZeroVariance
from sdnlm.metrics import RegionOfInterest, channel_extract, enl, ssim, ssim_polsar
from sdnlm.phantom import simulate_phantom, stock_phantom
from sdnlm.wishart import WishartParams, sample_wishart


def field(sigma, looks, side, seed):
    d = sample_wishart(WishartParams(sigma, looks), rng_seed=seed, size=side * side)
    return PolSARImage.from_matrices(d.reshape(side, side, 3, 3), looks)


def ssim_oracle(f, g, block, k1=0.01, k2=0.03):
    """Plain-loop evaluation of the three-factor index, tile by tile."""
    L = float(np.max(f) - np.min(f))
    c1, c2 = (k1 * L) ** 2, (k2 * L) ** 2
    c3 = c2 / 2
    scores = []
    for i in range(0, f.shape[0] - block + 1, block):
        for j in range(0, f.shape[1] - block + 1, block):
            a = [float(v) for v in f[i:i + block, j:j + block].ravel()]
            b = [float(v) for v in g[i:i + block, j:j + block].ravel()]
            n = len(a)
            ma, mb = sum(a) / n, sum(b) / n
            va = sum((x - ma) ** 2 for x in a) / (n - 1)
            vb = sum((x - mb) ** 2 for x in b) / (n - 1)
            cab = sum((x - ma) * (y - mb) for x, y in zip(a, b)) / (n - 1)
            sa, sb = va ** 0.5, vb ** 0.5
            s = ((cab + c1) / (sa * sb + c1)
                 * (2 * ma * mb + c2) / (ma ** 2 + mb ** 2 + c2)
                 * (2 * sa * sb + c3) / (va + vb + c3))
            scores.append(s)
    return sum(scores) / len(scores)


def test_channel_extract_identity():
    img = PolSARImage.constant(np.eye(3), 4, 5)
    for ch in ("hh", "HV", "vv"):
        assert np.array_equal(channel_extract(img, ch), np.ones((4, 5)))


def test_channel_extract_reads_diagonal():
    m = np.diag([1.0, 7.5, 2.0]).astype(complex)
    m[0, 2] = m[2, 0] = 0.3
    assert channel_extract(PolSARImage.constant(m, 2, 2), "hv")[1, 1] == 7.5
    with pytest.raises(DomainError):
        channel_extract(PolSARImage.constant(m, 2, 2), "xx")


@pytest.mark.slow
def test_channel_means_match_sigma(classes):
    img = field(classes[3], 1, 317, seed=21)  # ~1e5 pixels
    for k, ch in enumerate(("hh", "hv", "vv")):
        assert channel_extract(img, ch).mean() == pytest.approx(classes[3][k, k].real, rel=0.02)


@pytest.mark.parametrize("looks, tol", [(1, 0.15), (4, 0.4)])
def test_enl_recovers_looks(classes, looks, tol):
    img = field(classes[3], looks, 100, seed=22 + looks)
    roi = RegionOfInterest(0, 0, 100, 100)
    for ch in ("hh", "hv", "vv"):
        assert enl(channel_extract(img, ch), roi) == pytest.approx(looks, abs=tol)


def test_enl_constant_region():
    with pytest.raises(ZeroVariance) as info:
        enl(np.full((10, 10), 3.0), RegionOfInterest(2, 2, 5, 5))
    assert info.value.code == "zero-variance"


def test_enl_scale_invariant(rng):
    data = rng.gamma(3.0, size=(40, 50))
    roi = RegionOfInterest(3, 4, 30, 20)
    base = enl(data, roi)
    for c in (0.5, 3.0, 100.0):
        assert enl(c * data, roi) == pytest.approx(base, rel=1e-12)


def test_roi_validation():
    with pytest.raises(DomainError):
        RegionOfInterest(0, 0, 1, 1)
    with pytest.raises(DomainError):
        enl(np.ones((5, 5)), RegionOfInterest(3, 0, 3, 2))


def test_enl_agrees_with_ml_looks(classes):
    img = field(classes[1], 4, 100, seed=31)
    roi = RegionOfInterest(0, 0, 100, 100)
    ml = ml_estimate(img.matrices().reshape(-1, 3, 3)).looks
    for ch in ("hh", "hv", "vv"):
        assert enl(channel_extract(img, ch), roi) == pytest.approx(ml, rel=0.15)


def test_ssim_self_is_one(rng):
    f = rng.gamma(1.0, size=(33, 41))
    assert ssim(f, f) == 1.0


def test_ssim_degenerate_range():
    with pytest.raises(DegenerateRange):
        ssim(np.ones((16, 16)), np.full((16, 16), 2.0))


def test_ssim_shape_checks(rng):
    with pytest.raises(DimensionMismatch):
        ssim(rng.random((16, 16)), rng.random((16, 17)))
    with pytest.raises(DimensionMismatch):
        ssim(rng.random((6, 16)), rng.random((6, 16)))


def test_ssim_checkerboard_oracle():
    yy, xx = np.mgrid[0:32, 0:32]
    f = ((yy + xx) % 2).astype(float)
    g = f.copy()
    g[8:16, 16:24] = 1.0 - g[8:16, 16:24]
    value = ssim(f, g)
    assert value == pytest.approx(ssim_oracle(f, g, 8), abs=1e-12)
    assert value < 1.0


def test_ssim_matches_oracle_on_noise(rng):
    f = rng.gamma(1.0, size=(30, 27))
    g = f * rng.gamma(4.0, 0.25, size=f.shape)
    assert ssim(f, g) == pytest.approx(ssim_oracle(f, g, 8), abs=1e-12)
    assert ssim(f, g, block=5) == pytest.approx(ssim_oracle(f, g, 5), abs=1e-12)


def test_ssim_range_fuzz(rng):
    for _ in range(300):
        h, w = rng.integers(8, 30, size=2)
        f = rng.normal(size=(h, w)) * rng.uniform(0.01, 100)
        g = rng.normal(size=(h, w)) * rng.uniform(0.01, 100) + rng.normal() * 10
        if rng.random() < 0.3:
            g = -f + rng.normal(scale=1e-3, size=f.shape)
        assert -1.0 <= ssim(f, g) <= 1.0


def test_ssim_polsar_self_and_permutation(classes):
    img = field(classes[0], 1, 32, seed=41)
    assert ssim_polsar(img, img) == 1.0
    perm = img.copy()
    perm.data[:, :, [0, 1, 2]] = img.data[:, :, [2, 0, 1]]
    assert ssim_polsar(img, perm) != 1.0
    with pytest.raises(DimensionMismatch):
        ssim_polsar(img, field(classes[0], 1, 16, seed=1))


def test_ssim_ordering_against_noisy_input():
    # the input image as reference, as in published phantom tables
    for seed in (1, 2):
        img = simulate_phantom(stock_phantom(128), seed=seed)
        filtered = ssim_polsar(img, sdnlm(img, FilterConfig(eta=0.80)))
        assert filtered > ssim_polsar(img, boxcar(img, 5))
