import math

import mpmath
import numpy as np
import pytest
from scipy import stats

from sdnlm.divergence import (
    CommonLooks,
    PerPatchLooks,
    SamplePair,
    chi2_upper_tail,
    hellinger_statistic,
    patch_test,
)
from sdnlm.errors import DegenerateSample, DomainError
from sdnlm.wishart import WishartParams, sample_wishart

from .conftest import random_pd


def mp_hellinger(s1, l1, s2, l2, m, n):
    """The closed-form Hellinger statistic evaluated directly in 50-digit arithmetic."""
    mpmath.mp.dps = 50
    S1, S2 = mpmath.matrix(s1.tolist()), mpmath.matrix(s2.tolist())
    l1, l2 = mpmath.mpf(l1), mpmath.mpf(l2)
    det = lambda a: mpmath.re(mpmath.det(a))
    if min(l1, l2) < 3:
        mix = ((S1 ** -1 + S2 ** -1) / 2) ** -1
        aff = (det(mix) / mpmath.sqrt(det(S1) * det(S2))) ** ((l1 + l2) / 2)
    else:
        mix = ((l1 * S1 ** -1 + l2 * S2 ** -1) / 2) ** -1
        aff = (det(mix) ** ((l1 + l2) / 2) / (det(S1) ** (l1 / 2) * det(S2) ** (l2 / 2))
               * mpmath.sqrt(l1 ** (3 * l1) * l2 ** (3 * l2)))
        for q in range(3):
            aff *= mpmath.gamma((l1 + l2) / 2 - q) / mpmath.sqrt(mpmath.gamma(l1 - q) * mpmath.gamma(l2 - q))
    return float(mpmath.mpf(8) * m * n / (m + n) * (1 - aff))


def stat(s1, l1, s2, l2, m=9, n=9):
    return hellinger_statistic(SamplePair(WishartParams(s1, l1), WishartParams(s2, l2), m, n))


def test_identical_laws_give_zero(classes):
    for s in classes:
        for L in (1.0, 2.5, 4.0, 37.0):
            assert stat(s, L, s, L) == 0.0


def test_identity_vs_twice_identity():
    expected = mp_hellinger(np.eye(3), 4, 2 * np.eye(3), 4, 9, 9)
    assert stat(np.eye(3), 4, 2 * np.eye(3), 4) == pytest.approx(expected, rel=1e-10)
    # by hand: affinity 4^12 / (27^4 * 64)
    assert expected == pytest.approx(36 * (1 - 4 ** 12 / (27 ** 4 * 64)), rel=1e-14)


def test_low_looks_branch_matches_oracle(rng):
    for _ in range(10):
        s1, s2 = random_pd(rng), random_pd(rng)
        l1, l2 = rng.uniform(1.0, 2.9), rng.uniform(1.0, 6.0)
        assert stat(s1, l1, s2, l2) == pytest.approx(mp_hellinger(s1, l1, s2, l2, 9, 9), rel=1e-10)


def test_symmetry(rng):
    for _ in range(20):
        s1, s2 = random_pd(rng), random_pd(rng)
        l1, l2 = rng.uniform(2.2, 20, size=2)
        assert stat(s1, l1, s2, l2, 7, 13) == pytest.approx(stat(s2, l2, s1, l1, 13, 7), rel=1e-10)


def test_monotone_in_scale_ratio():
    values = [stat(np.eye(3), 4, c * np.eye(3), 4) for c in (1.0, 1.5, 2.0, 4.0)]
    assert values == sorted(values) and len(set(values)) == 4


def test_doubling_sample_sizes_doubles_statistic(classes):
    a = stat(classes[0], 5, classes[3], 7, 9, 9)
    b = stat(classes[0], 5, classes[3], 7, 18, 18)
    assert b == 2 * a


def test_nonnegative(rng):
    for _ in range(100):
        s = random_pd(rng)
        tiny = s * (1 + 1e-15)
        assert stat(s, 4, tiny, 4) >= 0.0


def test_domain_errors():
    with pytest.raises(DomainError):
        stat(np.diag([1.0, 1.0, 0.0]), 4, np.eye(3), 4)
    with pytest.raises(DomainError):
        SamplePair(WishartParams(np.eye(3), 4), WishartParams(np.eye(3), 4), 0, 3)


def test_chi2_upper_tail_examples():
    assert chi2_upper_tail(0.0, 9) == 1.0
    assert chi2_upper_tail(2 * math.log(2), 2) == pytest.approx(0.5, abs=1e-15)
    assert chi2_upper_tail(16.919, 9) == pytest.approx(0.050, abs=0.0005)
    with pytest.raises(DomainError):
        chi2_upper_tail(-1.0, 3)


def test_patch_test_same_sample(classes):
    z = sample_wishart(WishartParams(classes[2], 4), 1, size=9)
    for mode in (PerPatchLooks(), CommonLooks(4)):
        res = patch_test(z, z, mode)
        assert res.statistic == 0.0 and res.p_value == 1.0
    assert patch_test(z, z, PerPatchLooks()).dof == 10
    assert patch_test(z, z, CommonLooks(4)).dof == 9


def test_patch_test_symmetry(classes):
    a = sample_wishart(WishartParams(classes[2], 4), 1, size=9)
    b = sample_wishart(WishartParams(classes[3], 4), 2, size=9)
    for mode in (PerPatchLooks(), CommonLooks(4)):
        assert patch_test(a, b, mode).statistic == pytest.approx(patch_test(b, a, mode).statistic, rel=1e-10)


def test_patch_test_degenerate():
    v = np.array([1.0, 0.0, 0.0])
    bad = [np.outer(v, v)] * 9
    with pytest.raises(DegenerateSample):
        patch_test(bad, [np.eye(3)] * 9)
    with pytest.raises(DegenerateSample):
        patch_test(bad, [np.eye(3)] * 9, CommonLooks(1))


def test_patch_test_power_separated_classes(classes):
    rng = np.random.default_rng(7)
    rejected = 0
    for _ in range(200):
        a = sample_wishart(WishartParams(classes[0], 1), rng, size=9)
        b = sample_wishart(WishartParams(classes[1], 1), rng, size=9)
        rejected += patch_test(a, b, CommonLooks(1)).p_value < 0.05
    assert rejected >= 190


@pytest.mark.slow
def test_null_distribution_is_chi2_nine(classes):
    rng = np.random.default_rng(3)
    law = WishartParams(classes[4], 4)
    values = [patch_test(sample_wishart(law, rng, size=100), sample_wishart(law, rng, size=100),
                         CommonLooks(4)).statistic for _ in range(2000)]
    assert stats.kstest(values, "chi2", args=(9,)).statistic < 0.05
    assert min(values) >= 0.0
