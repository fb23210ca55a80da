"""Sobol generation, digital shifting, and the RQMC estimator."""

import numpy as np
import pytest

from fourierqmc import qmc
from fourierqmc.qmc import (DimensionUnsupported, NonFiniteIntegrand,
                            SobolStream, digital_shift, rqmc_estimate,
                            sobol_points)


def test_first_dimension_start():
    # hand-derived van der Corput start of the first coordinate
    pts = sobol_points(1, 4)
    assert pts.shape == (4, 1)
    assert pts[:, 0].tolist() == [0.0, 0.5, 0.75, 0.25]


def test_second_dimension_start():
    # dim 2 uses degree-1 polynomial, m = (1, 3, 5, ...); Gray-code order
    # gives 0, 1/2, 1/4, 3/4 (derived by hand from the XOR recurrence)
    pts = sobol_points(2, 4)
    assert pts[:, 0].tolist() == [0.0, 0.5, 0.75, 0.25]
    assert pts[:, 1].tolist() == [0.0, 0.5, 0.25, 0.75]


def test_matches_scipy_sobol():
    stats = pytest.importorskip("scipy.stats")
    eng = stats.qmc.Sobol(d=8, scramble=False, bits=52)
    want = eng.random(256)
    got = sobol_points(8, 256)
    assert np.array_equal(got, want)


def test_determinism_and_range():
    a = sobol_points(16, 200)
    b = sobol_points(16, 200)
    assert np.array_equal(a, b)
    assert np.all(a >= 0.0) and np.all(a < 1.0)


@pytest.mark.parametrize("k", [3, 4, 6])
def test_dyadic_stratification(k):
    # within each dyadic block of 2^k consecutive points, every coordinate
    # visits each interval [m 2^-k, (m+1) 2^-k) exactly once
    n = 1 << k
    pts = sobol_points(8, 2 * n)
    for block in (pts[:n], pts[n:]):
        cells = np.floor(block * n).astype(int)
        for j in range(8):
            assert sorted(cells[:, j].tolist()) == list(range(n))


def test_dimension_limits():
    with pytest.raises(DimensionUnsupported):
        sobol_points(0, 4)
    with pytest.raises(DimensionUnsupported):
        sobol_points(65, 4)
    pts = sobol_points(64, 8)
    assert pts.shape == (8, 64)


def test_stream_continuation():
    st = SobolStream(3)
    first = st.take(7)
    second = st.take(9)
    whole = sobol_points(3, 16)
    assert np.array_equal(np.vstack([first, second]), whole)
    assert st.index == 16


def test_backends_bit_identical():
    compiled = pytest.importorskip("fourierqmc._sobolkernel")
    from fourierqmc import _sobolnp

    rng = np.random.default_rng(3)
    for d, n0, n in ((6, 0, 37), (2, 1000, 64), (13, 5, 11)):
        dirs = qmc._direction_table(d)
        shift = rng.integers(0, 1 << 52, size=d, dtype=np.uint64)
        a = np.empty((n, d))
        b = np.empty((n, d))
        compiled.sobol_fill(dirs, shift, n0, a)
        _sobolnp.sobol_fill(dirs, shift, n0, b)
        assert np.array_equal(a, b)


def test_digital_shift_involution():
    pts = sobol_points(4, 32)
    once = digital_shift(pts, seed=11, s=2)
    assert not np.array_equal(once, pts)
    twice = digital_shift(once, seed=11, s=2)
    assert np.array_equal(twice, pts)


def test_digital_shift_marginals_uniform():
    pts = sobol_points(3, 1 << 12)
    sh = digital_shift(pts, seed=5, s=0)
    assert np.all(np.abs(sh.mean(axis=0) - 0.5) < 0.01)
    assert np.all(sh >= 0.0) and np.all(sh < 1.0)


def test_digital_shift_reproducible_and_independent():
    pts = sobol_points(2, 16)
    a = digital_shift(pts, seed=7, s=1)
    b = digital_shift(pts, seed=7, s=1)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, digital_shift(pts, seed=7, s=2))
    assert not np.array_equal(a, digital_shift(pts, seed=8, s=1))


def test_rqmc_constant_integrand():
    est = rqmc_estimate(lambda u: np.full(u.shape[0], 3.25), d=2, N=64,
                        S=8, seed=1)
    assert est.value == 3.25
    assert est.stderr == 0.0


def test_rqmc_product_integrand():
    est = rqmc_estimate(lambda u: np.prod(u, axis=1), d=3, N=1 << 10,
                        S=30, seed=qmc.DEFAULT_SEED)
    assert est.N == 1 << 10 and est.S == 30
    assert est.stderr > 0
    assert abs(est.value - 0.125) <= 3.0 * est.stderr


def test_rqmc_indicator_stratified():
    # the top bit of coordinate 1 alternates through any dyadic block, and a
    # digital shift only relabels halves, so every per-shift mean is exactly 1/2
    est = rqmc_estimate(lambda u: (u[:, 0] < 0.5).astype(float), d=2,
                        N=1 << 8, S=10, seed=3)
    assert est.value == 0.5
    assert est.stderr == 0.0


def test_rqmc_reproducible():
    f = lambda u: np.cos(u).sum(axis=1)
    a = rqmc_estimate(f, d=2, N=128, S=6, seed=42)
    b = rqmc_estimate(f, d=2, N=128, S=6, seed=42)
    c = rqmc_estimate(f, d=2, N=128, S=6, seed=43)
    assert a.value == b.value and a.stderr == b.stderr
    assert a.value != c.value


def test_rqmc_rejects_nonfinite():
    def bad(u):
        out = np.ones(u.shape[0])
        out[3] = np.inf
        return out

    with pytest.raises(NonFiniteIntegrand) as exc:
        rqmc_estimate(bad, d=2, N=16, S=2, seed=0)
    assert "u=" in str(exc.value)


def test_rqmc_validates_arguments():
    f = lambda u: np.ones(u.shape[0])
    with pytest.raises(ValueError):
        rqmc_estimate(f, d=2, N=0, S=4, seed=0)
    with pytest.raises(ValueError):
        rqmc_estimate(f, d=2, N=4, S=1, seed=0)


def test_estimate_fields():
    est = rqmc_estimate(lambda u: u[:, 0], d=1, N=32, S=4, seed=9,
                        c_alpha=2.5)
    assert est.c_alpha == 2.5
    assert est.seed == 9
    assert est.stderr >= 0.0
