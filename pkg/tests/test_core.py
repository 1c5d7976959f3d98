import numpy as np
import pytest

from bcslab import core


def direct_dft(v):
    """O(m^2) unitary transform, the oracle for the FFT path."""
    m = len(v)
    W = np.exp(-2j * np.pi * np.outer(np.arange(m), np.arange(m)) / m)
    return W @ np.asarray(v, complex) / np.sqrt(m)


def direct_circ_conv(h, v):
    """O(m^2) convolution sum, independent of the FFT implementation."""
    m = len(h)
    y = np.zeros(m, dtype=complex)
    for j in range(m):
        for i in range(m):
            y[j] += h[i] * v[(j - i) % m]
    return y


class TestDft:
    def test_unit_impulse(self):
        got = core.dft([1, 0, 0, 0])
        assert np.allclose(got, 0.5 * np.ones(4), atol=1e-15)

    def test_constant_vector(self):
        got = core.dft([1, 1, 1, 1])
        assert np.allclose(got, [2, 0, 0, 0], atol=1e-15)

    @pytest.mark.parametrize("m", [3, 5, 16, 64])
    def test_unitarity(self, m):
        rng = core.make_rng(101 + m)
        for _ in range(25):
            v = core.sample_complex_gaussian(rng, m)
            assert abs(np.linalg.norm(core.dft(v)) - np.linalg.norm(v)) <= 1e-12 * np.linalg.norm(v)

    def test_round_trip(self):
        rng = core.make_rng(7)
        v = core.sample_complex_gaussian(rng, 8)
        assert np.linalg.norm(core.idft(core.dft(v)) - v) <= 1e-12 * np.linalg.norm(v)

    def test_matches_direct_transform(self):
        rng = core.make_rng(8)
        for m in (3, 5, 7, 12):
            v = core.sample_complex_gaussian(rng, m)
            assert np.allclose(core.dft(v), direct_dft(v), atol=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            core.dft(np.array([], dtype=complex))

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            core.dft([1.0, np.nan])


class TestCircConv:
    def test_identity_filter(self):
        v = np.arange(1, 6, dtype=complex)
        h = np.zeros(5, dtype=complex)
        h[0] = 1
        assert np.allclose(core.circ_conv(h, v), v, atol=1e-14)

    def test_shift_filter(self):
        v = np.arange(1, 6, dtype=complex)
        h = np.zeros(5, dtype=complex)
        h[1] = 1
        assert np.allclose(core.circ_conv(h, v), np.roll(v, 1), atol=1e-14)

    @pytest.mark.parametrize("m", [2, 3, 5, 16, 33, 64])
    def test_matches_direct_sum(self, m):
        rng = core.make_rng(m)
        h = core.sample_complex_gaussian(rng, m)
        v = core.sample_complex_gaussian(rng, m)
        assert np.allclose(core.circ_conv(h, v), direct_circ_conv(h, v), atol=1e-12)

    @pytest.mark.parametrize("m", [3, 5, 16, 64])
    def test_convolution_theorem(self, m):
        rng = core.make_rng(1000 + m)
        for _ in range(25):
            h = core.sample_complex_gaussian(rng, m)
            v = core.sample_complex_gaussian(rng, m)
            lhs = core.dft(core.circ_conv(h, v))
            rhs = np.sqrt(m) * core.dft(h) * core.dft(v)
            assert np.max(np.abs(lhs - rhs)) <= 1e-10

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            core.circ_conv([1, 0], [1, 0, 0])


class TestSampling:
    def test_moments(self):
        rng = core.make_rng(12345)
        z = core.sample_complex_gaussian(rng, 100_000)
        assert abs(z.mean()) < 0.02
        assert abs(np.mean(np.abs(z) ** 2) - 1.0) < 0.02

    def test_seed_determinism(self):
        a = core.sample_complex_gaussian(core.make_rng(42), 4)
        b = core.sample_complex_gaussian(core.make_rng(42), 4)
        assert np.array_equal(a, b)

    def test_phase_uniformity_chi2(self):
        # 8 bins over [0, 2pi); chi-squared should not reject at p = 0.01
        from scipy.stats import chi2

        rng = core.make_rng(5150)
        z = core.sample_complex_gaussian(rng, 100_000)
        phases = np.mod(np.angle(z), 2 * np.pi)
        counts, _ = np.histogram(phases, bins=8, range=(0, 2 * np.pi))
        expected = len(z) / 8
        stat = float(np.sum((counts - expected) ** 2 / expected))
        p = 1.0 - chi2.cdf(stat, df=7)
        assert p > 0.01

    def test_length_validation(self):
        with pytest.raises(ValueError):
            core.sample_complex_gaussian(core.make_rng(0), 0)


class TestMatvec:
    def test_identity(self):
        rng = core.make_rng(3)
        x = core.sample_complex_gaussian(rng, 4)
        assert np.allclose(core.matvec(np.eye(4), x), x)

    def test_single_column_scaling(self):
        q = np.array([[1 + 1j], [2 - 1j], [0.5j]])
        alpha = 3 - 2j
        assert np.allclose(core.matvec(q, [alpha]), alpha * q[:, 0])

    def test_column_selection(self):
        rng = core.make_rng(4)
        Q = core.sample_complex_gaussian_matrix(rng, 3, 5)
        e2 = np.zeros(5)
        e2[2] = 1
        assert np.allclose(core.matvec(Q, e2), Q[:, 2])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            core.matvec(np.eye(3), np.ones(4))


class TestRng:
    def test_hash64_stable(self):
        assert core.hash64(1, 2, 3) == core.hash64(1, 2, 3)
        assert core.hash64(1, 2, 3) != core.hash64(1, 3, 2)
        assert core.hash64("a", 1) != core.hash64("a1")

    def test_child_streams_differ(self):
        a = core.child_rng(7, 0).standard_normal(4)
        b = core.child_rng(7, 1).standard_normal(4)
        assert not np.allclose(a, b)

    def test_child_reproducible(self):
        a = core.child_rng(7, "task", 3).standard_normal(4)
        b = core.child_rng(7, "task", 3).standard_normal(4)
        assert np.array_equal(a, b)
