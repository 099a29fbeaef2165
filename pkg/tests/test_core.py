import math

import numpy as np
import pytest

from entropic_hedge.core import (
    DomainError,
    Grid1D,
    RngStream,
    SpdMatrix,
    entropy_rate,
    entropy_rate_eigen,
    gauss_hermite,
    golden_min,
    log_mean_exp,
    spd_sqrt,
)


def random_spd(rng, d, jitter=0.05):
    b = rng.standard_normal((d, d))
    return SpdMatrix(b @ b.T + jitter * np.eye(d))


class TestEntropyRate:
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_identity_is_zero(self, d):
        assert entropy_rate(SpdMatrix.identity(d)) == 0.0

    def test_diagonal_two_half(self):
        assert entropy_rate(SpdMatrix.diagonal([2.0, 0.5])) == pytest.approx(0.25, abs=1e-12)

    def test_scalar_two(self):
        expected = 0.5 * (1.0 - math.log(2.0))
        assert entropy_rate(SpdMatrix([[2.0]])) == pytest.approx(expected, abs=1e-12)

    def test_non_pd_rejected_with_eigenvalue(self):
        with pytest.raises(ValueError):
            SpdMatrix([[1.0, 0.0], [0.0, -1.0]])
        # PSD-but-singular passes construction, fails entropy evaluation
        with pytest.raises(DomainError, match="eigenvalue"):
            entropy_rate(SpdMatrix([[1.0, 1.0], [1.0, 1.0]]))

    def test_nonnegative_and_zero_only_at_identity(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            d = int(rng.integers(1, 4))
            sigma = random_spd(rng, d)
            g = entropy_rate(sigma)
            assert g >= 0.0
            if g == 0.0:
                assert np.linalg.norm(sigma.as_array() - np.eye(d)) < 1e-8

    def test_convexity(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            d = int(rng.integers(1, 4))
            a = random_spd(rng, d)
            b = random_spd(rng, d)
            ga, gb = entropy_rate(a), entropy_rate(b)
            for t in (0.25, 0.5, 0.75):
                mix = SpdMatrix(t * a.as_array() + (1.0 - t) * b.as_array())
                assert entropy_rate(mix) <= t * ga + (1.0 - t) * gb + 1e-10


class TestEntropyRateEigen:
    def test_all_ones(self):
        assert entropy_rate_eigen([1.0, 1.0, 1.0]) == 0.0

    def test_two_half(self):
        assert entropy_rate_eigen([2.0, 0.5]) == pytest.approx(0.25, abs=1e-12)

    def test_e(self):
        assert entropy_rate_eigen([math.e]) == pytest.approx(0.5 * (math.e - 2.0), abs=1e-12)

    def test_nonpositive_rejected(self):
        with pytest.raises(DomainError):
            entropy_rate_eigen([1.0, 0.0])
        with pytest.raises(DomainError):
            entropy_rate_eigen([-2.0])

    def test_matches_matrix_form_on_diagonals(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            d = int(rng.integers(1, 4))
            lam = rng.uniform(0.05, 5.0, size=d)
            diff = entropy_rate(SpdMatrix.diagonal(lam)) - entropy_rate_eigen(lam)
            assert abs(diff) <= 1e-12


class TestSpdSqrt:
    def test_identity(self):
        np.testing.assert_allclose(spd_sqrt(SpdMatrix.identity(3)).as_array(), np.eye(3), atol=1e-14)

    def test_diagonal(self):
        root = spd_sqrt(SpdMatrix.diagonal([4.0, 9.0]))
        np.testing.assert_allclose(root.as_array(), np.diag([2.0, 3.0]), atol=1e-12)

    def test_square_recovers_and_psd(self):
        rng = np.random.default_rng(19)
        for _ in range(200):
            d = int(rng.integers(1, 4))
            a = random_spd(rng, d)
            r = spd_sqrt(a)
            np.testing.assert_allclose(r.as_array() @ r.as_array(), a.as_array(), atol=1e-10)
            assert np.min(r.eigenvalues()) >= -1e-12

    def test_asymmetric_rejected_at_construction(self):
        with pytest.raises(ValueError, match="symmetric"):
            SpdMatrix([[1.0, 0.5], [0.2, 1.0]])


class TestLogMeanExp:
    def test_constant_zero(self):
        assert log_mean_exp([0.0, 0.0, 0.0]) == 0.0

    def test_mean_of_one_and_three(self):
        assert log_mean_exp([math.log(1.0), math.log(3.0)]) == pytest.approx(math.log(2.0), abs=1e-14)

    def test_no_overflow_at_large_scale(self):
        assert log_mean_exp([1000.0, 1000.0]) == 1000.0

    def test_shift_invariance(self):
        rng = np.random.default_rng(5)
        v = rng.standard_normal(64)
        for c in (1.0, -17.3, 500.0):
            assert log_mean_exp(v + c) == pytest.approx(log_mean_exp(v) + c, abs=1e-12)

    def test_rejects_empty_and_nan(self):
        with pytest.raises(ValueError):
            log_mean_exp([])
        with pytest.raises(ValueError):
            log_mean_exp([0.0, float("nan")])

    def test_finite_output(self):
        rng = np.random.default_rng(23)
        for _ in range(50):
            v = rng.uniform(-700, 700, size=32)
            assert math.isfinite(log_mean_exp(v))


class TestGaussHermite:
    def test_order_two_low_moments(self):
        rule = gauss_hermite(2)
        assert rule.expect(lambda z: np.ones_like(z)) == pytest.approx(1.0, abs=1e-12)
        assert rule.expect(lambda z: z**2) == pytest.approx(1.0, abs=1e-10)

    def test_fourth_moment(self):
        rule = gauss_hermite(8)
        assert rule.expect(lambda z: z**4) == pytest.approx(3.0, abs=1e-10)

    def test_gaussian_mgf_of_square(self):
        # E[exp(rho Z^2 / 2)] = 1 / sqrt(1 - rho) at rho = 1/2
        rule = gauss_hermite(8)
        got = rule.expect(lambda z: np.exp(0.25 * z**2))
        assert got == pytest.approx(1.0 / math.sqrt(0.5), abs=1e-3)

    @pytest.mark.parametrize("m", [2, 3, 16, 64, 256])
    def test_weights_normalized_and_odd_moments_vanish(self, m):
        rule = gauss_hermite(m)
        assert abs(sum(rule.weights) - 1.0) <= 1e-12
        assert rule.expect(lambda z: z) == pytest.approx(0.0, abs=1e-13)
        assert rule.expect(lambda z: z**3) == pytest.approx(0.0, abs=1e-12)

    def test_order_out_of_range(self):
        with pytest.raises(ValueError):
            gauss_hermite(1)
        with pytest.raises(ValueError):
            gauss_hermite(257)


class TestGrid1D:
    def test_step_and_nodes(self):
        g = Grid1D(-1.0, 1.0, 5)
        assert g.step == pytest.approx(0.5)
        np.testing.assert_allclose(g.nodes(), [-1.0, -0.5, 0.0, 0.5, 1.0])

    def test_invalid(self):
        with pytest.raises(ValueError):
            Grid1D(1.0, -1.0, 5)
        with pytest.raises(ValueError):
            Grid1D(0.0, 1.0, 1)


class TestRngStream:
    def test_reproducible(self):
        a = RngStream(42, 7).generator().standard_normal(16)
        b = RngStream(42, 7).generator().standard_normal(16)
        np.testing.assert_array_equal(a, b)

    def test_streams_differ(self):
        a = RngStream(42, 0).generator().standard_normal(16)
        b = RngStream(42, 1).generator().standard_normal(16)
        assert np.max(np.abs(a - b)) > 1e-3

    def test_derive_deterministic(self):
        s = RngStream(9, 3)
        assert s.derive(5) == s.derive(5)
        assert s.derive(5) != s.derive(6)


class TestGoldenMin:
    def test_scalar_quadratic(self):
        x, f = golden_min(lambda g: (g - 1.3) ** 2 + 2.0, -1.0, 1.0)
        assert x == pytest.approx(1.3, abs=1e-7)
        assert f == pytest.approx(2.0, abs=1e-12)

    def test_vectorized(self):
        centers = np.array([-3.0, 0.25, 11.0])
        x, f = golden_min(lambda g: (g - centers) ** 2, -1.0, 1.0)
        np.testing.assert_allclose(x, centers, atol=1e-6)
        np.testing.assert_allclose(f, 0.0, atol=1e-12)

    def test_unbounded_objective_raises(self):
        with pytest.raises(RuntimeError):
            golden_min(lambda g: np.asarray(-g, dtype=float), -1.0, 1.0)
