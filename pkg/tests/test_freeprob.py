import math
import unittest

import numpy as np
import scipy.integrate
from scipy.stats import special_ortho_group

from covshrink.exceptions import DegenerateDenominatorError, DimensionError, SampleSizeError, TestPointError
from covshrink.freeprob import (
    frobenius_ratio,
    mp_density,
    mp_edges,
    mp_m_transform,
    s_from_moments,
    verify_mp_scalar,
    verify_s_rect,
)
from covshrink.linalg import sample_covariance
from covshrink.model.processes import ExpDecayAuto, IdentityAuto, TwoPeakCross
from tests.slow import slow

IDENTITY = TwoPeakCross(low=1.0, high=1.0)


class TestFrobeniusRatio(unittest.TestCase):
    """
    test the Frobenius ratio
    """

    def setUp(self):
        """
        setup test case
        """
        generator = np.random.default_rng(12)
        self.c = np.diag([1.0, 1.0, 3.0, 3.0])
        self.e = sample_covariance(np.sqrt(self.c) @ generator.standard_normal((4, 10)))
        self.xi = 0.5 * (self.e + self.c)

    def test_limits(self):
        """
        test Xi = C gives 0 and Xi = E gives 1
        """
        self.assertEqual(frobenius_ratio(self.c, self.e, self.c).frobenius_ratio, 0.0)
        self.assertAlmostEqual(frobenius_ratio(self.e, self.e, self.c).frobenius_ratio, 1.0, places=14)

    def test_normalization(self):
        """
        test that both losses are normalized by N and their ratio is reported
        """
        report = frobenius_ratio(self.xi, self.e, self.c)
        self.assertAlmostEqual(report.mse_sample, float(np.sum((self.e - self.c) ** 2)) / 4, places=14)
        self.assertAlmostEqual(report.mse_estimator, report.mse_sample / 4, places=14)
        self.assertAlmostEqual(report.frobenius_ratio, 0.25, places=14)

    def test_orthogonal_invariance(self):
        """
        test invariance under simultaneous orthogonal conjugation
        """
        o = special_ortho_group.rvs(4, random_state=3)
        expected = frobenius_ratio(self.xi, self.e, self.c).frobenius_ratio
        rotated = frobenius_ratio(o @ self.xi @ o.T, o @ self.e @ o.T, o @ self.c @ o.T).frobenius_ratio
        self.assertAlmostEqual(rotated, expected, places=10)

    def test_errors(self):
        """
        test the degenerate denominator and shape mismatches
        """
        with self.assertRaises(DegenerateDenominatorError):
            frobenius_ratio(self.xi, self.c, self.c)
        with self.assertRaises(DimensionError):
            frobenius_ratio(np.eye(3), self.e, self.c)


class TestMarchenkoPastur(unittest.TestCase):
    """
    test the Marčenko-Pastur law
    """

    def test_edges(self):
        """
        test the support [0.085786, 2.914214] at q = 0.5
        """
        lower, upper = mp_edges(0.5)
        self.assertAlmostEqual(lower, 0.085786, places=6)
        self.assertAlmostEqual(upper, 2.914214, places=6)

    def test_density(self):
        """
        test the density at q = 1, lambda = 2 and outside the support
        """
        self.assertAlmostEqual(mp_density(2.0, 1.0), 2.0 / (4.0 * math.pi), places=12)
        self.assertAlmostEqual(mp_density(2.0, 1.0), 0.159155, places=6)
        np.testing.assert_array_equal(mp_density([0.05, 3.0, -1.0], 0.5), [0.0, 0.0, 0.0])
        with self.assertRaises(ValueError):
            mp_density(1.0, 0.0)

    def test_unit_mass(self):
        """
        test that the density integrates to one
        """
        for q in (0.1, 0.25, 0.5, 0.9):
            with self.subTest(q=q):
                lower, upper = mp_edges(q)
                mass, _ = scipy.integrate.quad(lambda x, q=q: mp_density(x, q), lower, upper, limit=200)
                self.assertAlmostEqual(mass, 1.0, delta=1e-6)

    def test_m_transform(self):
        """
        test that m solves the quadratic, has Im g < 0 above the axis and behaves like 1/z at infinity
        """
        q = 0.5
        z = np.array([0.3 + 0.5j, 1.0 + 0.01j, 4.0 + 2.0j, -1.0 + 0.2j])
        m = mp_m_transform(z, q)
        np.testing.assert_allclose(q * m**2 + m * (1.0 + q - z) + 1.0, 0.0, atol=1e-12)
        self.assertTrue(np.all(((m + 1.0) / z).imag < 0))
        np.testing.assert_allclose(mp_m_transform(np.conj(z), q), np.conj(m), atol=1e-14)
        self.assertAlmostEqual(mp_m_transform(1e4j, q), 1.0 / 1e4j, delta=1e-6)

    def test_m_transform_density(self):
        """
        test that the imaginary part of m just above the axis gives -pi lambda rho(lambda)
        """
        q = 0.5
        lam = np.array([0.5, 1.0, 2.0])
        m = mp_m_transform(lam + 1e-10j, q)
        np.testing.assert_allclose(-m.imag / (math.pi * lam), mp_density(lam, q), atol=1e-6)


class TestVerifyMp(unittest.TestCase):
    """
    test the Monte Carlo check of the generalized Marčenko-Pastur equation
    """

    def test_uncorrelated(self):
        """
        test C = I, A = I, q = 0.5
        """
        result = verify_mp_scalar(IDENTITY, IdentityAuto(), 300, 600, 50, seed=42)
        self.assertLess(result.max_residual, 0.02)
        self.assertEqual(len(result.residuals), 5)
        self.assertEqual(result.test_points[0], (0.25, 0.5))
        self.assertEqual(result.q, 0.5)

    def test_exp_decay(self):
        """
        test C = I, A = exponential decay with tau = 3
        """
        result = verify_mp_scalar(IDENTITY, ExpDecayAuto(tau=3.0), 300, 600, 50, seed=42)
        self.assertLess(result.max_residual, 0.03)

    def test_two_peak(self):
        """
        test a population covariance with eigenvalues 1 and 3
        """
        result = verify_mp_scalar(TwoPeakCross(), ExpDecayAuto(tau=2.0), 200, 400, 20, seed=7)
        self.assertLess(result.max_residual, 0.03)
        self.assertEqual(result.test_points[1], (1.5, 0.5))

    def test_test_point_on_spectrum(self):
        """
        test that a test point close to the spectrum is rejected
        """
        with self.assertRaises(TestPointError):
            verify_mp_scalar(IDENTITY, IdentityAuto(), 200, 400, 10, seed=1, test_points=[1.0 + 0.01j])

    def test_draws(self):
        """
        test that fewer than ten draws are rejected
        """
        with self.assertRaises(ValueError):
            verify_mp_scalar(IDENTITY, IdentityAuto(), 20, 40, 9, seed=1)

    @slow
    def test_self_averaging(self):
        """
        test that the residual decreases with N at fixed q
        """
        residuals = [
            verify_mp_scalar(IDENTITY, IdentityAuto(), n, 2 * n, 50, seed=42).max_residual for n in (100, 200, 400)
        ]
        self.assertLess(residuals[2], residuals[0])


class TestVerifySRect(unittest.TestCase):
    """
    test the Monte Carlo check of the rectangular S-transform relation
    """

    def test_series_inversion(self):
        """
        test the S-transform of the Marčenko-Pastur moments against 1 / (1 + q z)
        """
        q = 0.5
        moments = [1.0, 1.0 + q, 1.0 + 3.0 * q + q**2, 1.0 + 6.0 * q + 6.0 * q**2 + q**3]
        z = np.array([-0.1, 0.05, 0.1])
        # chi(u) / u = 1 / ((1 + u)(1 + q u)) has the coefficients (-1)^k (1 - q^(k+1)) / (1 - q)
        truncated = sum((-1) ** k * (1.0 - q ** (k + 1)) / (1.0 - q) * z**k for k in range(4))
        np.testing.assert_allclose(s_from_moments(moments, z), (1.0 + z) * truncated, atol=1e-12)
        # the first omitted term (1 + u) c5 u^4 is below 2e-4 at |u| = 0.1
        np.testing.assert_allclose(s_from_moments(moments, z), 1.0 / (1.0 + q * z), atol=5e-4)
        # a point mass at 1 has chi(u) / u = 1 / (1 + u), truncated to 1 - u^4 after the factor 1 + u
        np.testing.assert_allclose(s_from_moments([1.0, 1.0, 1.0, 1.0], z), 1.0 - z**4, atol=1e-14)

    def test_relation(self):
        """
        test the relation and the Wishart closed form on a small instance
        """
        result = verify_s_rect(50, 100, 50, seed=42)
        self.assertLess(result.max_residual, 0.03)
        self.assertLess(result.wishart_residual, 0.02)
        self.assertEqual(result.q, 0.5)
        # the nonzero spectra of WV and VW coincide
        np.testing.assert_allclose(result.moments_vw, 0.5 * np.asarray(result.moments_wv), rtol=1e-10)

    def test_square(self):
        """
        test q = 1 where both sides use the same S-transform
        """
        result = verify_s_rect(60, 60, 20, seed=3)
        self.assertLess(result.max_residual, 0.02)

    def test_invalid(self):
        """
        test test points outside |z| <= 0.1, too few draws and too noisy moments
        """
        with self.assertRaises(ValueError):
            verify_s_rect(20, 40, 10, seed=1, test_points=[0.2])
        with self.assertRaises(ValueError):
            verify_s_rect(20, 40, 5, seed=1)
        with self.assertRaises(SampleSizeError):
            verify_s_rect(1, 1, 10, seed=1)

    @slow
    def test_large(self):
        """
        test N = 200, T = 400 with 100 draws
        """
        result = verify_s_rect(200, 400, 100, seed=42)
        self.assertLess(result.max_residual, 0.03)
        self.assertLess(result.wishart_residual, 0.02)


if __name__ == "__main__":
    unittest.main()
