import math
import unittest

import numpy as np
import scipy.signal

from covshrink.datagen import generate_sandwich
from covshrink.exceptions import DegenerateSampleSizeError, DimensionError
from covshrink.kde import estimate_spectrum
from covshrink.linalg import sample_covariance, sym_eig
from covshrink.model.methods import (
    CorrelatedMethod,
    EffectiveLpMethod,
    LedoitPecheMethod,
    LinearMethod,
    OracleExactMethod,
)
from covshrink.model.processes import ExpDecayAuto, GaussianNoise, IdentityAuto, TwoPeakCross
from covshrink.model.spectra import SpectralEstimate
from covshrink.oracle import oracle_exact
from covshrink.shrinkage import (
    build_estimator,
    effective_sample_count,
    shrink,
    shrink_correlated,
    shrink_linear,
    shrink_lp,
    shrink_lp_effective,
    shrinkage_factor_from_s,
)
from covshrink.transforms import TransformContext
from tests.slow import slow


def spectral_estimate(lambdas, alpha, beta, q: float, t: int = 1000) -> SpectralEstimate:
    """
    SpectralEstimate with the given u = alpha + i beta at ratio q
    """
    lambdas = np.asarray(lambdas, dtype=np.float64)
    return SpectralEstimate(
        lambdas=lambdas,
        rho=np.asarray(beta) / (q * math.pi * lambdas),
        hilb=(np.asarray(alpha) / q + 1.0) / (math.pi * lambdas),
        bandwidth=0.1,
        n_samples=t,
    )


def exp_decay_covariance(n: int, t: int, tau: float, seed: int, chunk: int = 50_000) -> np.ndarray:
    """
    sample covariance of n independent unit variance AR(1) series with lag-one correlation exp(-1/tau),
    accumulated chunk by chunk
    """
    generator = np.random.default_rng(seed)
    b = math.exp(-1.0 / tau)
    scale = math.sqrt(1.0 - b**2)
    # filter state b * y_{-1} with a stationary y_{-1}
    state = (b * generator.standard_normal(n))[:, None]
    total = np.zeros((n, n))
    for start in range(0, t, chunk):
        noise = generator.standard_normal((n, min(chunk, t - start))) * scale
        values, state = scipy.signal.lfilter([1.0], [1.0, -b], noise, axis=1, zi=state)
        total += values @ values.T
    return total / t


class TestLedoitPeche(unittest.TestCase):
    """
    test the Ledoit-Péché shrinkage and its effective sample count variant
    """

    def test_closed_form(self):
        """
        test xi = lambda / |1 + u|^2 at u = -0.5 + 0.5i and u = 0
        """
        spec = spectral_estimate([1.0, 2.0], [-0.5, 0.0], [0.5, 0.0], q=0.5)
        np.testing.assert_allclose(shrink_lp(spec, 0.5), [2.0, 2.0], rtol=1e-12)

    def test_effective_count(self):
        """
        test T_eff = T (1 - exp(-1/tau_eff))
        """
        self.assertAlmostEqual(effective_sample_count(1000, 1.0), 1000 * (1.0 - math.exp(-1.0)), places=10)
        self.assertEqual(effective_sample_count(1000, 1e-3), 1000.0)
        with self.assertRaises(ValueError):
            effective_sample_count(1000, 0.0)

    def test_effective_lp(self):
        """
        test that a vanishing tau_eff reproduces the Ledoit-Péché shrinkage
        """
        lambdas = np.linspace(0.5, 3.0, 20)
        spec = estimate_spectrum(lambdas, 40)
        np.testing.assert_allclose(
            shrink_lp_effective(spec, 20, 40, 1e-3), shrink_lp(spec, 0.5), rtol=1e-12
        )
        with self.assertRaises(DegenerateSampleSizeError):
            shrink_lp_effective(spec, 20, 40, 1e5)


class TestCorrelated(unittest.TestCase):
    """
    test the nonlinear shrinkage for auto-correlated samples
    """

    def test_identity_reduces_to_ledoit_peche(self):
        """
        test shrink_correlated with A = I against shrink_lp on random (lambda, alpha, beta) triples
        """
        generator = np.random.default_rng(2024)
        q = 0.5
        lambdas = generator.uniform(0.1, 5.0, 1000)
        alpha = generator.uniform(-1.0, 1.0, 1000)
        beta = generator.uniform(1e-3, 2.0, 1000)
        spec = spectral_estimate(lambdas, alpha, beta, q)
        ctx = TransformContext(model=IdentityAuto())
        np.testing.assert_allclose(shrink_correlated(spec, q, ctx), shrink_lp(spec, q), rtol=1e-12)

    def test_degenerate_density(self):
        """
        test that a vanishing density uses the limit Im chi(alpha + i delta) / delta
        """
        spec = spectral_estimate([1.0, 2.0], [-0.5, 0.3], [0.0, 0.0], q=0.5)
        ctx = TransformContext(model=IdentityAuto())
        xis = shrink_correlated(spec, 0.5, ctx)
        self.assertTrue(np.all(np.isfinite(xis)))
        # Im(u / (1 + u)) / Im u = 1 / |1 + u|^2 for the identity
        np.testing.assert_allclose(xis, [1.0 / 0.25, 2.0 / 1.69], rtol=1e-6)

    def test_s_transform_route(self):
        """
        test that the shrinkage factor through the S-transform equals Im chi(u) / Im u
        """
        ctx = TransformContext(model=ExpDecayAuto(tau=2.0))
        spec = spectral_estimate([1.0, 1.5, 2.0], [-0.3, -0.1, 0.2], [0.4, 0.3, 0.1], q=0.5)
        np.testing.assert_allclose(
            shrinkage_factor_from_s(ctx, [-0.3 + 0.4j, -0.1 + 0.3j, 0.2 + 0.1j]),
            shrink_correlated(spec, 0.5, ctx) / spec.lambdas,
            rtol=1e-10,
        )

    def test_classical_limit(self):
        """
        test xi -> lambda when T is much larger than N
        """
        n, t = 50, 500_000
        e = exp_decay_covariance(n, t, 3.0, seed=11)
        spec = estimate_spectrum(sym_eig(e).values, t)
        xis = shrink_correlated(spec, n / t, TransformContext(model=ExpDecayAuto(tau=3.0)))
        self.assertLess(float(np.max(np.abs(xis / spec.lambdas - 1.0))), 0.05)

    def test_nonnegative(self):
        """
        test that the shrunk eigenvalues are never negative
        """
        sample = generate_sandwich(TwoPeakCross(), ExpDecayAuto(tau=3.0), GaussianNoise(), 100, 200, 200, seed=4)
        spec = estimate_spectrum(sym_eig(sample.sample_covariance()).values, 200)
        for tau in (0.5, 3.0, 20.0):
            with self.subTest(tau=tau):
                xis = shrink_correlated(spec, 0.5, TransformContext(model=ExpDecayAuto(tau=tau)))
                self.assertTrue(np.all(xis >= 0))

    @slow
    def test_exact_oracle_agreement(self):
        """
        test that the correlated shrinkage with the true tau approaches the exact oracle
        """
        ratios = []
        for seed in (1, 2, 3):
            sample = generate_sandwich(
                TwoPeakCross(), ExpDecayAuto(tau=3.0), GaussianNoise(), 500, 1000, 1000, seed=seed
            )
            eig = sym_eig(sample.sample_covariance())
            spec = estimate_spectrum(eig.values, 1000)
            xis = shrink_correlated(spec, 0.5, TransformContext(model=ExpDecayAuto(tau=3.0)))
            exact = oracle_exact(eig, sample.c_true)
            ratios.append(np.mean((xis - exact) ** 2) / np.mean((eig.values - exact) ** 2))
        self.assertLessEqual(float(np.mean(ratios)), 0.15)


class TestLinear(unittest.TestCase):
    """
    test linear shrinkage towards the identity
    """

    def test_linear(self):
        """
        test the endpoints and xi = 2 at alpha_s = 0.5, lambda = 3
        """
        lambdas = np.array([0.5, 3.0])
        np.testing.assert_allclose(shrink_linear(lambdas, 1.0), lambdas)
        np.testing.assert_allclose(shrink_linear(lambdas, 0.0), [1.0, 1.0])
        np.testing.assert_allclose(shrink_linear(lambdas, 0.5), [0.75, 2.0])
        with self.assertRaises(ValueError):
            shrink_linear(lambdas, 1.5)


class TestEstimator(unittest.TestCase):
    """
    test the dispatch and the rotationally invariant estimator
    """

    def setUp(self):
        """
        setup test case
        """
        generator = np.random.default_rng(3)
        self.e = sample_covariance(generator.standard_normal((10, 40)))
        self.eig = sym_eig(self.e)
        self.spec = estimate_spectrum(self.eig.values, 40)

    def test_build_estimator(self):
        """
        test xi = lambda gives E and xi = 1 gives the identity
        """
        method = LedoitPecheMethod()
        np.testing.assert_allclose(build_estimator(self.eig, self.eig.values, method).xi_matrix, self.e, atol=1e-8)
        result = build_estimator(self.eig, np.ones(10), method)
        np.testing.assert_allclose(result.xi_matrix, np.eye(10), atol=1e-8)
        np.testing.assert_allclose(np.linalg.eigvalsh(result.xi_matrix), np.ones(10), atol=1e-8)
        with self.assertRaises(DimensionError):
            build_estimator(self.eig, np.ones(9), method)
        with self.assertRaises(ValueError):
            build_estimator(self.eig, -np.ones(10), method)

    def test_shrink_dispatch(self):
        """
        test that shrink applies the requested method
        """
        q = 0.25
        np.testing.assert_allclose(shrink(LedoitPecheMethod(), self.spec, q), shrink_lp(self.spec, q))
        np.testing.assert_allclose(
            shrink(CorrelatedMethod(auto=IdentityAuto()), self.spec, q), shrink_lp(self.spec, q), rtol=1e-12
        )
        np.testing.assert_allclose(
            shrink(EffectiveLpMethod(tau_eff=2.0), self.spec, q), shrink_lp_effective(self.spec, 10, 40, 2.0)
        )
        np.testing.assert_allclose(
            shrink(LinearMethod(alpha_s=0.3), self.spec, q), shrink_linear(self.spec.lambdas, 0.3)
        )
        with self.assertRaises(TypeError):
            shrink(OracleExactMethod(), self.spec, q)


if __name__ == "__main__":
    unittest.main()
