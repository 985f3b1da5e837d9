"""
Loss metrics, the Marčenko-Pastur law and Monte Carlo checks of the free multiplication relations
"""

import logging
from collections.abc import Sequence

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from covshrink.datagen import build_auto_toeplitz, build_cross
from covshrink.exceptions import DegenerateDenominatorError, DimensionError, SampleSizeError, TestPointError
from covshrink.linalg import as_matrix, psd_sqrt
from covshrink.model.processes import AutoModel, CrossModel, IdentityAuto
from covshrink.model.results import MetricReport, MpCheckResult, SRectCheckResult
from covshrink.transforms import TransformContext, chi
from covshrink.util import rng

logger = logging.getLogger(__name__)

# real parts relative to the mean population eigenvalue, imaginary part fixed
MP_TEST_POINTS = (0.25, 0.75, 1.25, 2.0, 3.0)
MP_TEST_IMAG = 0.5
S_RECT_TEST_POINTS = (-0.1, -0.05, 0.025, 0.05, 0.1)
MIN_TEST_DISTANCE = 0.05
MAX_RELATIVE_ERROR = 0.1
MIN_DRAWS = 10


def frobenius_ratio(xi_matrix: ArrayLike, e: ArrayLike, c_true: ArrayLike) -> MetricReport:
    """
    Frobenius ratio Tr(Xi - C)^2 / Tr(E - C)^2
    :param xi_matrix: cleaned estimator
    :param e: sample estimator
    :param c_true: population covariance
    :return: MetricReport with both losses normalized by N
    """
    xi, sample, c = as_matrix(xi_matrix), as_matrix(e), as_matrix(c_true)
    if not xi.shape == sample.shape == c.shape:
        raise DimensionError(f"Matrices differ in shape: {xi.shape}, {sample.shape}, {c.shape}")
    n = c.shape[0]
    mse_estimator = float(np.sum((xi - c) ** 2)) / n
    mse_sample = float(np.sum((sample - c) ** 2)) / n
    if mse_sample == 0.0:
        raise DegenerateDenominatorError()
    return MetricReport(
        frobenius_ratio=mse_estimator / mse_sample, mse_estimator=mse_estimator, mse_sample=mse_sample
    )


def mp_edges(q: float) -> tuple[float, float]:
    """
    support edges (1 -+ sqrt(q))^2 of the Marčenko-Pastur law
    """
    return (1.0 - np.sqrt(q)) ** 2, (1.0 + np.sqrt(q)) ** 2


def mp_density(lam: ArrayLike, q: float) -> NDArray[np.float64] | float:
    """
    Marčenko-Pastur density of the sample estimator for C = I and uncorrelated samples
    The atom at zero present for q > 1 is not included.
    :param lam: eigenvalue(s)
    :param q: ratio N / T
    :return: density, zero outside the support
    """
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    values = np.asarray(lam, dtype=np.float64)
    lower, upper = mp_edges(q)
    inside = (values > max(lower, 0.0)) & (values < upper)
    with np.errstate(divide="ignore", invalid="ignore"):
        density = np.sqrt((upper - values) * (values - lower)) / (2.0 * np.pi * q * values)
    result = np.where(inside, density, 0.0)
    return float(result) if result.ndim == 0 else result


def mp_m_transform(z: ArrayLike, q: float) -> NDArray[np.complex128] | complex:
    """
    m_E(z) = z g_E(z) - 1 of the Marčenko-Pastur law, the root of q m^2 + m (1 + q - z) + 1 = 0
    whose resolvent g = (m + 1) / z lies in the opposite half-plane of z
    """
    values = np.asarray(z, dtype=np.complex128)
    b = 1.0 + q - values
    root = np.sqrt(b**2 - 4.0 * q)
    candidates = np.stack(((-b + root) / (2.0 * q), (-b - root) / (2.0 * q)))
    resolvent_imag = ((candidates + 1.0) / values).imag
    choose_first = resolvent_imag[0] * np.sign(values.imag) <= resolvent_imag[1] * np.sign(values.imag)
    result = np.where(choose_first, candidates[0], candidates[1])
    return complex(result) if result.ndim == 0 else result


def _test_points(points: Sequence[complex] | None, scale: float) -> NDArray[np.complex128]:
    if points is None:
        return np.asarray([scale * x + 1j * MP_TEST_IMAG for x in MP_TEST_POINTS], dtype=np.complex128)
    return np.asarray(points, dtype=np.complex128)


def verify_mp_scalar(
    cross: CrossModel,
    auto: AutoModel,
    n: int,
    t: int,
    draws: int,
    seed: int,
    test_points: Sequence[complex] | None = None,
) -> MpCheckResult:
    """
    Monte Carlo check of the generalized Marčenko-Pastur equation m_E(z) = m_C(Z),
    Z = z chi_A(q m_E(z)) / (q m_E(z))
    :param cross: population covariance model, drawn once
    :param auto: auto-correlation model
    :param n: number of variables N
    :param t: number of samples T
    :param draws: number of Monte Carlo draws
    :param seed: seed of all draws
    :param test_points: complex test points, by default five points 0.5 above the real axis
    :return: MpCheckResult
    """
    if draws < MIN_DRAWS:
        raise ValueError(f"At least {MIN_DRAWS} draws are required, got {draws}")
    q = n / t
    c = build_cross(cross, n, seed)
    population = scipy.linalg.eigvalsh(c)
    sqrt_c = psd_sqrt(c)
    sqrt_a = None if isinstance(auto, IdentityAuto) else psd_sqrt(build_auto_toeplitz(auto, t))
    z = _test_points(test_points, float(np.mean(population)))
    resolvent = np.zeros(z.shape, dtype=np.complex128)
    for draw_seed in rng.draw_seeds(seed, draws):
        x = rng.stream(draw_seed, rng.NOISE_STREAM).standard_normal((n, t))
        y = sqrt_c @ x if sqrt_a is None else sqrt_c @ x @ sqrt_a
        lambdas = scipy.linalg.eigvalsh(y @ y.T / t)
        distance = np.min(np.abs(z[:, None] - lambdas[None, :]), axis=1)
        if np.min(distance) < MIN_TEST_DISTANCE:
            index = int(np.argmin(distance))
            raise TestPointError(complex(z[index]), float(distance[index]))
        resolvent += np.mean(1.0 / (z[:, None] - lambdas[None, :]), axis=1)
    m_e = z * resolvent / draws - 1.0
    u = q * m_e
    chi_values = np.asarray(chi(TransformContext(model=auto), u), dtype=np.complex128).reshape(-1)
    big_z = z * chi_values / u
    m_c = np.mean(population[None, :] / (big_z[:, None] - population[None, :]), axis=1)
    residuals = np.abs(m_e - m_c)
    logger.debug(f"MP check N={n}, T={t}, {draws} draws: residuals {residuals}")
    return MpCheckResult(
        max_residual=float(np.max(residuals)),
        residuals=[float(value) for value in residuals],
        test_points=[(float(point.real), float(point.imag)) for point in z],
        q=q,
        draws=draws,
    )


def _moments(matrix: NDArray[np.float64], order: int = 4) -> NDArray[np.float64]:
    """
    normalized traces tau(M^k) = Tr(M^k) / size for k = 1..order
    """
    moments = np.empty(order)
    power = np.eye(matrix.shape[0])
    for k in range(order):
        power = power @ matrix
        moments[k] = np.trace(power) / matrix.shape[0]
    return moments


def s_from_moments(moments: ArrayLike, z: ArrayLike) -> NDArray[np.float64]:
    """
    S-transform near 0 from the first four moments by series inversion of psi
    chi(u) = c1 u + c2 u^2 + c3 u^3 + c4 u^4 and S(u) = (1 + u) chi(u) / u
    """
    m1, m2, m3, m4 = np.asarray(moments, dtype=np.float64)[:4]
    c1 = 1.0 / m1
    c2 = -m2 / m1**3
    c3 = (2.0 * m2**2 - m1 * m3) / m1**5
    c4 = (-5.0 * m2**3 + 5.0 * m1 * m2 * m3 - m1**2 * m4) / m1**7
    u = np.asarray(z, dtype=np.float64)
    return (1.0 + u) * (c1 + c2 * u + c3 * u**2 + c4 * u**3)


def _check_precision(samples: NDArray[np.float64]):
    """
    raise SampleSizeError if a moment's relative standard error exceeds 10%
    """
    mean = np.mean(samples, axis=0)
    standard_error = np.std(samples, axis=0, ddof=1) / np.sqrt(samples.shape[0])
    relative = standard_error / np.abs(mean)
    worst = int(np.argmax(relative))
    if not relative[worst] <= MAX_RELATIVE_ERROR:
        raise SampleSizeError(worst + 1, float(relative[worst]))


def verify_s_rect(
    n: int, t: int, draws: int, seed: int, test_points: Sequence[float] = S_RECT_TEST_POINTS
) -> SRectCheckResult:
    """
    Monte Carlo check of the rectangular S-transform relation
    S_WV(z) = q (1 + z) / (1 + q z) S_VW(q z) for W = X / sqrt(T) and V = D X^T / sqrt(T)
    with a generic positive diagonal D, and of the Wishart closed form S(z) = 1 / (1 + q z)
    :param n: number of rows N of X
    :param t: number of columns T of X
    :param draws: number of Monte Carlo draws
    :param seed: seed of all draws
    :param test_points: real test points with |z| <= 0.1
    :return: SRectCheckResult
    """
    if draws < MIN_DRAWS:
        raise ValueError(f"At least {MIN_DRAWS} draws are required, got {draws}")
    z = np.asarray(test_points, dtype=np.float64)
    if np.any(np.abs(z) > 0.1):
        raise ValueError("S-transform test points must satisfy |z| <= 0.1")
    q = n / t
    diagonal = rng.stream(seed, rng.CROSS_STREAM).uniform(0.5, 2.0, size=t)
    moments_wv = np.empty((draws, 4))
    moments_vw = np.empty((draws, 4))
    moments_wishart = np.empty((draws, 4))
    for index, draw_seed in enumerate(rng.draw_seeds(seed, draws)):
        x = rng.stream(draw_seed, rng.NOISE_STREAM).standard_normal((n, t))
        w = x / np.sqrt(t)
        v = diagonal[:, None] * x.T / np.sqrt(t)
        moments_wv[index] = _moments(w @ v)
        moments_vw[index] = _moments(v @ w)
        moments_wishart[index] = _moments(w @ w.T)
    for samples in (moments_wv, moments_vw, moments_wishart):
        _check_precision(samples)
    mean_wv = np.mean(moments_wv, axis=0)
    mean_vw = np.mean(moments_vw, axis=0)
    s_wv = s_from_moments(mean_wv, z)
    s_vw = s_from_moments(mean_vw, q * z)
    residual = np.abs(s_wv - q * (1.0 + z) / (1.0 + q * z) * s_vw)
    wishart = np.abs(s_from_moments(np.mean(moments_wishart, axis=0), z) - 1.0 / (1.0 + q * z))
    logger.debug(f"S-rect check N={n}, T={t}: residuals {residual}, Wishart residuals {wishart}")
    return SRectCheckResult(
        max_residual=float(np.max(residual)),
        wishart_residual=float(np.max(wishart)),
        test_points=[float(point) for point in z],
        q=q,
        draws=draws,
        moments_wv=[float(value) for value in mean_wv],
        moments_vw=[float(value) for value in mean_vw],
    )
