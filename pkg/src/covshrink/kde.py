"""
Epanechnikov kernel estimates of the sample eigenvalue density and its Hilbert transform

Both are sums of N kernels centered at the sample eigenvalues with local scale b * lambda_j
and the global bandwidth b = T^(-1/3). The Hilbert transform follows the convention
h(x) = (1/pi) PV int rho(y) / (x - y) dy.
"""

import logging

import numpy as np
from numpy.typing import ArrayLike, NDArray

from covshrink import config
from covshrink.exceptions import SpectrumDomainError
from covshrink.model.spectra import SpectralEstimate

logger = logging.getLogger(__name__)

SQRT5 = config.KERNEL_HALF_WIDTH
_DENSITY_SCALE = 3.0 / (4.0 * SQRT5)


def epanechnikov_density(x: ArrayLike) -> NDArray[np.float64] | float:
    """
    Epanechnikov kernel with unit variance, supported on [-sqrt(5), sqrt(5)]
    """
    values = np.asarray(x, dtype=np.float64)
    result = _DENSITY_SCALE * np.maximum(0.0, 1.0 - values**2 / 5.0)
    return float(result) if result.ndim == 0 else result


def epanechnikov_hilbert(x: ArrayLike) -> NDArray[np.float64] | float:
    """
    Hilbert transform of the Epanechnikov kernel
    the logarithmic term is zero at x = +-sqrt(5)
    """
    values = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_term = np.log(np.abs((values - SQRT5) / (values + SQRT5)))
    edge = np.isclose(np.abs(values), SQRT5, rtol=0.0, atol=1e-15)
    log_term = np.where(edge, 0.0, log_term)
    result = 3.0 * values / (10.0 * np.pi) - _DENSITY_SCALE / np.pi * (1.0 - values**2 / 5.0) * log_term
    return float(result) if result.ndim == 0 else result


def bandwidth_for(t: int) -> float:
    """
    global bandwidth b = T^(-1/3)
    """
    if t < 1:
        raise ValueError(f"Number of samples must be positive, got {t}")
    if round(t ** (1.0 / 3.0)) ** 3 == t:
        # exact for perfect cubes, e.g. T = 1000 gives b = 0.1
        return 1.0 / round(t ** (1.0 / 3.0))
    return float(t**config.BANDWIDTH_EXPONENT)


def clip_eigenvalues(lambdas: ArrayLike) -> NDArray[np.float64]:
    """
    Clip eigenvalues below 1e-12 * max to that floor, the kernel scale b * lambda degenerates at 0
    """
    values = np.asarray(lambdas, dtype=np.float64).reshape(-1)
    floor = config.EIGENVALUE_CLIP_REL * float(np.max(values))
    if floor <= 0:
        raise SpectrumDomainError(float(np.max(values)))
    return np.maximum(values, floor)


def _kernel_sum(kernel, centers: NDArray[np.float64], bandwidth: float, x: ArrayLike) -> NDArray[np.float64]:
    points = np.asarray(x, dtype=np.float64).reshape(-1)
    scales = bandwidth * centers
    arguments = (points[:, None] - centers[None, :]) / scales[None, :]
    return np.mean(kernel(arguments) / scales[None, :], axis=1)


def kernel_density(lambdas: ArrayLike, bandwidth: float, x: ArrayLike) -> NDArray[np.float64]:
    """
    Kernel density estimate rho_E at the points x
    :param lambdas: kernel centers (positive eigenvalues)
    :param bandwidth: global bandwidth b
    :param x: evaluation points
    :return: density values
    """
    return _kernel_sum(epanechnikov_density, clip_eigenvalues(lambdas), bandwidth, x)


def kernel_hilbert(lambdas: ArrayLike, bandwidth: float, x: ArrayLike) -> NDArray[np.float64]:
    """
    Kernel estimate of the Hilbert transform h_E at the points x
    """
    return _kernel_sum(epanechnikov_hilbert, clip_eigenvalues(lambdas), bandwidth, x)


def estimate_spectrum(lambdas: ArrayLike, t: int) -> SpectralEstimate:
    """
    Estimate rho_E and h_E at the sample eigenvalues (the self term j = i included)
    :param lambdas: ascending sample eigenvalues
    :param t: number of samples T
    :return: SpectralEstimate
    """
    values = clip_eigenvalues(lambdas)
    if np.any(values <= 0):
        raise SpectrumDomainError(float(np.min(values)))
    bandwidth = bandwidth_for(t)
    rho = kernel_density(values, bandwidth, values)
    hilb = kernel_hilbert(values, bandwidth, values)
    logger.debug(f"Kernel estimate of {values.size} eigenvalues with bandwidth {bandwidth:.4f}")
    return SpectralEstimate(lambdas=values, rho=np.maximum(rho, 0.0), hilb=hilb, bandwidth=bandwidth, n_samples=t)


def compute_u(spec: SpectralEstimate, q: float) -> NDArray[np.complex128]:
    """
    u_i = q m_E(lambda_i - i0+) = alpha_i + i beta_i with
    alpha_i = q (pi lambda_i h_E(lambda_i) - 1) and beta_i = q pi lambda_i rho_E(lambda_i)
    :param spec: kernel estimate of the sample spectrum
    :param q: ratio N / T
    :return: complex array u, Im u >= 0
    """
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    alpha = q * (np.pi * spec.lambdas * spec.hilb - 1.0)
    beta = np.maximum(q * np.pi * spec.lambdas * spec.rho, 0.0)
    return alpha + 1j * beta


def density_grid(lambdas: ArrayLike, bandwidth: float, points: int = config.DENSITY_GRID_POINTS) -> NDArray[np.float64]:
    """
    Grid covering the support of the kernel density, [min(1 - sqrt5 b) , max(1 + sqrt5 b)] * lambda
    """
    values = clip_eigenvalues(lambdas)
    lower = float(np.min(values)) * (1.0 - SQRT5 * bandwidth)
    upper = float(np.max(values)) * (1.0 + SQRT5 * bandwidth)
    return np.linspace(lower, upper, points)
