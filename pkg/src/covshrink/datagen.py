"""
Synthetic data from the sandwich model Y = sqrt(C) X sqrt(A)
"""

import logging
import math

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from covshrink import config
from covshrink.exceptions import ConstructionError, DimensionError, SingularWishartError
from covshrink.linalg import as_matrix, check_symmetric, psd_sqrt, reconstruct, sym_eig
from covshrink.model.processes import (
    AutoModel,
    CrossModel,
    ExpDecayAuto,
    ExplicitCross,
    GaussianNoise,
    IdentityAuto,
    InverseWishartCross,
    NoiseDist,
    StudentTNoise,
    TwoPeakCross,
    VarmaAuto,
)
from covshrink.model.spectra import SandwichSample
from covshrink.util import rng

logger = logging.getLogger(__name__)


def frequency_grid(points: int) -> NDArray[np.float64]:
    """
    uniform grid omega_j = 2 pi j / points on [0, 2 pi)
    """
    return 2.0 * np.pi * np.arange(points) / points


def spectral_density(model: AutoModel, points: int = config.QUADRATURE_POINTS) -> NDArray[np.float64]:
    """
    Spectral density H(omega) of the auto-correlation model on the uniform frequency grid,
    normalized to unit mean so that the implied A has unit diagonal
    :param model: auto-correlation model
    :param points: number of grid points
    :return: H at omega_j = 2 pi j / points
    """
    if isinstance(model, IdentityAuto):
        return np.ones(points)
    if isinstance(model, ExpDecayAuto):
        b = model.decay
        omega = frequency_grid(points)
        density = (1.0 - b**2) / (1.0 - 2.0 * b * np.cos(omega) + b**2)
    elif isinstance(model, VarmaAuto):
        model.ensure_stationary()
        ma_transfer = np.fft.fft(np.asarray(model.ma, dtype=np.float64), n=points)
        ar_polynomial = np.concatenate(([1.0], -np.asarray(model.ar, dtype=np.float64)))
        ar_transfer = np.fft.fft(ar_polynomial, n=points)
        density = np.abs(ma_transfer) ** 2 / np.abs(ar_transfer) ** 2
    else:
        raise TypeError(f"Unknown auto-correlation model {model!r}")
    return density / np.mean(density)


def autocorrelation(model: AutoModel, t: int, points: int = config.QUADRATURE_POINTS) -> NDArray[np.float64]:
    """
    Normalized autocovariance a(0..t-1) of the model, a(0) = 1
    VARMA autocovariances are the Fourier coefficients of the spectral density.
    :param model: auto-correlation model
    :param t: number of lags
    :param points: minimal frequency grid size
    :return: a(k) for k = 0..t-1
    """
    lags = np.arange(t)
    if isinstance(model, IdentityAuto):
        return (lags == 0).astype(np.float64)
    if isinstance(model, ExpDecayAuto):
        return np.exp(-lags / model.tau)
    # the grid must be long enough that aliasing a(k) + a(M - k) stays negligible
    grid_size = max(points, 1 << math.ceil(math.log2(max(4 * t, 2))))
    density = spectral_density(model, grid_size)
    coefficients = np.fft.ifft(density).real
    return coefficients[:t] / coefficients[0]


def build_auto_toeplitz(model: AutoModel, t: int) -> NDArray[np.float64]:
    """
    Toeplitz auto-correlation matrix A_ts = a(|t - s|) with unit diagonal
    :param model: auto-correlation model
    :param t: size of the matrix
    :return: symmetric PSD T x T matrix
    """
    if t < 1:
        raise DimensionError("Auto-correlation matrix needs t >= 1", actual=t)
    if isinstance(model, VarmaAuto):
        model.ensure_stationary()
    a = autocorrelation(model, t)
    matrix = scipy.linalg.toeplitz(a)
    np.fill_diagonal(matrix, 1.0)
    if t > 1 and not isinstance(model, IdentityAuto):
        min_eigenvalue = float(scipy.linalg.eigvalsh(matrix, subset_by_index=[0, 0])[0])
        if min_eigenvalue < -config.TOEPLITZ_PSD_TOL:
            raise ConstructionError(
                f"Auto-correlation matrix of {model.label} is not PSD (min eigenvalue {min_eigenvalue:.3e})"
            )
    return matrix


def build_cross(model: CrossModel, n: int, seed: int) -> NDArray[np.float64]:
    """
    Population covariance matrix C
    :param model: cross-correlation model
    :param n: dimension N
    :param seed: seed of the inverse-Wishart draw
    :return: symmetric PSD N x N matrix
    """
    if n < 2:
        raise DimensionError("Population covariance needs n >= 2", actual=n)
    if isinstance(model, TwoPeakCross):
        n_high = math.ceil(model.fraction_high * n - 1e-9)
        values = np.concatenate((np.full(n - n_high, model.low), np.full(n_high, model.high)))
        return np.diag(values)
    if isinstance(model, InverseWishartCross):
        return _inverse_wishart(model, n, seed)
    if isinstance(model, ExplicitCross):
        matrix = as_matrix(model.matrix)
        if matrix.shape[0] != n:
            raise DimensionError("Explicit covariance has the wrong size", expected=n, actual=matrix.shape[0])
        check_symmetric(matrix)
        # validates positive semi-definiteness
        psd_sqrt(matrix)
        return 0.5 * (matrix + matrix.T)
    raise TypeError(f"Unknown cross-correlation model {model!r}")


def _inverse_wishart(model: InverseWishartCross, n: int, seed: int) -> NDArray[np.float64]:
    """
    C = (1 - q_IW) W^-1 with W = R R^T / T_IW, R of shape N x T_IW
    """
    q_iw = model.q_iw
    t_iw = math.floor(n / q_iw)
    for attempt in range(config.WISHART_MAX_ATTEMPTS):
        generator = rng.stream(seed + attempt, rng.CROSS_STREAM)
        r = generator.standard_normal((n, t_iw))
        eig = sym_eig(r @ r.T / t_iw)
        if eig.values[0] < config.WISHART_SINGULAR_REL * eig.values[-1]:
            logger.debug(f"Wishart matrix singular for seed {seed + attempt}, regenerating")
            continue
        return reconstruct(eig.vectors, (1.0 - q_iw) / eig.values)
    raise SingularWishartError(config.WISHART_MAX_ATTEMPTS, seed)


def draw_noise(noise: NoiseDist, shape: tuple[int, int], generator: np.random.Generator) -> NDArray[np.float64]:
    """
    i.i.d. entries, unit variance unless the Student-t entries are not standardized
    """
    if isinstance(noise, GaussianNoise):
        return generator.standard_normal(shape)
    if isinstance(noise, StudentTNoise):
        return generator.standard_t(noise.nu, size=shape) * noise.scale
    raise TypeError(f"Unknown noise distribution {noise!r}")


def generate_sandwich(
    cross: CrossModel,
    auto: AutoModel,
    noise: NoiseDist,
    n: int,
    t: int,
    t_total: int,
    seed: int,
) -> SandwichSample:
    """
    Draw Y = sqrt(C) X sqrt(A) with A of size t_total
    :param cross: population covariance model
    :param auto: auto-correlation model
    :param noise: distribution of the entries of X
    :param n: number of variables N
    :param t: analysis window length T
    :param t_total: total number of samples (analysis window + cross-validation folds)
    :param seed: seed of all draws
    :return: SandwichSample
    """
    if not t_total >= t >= 1:
        raise DimensionError(f"Need t_total >= t >= 1, got t={t}, t_total={t_total}")
    c_true = build_cross(cross, n, seed)
    sqrt_c = psd_sqrt(c_true)
    x = draw_noise(noise, (n, t_total), rng.stream(seed, rng.NOISE_STREAM))
    if isinstance(auto, IdentityAuto):
        y = sqrt_c @ x
    else:
        y = sqrt_c @ x @ psd_sqrt(build_auto_toeplitz(auto, t_total))
    logger.debug(f"Generated sandwich sample N={n}, T={t}, T_total={t_total}, seed={seed}")
    return SandwichSample(
        y=y, c_true=c_true, cross=cross, auto=auto, noise=noise, n=n, t=t, t_total=t_total, seed=seed
    )
