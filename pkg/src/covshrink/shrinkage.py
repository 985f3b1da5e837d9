"""
Nonlinear and linear shrinkage of sample eigenvalues
"""

import logging
import math

import numpy as np
from numpy.typing import ArrayLike, NDArray

from covshrink import config
from covshrink.exceptions import DegenerateSampleSizeError, DimensionError
from covshrink.kde import compute_u
from covshrink.linalg import reconstruct
from covshrink.model.methods import (
    CorrelatedMethod,
    EffectiveLpMethod,
    LedoitPecheMethod,
    LinearMethod,
    MethodSpec,
    ShrinkMethod,
)
from covshrink.model.results import ShrinkageResult
from covshrink.model.spectra import SpectralEstimate, SymEig
from covshrink.transforms import TransformContext, chi, s_transform

logger = logging.getLogger(__name__)


def _limit_arguments(u: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """
    lift points with vanishing imaginary part to alpha + i delta
    """
    degenerate = u.imag < config.DEGENERATE_BETA
    if np.any(degenerate):
        logger.debug(f"{int(np.sum(degenerate))} eigenvalues with vanishing density, using the limit at delta")
    return np.where(degenerate, u.real + 1j * config.LIMIT_DELTA, u)


def shrink_correlated(spec: SpectralEstimate, q: float, ctx: TransformContext) -> NDArray[np.float64]:
    """
    Nonlinear shrinkage for auto-correlated samples xi_i = lambda_i Im chi_A(u_i) / Im u_i
    :param spec: kernel estimate of the sample spectrum
    :param q: ratio N / T
    :param ctx: transform context of the assumed auto-correlation model
    :return: shrunk eigenvalues, clipped at 0
    """
    u = _limit_arguments(compute_u(spec, q))
    chi_values = np.asarray(chi(ctx, u), dtype=np.complex128).reshape(-1)
    return np.maximum(spec.lambdas * chi_values.imag / u.imag, 0.0)


def shrinkage_factor_from_s(ctx: TransformContext, u: ArrayLike) -> NDArray[np.float64]:
    """
    xi / lambda written through the S-transform, Im(u S_A(u) / (1 + u)) / Im u
    """
    values = _limit_arguments(np.asarray(u, dtype=np.complex128).reshape(-1))
    s_values = np.asarray(s_transform(ctx, values), dtype=np.complex128).reshape(-1)
    return (values * s_values / (1.0 + values)).imag / values.imag


def _ledoit_peche(lambdas: NDArray[np.float64], u: NDArray[np.complex128]) -> NDArray[np.float64]:
    return lambdas / ((u.real + 1.0) ** 2 + u.imag**2)


def shrink_lp(spec: SpectralEstimate, q: float) -> NDArray[np.float64]:
    """
    Ledoit-Péché shrinkage xi_i = lambda_i / |1 + u_i|^2
    :param spec: kernel estimate of the sample spectrum
    :param q: ratio N / T
    :return: shrunk eigenvalues
    """
    return _ledoit_peche(spec.lambdas, compute_u(spec, q))


def effective_sample_count(t: int, tau_eff: float) -> float:
    """
    T_eff = T (1 - exp(-1/tau_eff))
    """
    if tau_eff <= 0:
        raise ValueError(f"tau_eff must be positive, got {tau_eff}")
    return -t * math.expm1(-1.0 / tau_eff)


def shrink_lp_effective(spec: SpectralEstimate, n: int, t: int, tau_eff: float) -> NDArray[np.float64]:
    """
    Ledoit-Péché shrinkage with the effective number of samples T_eff
    u is linear in q, so u_eff = (q_eff / q) u = (T / T_eff) u
    :param spec: kernel estimate of the sample spectrum
    :param n: number of variables N
    :param t: number of samples T
    :param tau_eff: effective decay time
    :return: shrunk eigenvalues
    """
    t_eff = effective_sample_count(t, tau_eff)
    if t_eff < n * config.MIN_EFFECTIVE_FRACTION:
        raise DegenerateSampleSizeError(t_eff, n)
    u_eff = compute_u(spec, n / t) * (t / t_eff)
    return _ledoit_peche(spec.lambdas, u_eff)


def shrink_linear(lambdas: ArrayLike, alpha_s: float) -> NDArray[np.float64]:
    """
    linear shrinkage towards the identity xi_i = alpha_s lambda_i + 1 - alpha_s
    """
    if not 0.0 <= alpha_s <= 1.0:
        raise ValueError(f"alpha_s must be in [0, 1], got {alpha_s}")
    return alpha_s * np.asarray(lambdas, dtype=np.float64) + 1.0 - alpha_s


def shrink(method: ShrinkMethod, spec: SpectralEstimate, q: float) -> NDArray[np.float64]:
    """
    Apply the given shrinkage method
    :param method: shrinkage method
    :param spec: kernel estimate of the sample spectrum, spec.n_samples is T
    :param q: ratio N / T
    :return: shrunk eigenvalues
    """
    if isinstance(method, CorrelatedMethod):
        return shrink_correlated(spec, q, TransformContext(model=method.auto))
    if isinstance(method, LedoitPecheMethod):
        return shrink_lp(spec, q)
    if isinstance(method, EffectiveLpMethod):
        return shrink_lp_effective(spec, spec.size, spec.n_samples, method.tau_eff)
    if isinstance(method, LinearMethod):
        return shrink_linear(spec.lambdas, method.alpha_s)
    raise TypeError(f"{method!r} is not a shrinkage method")


def build_estimator(eig: SymEig, xis: ArrayLike, method: MethodSpec) -> ShrinkageResult:
    """
    Rotationally invariant estimator with the sample eigenvectors and the given eigenvalues
    :param eig: eigendecomposition of the sample estimator
    :param xis: new eigenvalue per sample eigenvector
    :param method: method that produced xis
    :return: ShrinkageResult
    """
    values = np.asarray(xis, dtype=np.float64).reshape(-1)
    if values.shape[0] != eig.size:
        raise DimensionError("Number of shrunk eigenvalues does not match the spectrum", eig.size, values.shape[0])
    return ShrinkageResult(
        lambdas=eig.values, xis=values, method=method, xi_matrix=reconstruct(eig.vectors, values)
    )
