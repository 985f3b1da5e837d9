"""
Oracle eigenvalues: exact (population covariance known) and moving-window cross-validated
"""

import logging

import numpy as np
import scipy.optimize
from numpy.typing import ArrayLike, NDArray

from covshrink.exceptions import DimensionError, WindowError
from covshrink.linalg import as_matrix, check_symmetric, quadratic_forms, sample_covariance, sym_eig
from covshrink.model.experiment import CvConfig
from covshrink.model.results import OracleResult
from covshrink.model.spectra import SymEig

logger = logging.getLogger(__name__)


def oracle_exact(eig_sample: SymEig, c_true: ArrayLike) -> NDArray[np.float64]:
    """
    oracle xi_i = <lambda_i|C|lambda_i>
    :param eig_sample: eigendecomposition of the sample estimator
    :param c_true: population covariance
    :return: oracle eigenvalue per sample eigenvector
    """
    c = as_matrix(c_true)
    if c.shape[0] != eig_sample.size:
        raise DimensionError("Population covariance does not match the sample dimension", eig_sample.size, c.shape[0])
    check_symmetric(c)
    return quadratic_forms(eig_sample.vectors, c)


def oracle_mwcv(y: ArrayLike, cfg: CvConfig) -> NDArray[np.float64]:
    """
    Moving-window cross-validation oracle
    For each fold the eigenvectors of the training window are tested against the sample estimator
    of the following T_out columns; contributions are paired by ascending training eigenvalue rank
    and averaged over the folds in fold order.
    :param y: data matrix N x T_total
    :param cfg: cross-validation layout
    :return: oracle estimate per eigenvalue rank
    """
    data = as_matrix(y, square=False)
    if data.shape[1] < cfg.required_samples:
        raise WindowError(data.shape[1], cfg.required_samples)
    total = np.zeros(data.shape[0])
    for fold in range(cfg.k_folds):
        train = sym_eig(sample_covariance(data[:, cfg.train_columns(fold)]))
        total += quadratic_forms(train.vectors, sample_covariance(data[:, cfg.test_columns(fold)]))
    logger.debug(f"Cross-validation oracle over {cfg.k_folds} folds of width {cfg.window} + {cfg.t_out}")
    return total / cfg.k_folds


def isotonic_fit(xi_raw: ArrayLike, lambdas: ArrayLike) -> NDArray[np.float64]:
    """
    Least squares nondecreasing fit (pool adjacent violators, equal weights)
    :param xi_raw: values ordered by ascending lambdas
    :param lambdas: ascending eigenvalues the values belong to
    :return: nondecreasing fit
    """
    values = np.asarray(xi_raw, dtype=np.float64).reshape(-1)
    order = np.asarray(lambdas, dtype=np.float64).reshape(-1)
    if values.shape != order.shape:
        raise DimensionError("Oracle and eigenvalue vectors differ in length", order.shape[0], values.shape[0])
    if np.any(np.diff(order) < 0):
        raise ValueError("lambdas must be ascending")
    if values.size == 0:
        return values
    return np.asarray(scipy.optimize.isotonic_regression(values, increasing=True).x, dtype=np.float64)


def estimate_oracle(y: ArrayLike, cfg: CvConfig, lambdas_ref: ArrayLike) -> OracleResult:
    """
    Cross-validation oracle and its isotonic regression, paired by rank with the given eigenvalues
    :param y: data matrix N x T_total
    :param cfg: cross-validation layout
    :param lambdas_ref: ascending eigenvalues of the full analysis window
    :return: OracleResult
    """
    reference = np.asarray(lambdas_ref, dtype=np.float64).reshape(-1)
    xi_raw = oracle_mwcv(y, cfg)
    if xi_raw.shape != reference.shape:
        raise DimensionError(
            "Reference spectrum does not match the data dimension", xi_raw.shape[0], reference.shape[0]
        )
    return OracleResult(xi_raw=xi_raw, xi_isotonic=isotonic_fit(xi_raw, reference), lambdas_ref=reference)
