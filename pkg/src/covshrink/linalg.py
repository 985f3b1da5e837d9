"""
Dense symmetric matrix primitives
"""

import logging
import re

import numpy as np
import scipy.linalg
from numpy.typing import ArrayLike, NDArray

from covshrink import config
from covshrink.exceptions import DimensionError, EigenSolverError, NotPositiveSemidefiniteError, SymmetryError
from covshrink.model.spectra import SymEig

logger = logging.getLogger(__name__)


def as_matrix(m: ArrayLike, square: bool = True) -> NDArray[np.float64]:
    """
    Convert input to a finite 2D float array
    :param m: matrix like input
    :param square: if True the matrix must be square
    :return: float64 array
    """
    matrix = np.asarray(m, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise DimensionError("Expected a non-empty 2D matrix", actual=matrix.shape)
    if square and matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(
            "Expected a square matrix", expected=(matrix.shape[0], matrix.shape[0]), actual=matrix.shape
        )
    if not np.all(np.isfinite(matrix)):
        raise DimensionError("Matrix contains non-finite entries")
    return matrix


def check_symmetric(m: NDArray[np.float64], tolerance: float = config.SYMMETRY_TOL):
    """
    Raise SymmetryError if max|m_ij - m_ji| exceeds the tolerance
    """
    asymmetry = float(np.max(np.abs(m - m.T)))
    if asymmetry >= tolerance:
        raise SymmetryError(asymmetry, tolerance)


def sym_eig(m: ArrayLike) -> SymEig:
    """
    Eigendecomposition of a real symmetric matrix
    :param m: square symmetric matrix
    :return: ascending eigenvalues and orthonormal eigenvectors (columns)
    """
    matrix = as_matrix(m)
    check_symmetric(matrix)
    symmetric = 0.5 * (matrix + matrix.T)
    try:
        values, vectors = scipy.linalg.eigh(symmetric, driver="evd")
    except np.linalg.LinAlgError as exc:
        match = re.search(r"(\d+)", str(exc))
        raise EigenSolverError(int(match.group(1)) if match else -1, str(exc)) from exc
    # LAPACK already sorts ascending, the stable sort only pins down the order of ties
    order = np.argsort(values, kind="stable")
    return SymEig(values=values[order], vectors=np.ascontiguousarray(vectors[:, order]))


def reconstruct(eig_vectors: ArrayLike, new_values: ArrayLike) -> NDArray[np.float64]:
    """
    Spectral reconstruction sum_i new_values[i] v_i v_i^T
    :param eig_vectors: orthonormal eigenvectors as columns
    :param new_values: new eigenvalue per column
    :return: symmetric matrix
    """
    vectors = as_matrix(eig_vectors)
    values = np.asarray(new_values, dtype=np.float64).reshape(-1)
    if values.shape[0] != vectors.shape[1]:
        raise DimensionError(
            "Number of values does not match number of eigenvectors", vectors.shape[1], values.shape[0]
        )
    result = (vectors * values) @ vectors.T
    return 0.5 * (result + result.T)


def psd_sqrt(m: ArrayLike) -> NDArray[np.float64]:
    """
    Symmetric square root of a positive semi-definite matrix
    Tiny negative eigenvalues (above -1e-10 * max eigenvalue) are clipped to zero.
    :param m: symmetric PSD matrix
    :return: S with S @ S = m
    """
    eig = sym_eig(m)
    max_value = float(np.max(np.abs(eig.values)))
    threshold = -config.PSD_CLIP_REL * max_value
    min_value = float(eig.values[0])
    if min_value < threshold:
        raise NotPositiveSemidefiniteError(min_value, threshold)
    clipped = np.clip(eig.values, 0.0, None)
    return reconstruct(eig.vectors, np.sqrt(clipped))


def sample_covariance(y: ArrayLike) -> NDArray[np.float64]:
    """
    Sample estimator E = (1/T) Y Y^T of an N x T data matrix (no demeaning)
    """
    data = as_matrix(y, square=False)
    e = data @ data.T / data.shape[1]
    return 0.5 * (e + e.T)


def quadratic_forms(vectors: NDArray[np.float64], m: NDArray[np.float64]) -> NDArray[np.float64]:
    """
    v_i^T m v_i for every column v_i
    """
    return np.sum(vectors * (m @ vectors), axis=0)
