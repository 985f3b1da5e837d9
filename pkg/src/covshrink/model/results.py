"""
Results of the estimation, fitting and verification stages
"""

from typing import Annotated

import numpy as np
from pydantic import BaseModel, Field, model_validator

from covshrink.model.methods import FitFamily, MethodSpec
from covshrink.model.spectra import ArrayModel


class ShrinkageResult(ArrayModel):
    """
    rotationally invariant estimator Xi = sum_i xi_i v_i v_i^T in the sample eigenbasis
    """

    lambdas: np.ndarray
    xis: np.ndarray
    method: MethodSpec
    xi_matrix: np.ndarray

    @model_validator(mode="after")
    def check_values(self) -> "ShrinkageResult":
        if self.lambdas.shape != self.xis.shape:
            raise ValueError("lambdas and xis must have the same length")
        if np.any(self.xis < 0):
            raise ValueError("shrunk eigenvalues must be non-negative")
        return self


class OracleResult(ArrayModel):
    """
    cross-validation oracle per eigenvalue rank
    """

    xi_raw: np.ndarray
    xi_isotonic: np.ndarray
    lambdas_ref: np.ndarray

    @model_validator(mode="after")
    def check_lengths(self) -> "OracleResult":
        if not self.xi_raw.shape == self.xi_isotonic.shape == self.lambdas_ref.shape:
            raise ValueError("oracle vectors must have equal lengths")
        return self

    @property
    def size(self) -> int:
        return int(self.xi_raw.shape[0])


class FitSpec(ArrayModel):
    """
    parameter family to fit and the oracle it is fitted to
    """

    family: FitFamily
    objective_ref: OracleResult


class FitResult(BaseModel):
    """
    outcome of a brute-force grid fit
    trace holds every evaluated parameter vector with its objective in evaluation order
    """

    family: str
    best_params: dict[str, float]
    objective: float
    evaluations: int
    trace: list[tuple[dict[str, float], float]] = Field(default_factory=list)
    t_eff: float | None = None


class MetricReport(BaseModel):
    """
    squared Frobenius losses Tr(X - C)^2 / N and their ratio
    """

    frobenius_ratio: Annotated[float, Field(ge=0)]
    mse_estimator: float
    mse_sample: float


class MpCheckResult(BaseModel):
    """
    residuals of the generalized Marčenko-Pastur equation at the test points
    """

    max_residual: float
    residuals: list[float]
    test_points: list[tuple[float, float]] = Field(description="real and imaginary part of each z")
    q: float
    draws: int


class SRectCheckResult(BaseModel):
    """
    residuals of the rectangular S-transform relation and of the Wishart closed form
    """

    max_residual: float
    wishart_residual: float
    test_points: list[float]
    q: float
    draws: int
    moments_wv: list[float]
    moments_vw: list[float]
