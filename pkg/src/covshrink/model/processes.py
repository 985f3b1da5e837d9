"""
Models of the data-generating process Y = sqrt(C) X sqrt(A)
"""

import math
from typing import Annotated, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from covshrink.exceptions import StationarityError


class FrozenModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class TwoPeakCross(FrozenModel):
    """
    population covariance with two distinct eigenvalues
    """

    kind: Literal["two-peak"] = "two-peak"
    low: Annotated[float, Field(gt=0)] = 1.0
    high: float = 3.0
    fraction_high: Annotated[float, Field(ge=0, le=1)] = 0.5

    @model_validator(mode="after")
    def check_order(self) -> "TwoPeakCross":
        if self.high < self.low:
            raise ValueError(f"high ({self.high}) must not be below low ({self.low})")
        return self


class InverseWishartCross(FrozenModel):
    """
    population covariance with inverse-Wishart distributed eigenvalues
    """

    kind: Literal["inverse-wishart"] = "inverse-wishart"
    kappa: Annotated[float, Field(gt=0)]

    @property
    def q_iw(self) -> float:
        return 1.0 / (1.0 + 2.0 * self.kappa)


class ExplicitCross(FrozenModel):
    """
    explicitly given population covariance matrix
    """

    kind: Literal["explicit"] = "explicit"
    matrix: list[list[float]]

    @field_validator("matrix")
    @classmethod
    def check_square(cls, value: list[list[float]]) -> list[list[float]]:
        n = len(value)
        if n == 0 or any(len(row) != n for row in value):
            raise ValueError("explicit covariance must be a non-empty square matrix")
        if not all(math.isfinite(entry) for row in value for entry in row):
            raise ValueError("explicit covariance must be finite")
        return value


CrossModel = Annotated[TwoPeakCross | InverseWishartCross | ExplicitCross, Field(discriminator="kind")]


class IdentityAuto(FrozenModel):
    """
    uncorrelated samples, A = I
    """

    kind: Literal["identity"] = "identity"

    @property
    def label(self) -> str:
        return "identity"


class ExpDecayAuto(FrozenModel):
    """
    exponentially decaying auto-correlations A_ts = exp(-|t-s|/tau)
    """

    kind: Literal["exp-decay"] = "exp-decay"
    tau: Annotated[float, Field(gt=0)]

    @property
    def gamma(self) -> float:
        """
        gamma = coth(1/tau)
        """
        return 1.0 / math.tanh(1.0 / self.tau)

    @property
    def decay(self) -> float:
        """
        lag-one correlation exp(-1/tau)
        """
        return math.exp(-1.0 / self.tau)

    @property
    def label(self) -> str:
        return f"exp-decay(tau={self.tau:g})"


class VarmaAuto(FrozenModel):
    """
    auto-correlations of the VARMA(r1, r2) process
    Y_t = sum_b ar[b-1] Y_{t-b} + sum_a ma[a] eps_{t-a}
    """

    kind: Literal["varma"] = "varma"
    ar: list[float] = Field(default_factory=list, description="AR coefficients b_1..b_r1")
    ma: list[float] = Field(default_factory=lambda: [1.0], description="MA coefficients a_0..a_r2")

    @field_validator("ar", "ma")
    @classmethod
    def check_finite(cls, value: list[float]) -> list[float]:
        if not all(math.isfinite(coefficient) for coefficient in value):
            raise ValueError("VARMA coefficients must be finite")
        return value

    @model_validator(mode="after")
    def check_process(self) -> "VarmaAuto":
        if not any(coefficient != 0 for coefficient in self.ma):
            raise ValueError("at least one MA coefficient must be nonzero")
        self.ensure_stationary()
        return self

    def ar_root_modulus(self) -> float:
        """
        smallest modulus of the roots of 1 - sum_b ar[b-1] z^b (inf without AR part)
        """
        if not any(self.ar):
            return math.inf
        # numpy.roots expects the highest degree first
        coefficients = [-b for b in reversed(self.ar)] + [1.0]
        while coefficients and coefficients[0] == 0:
            coefficients.pop(0)
        roots = np.roots(coefficients)
        return float(np.min(np.abs(roots))) if roots.size else math.inf

    def ensure_stationary(self):
        """
        raise StationarityError if the AR polynomial has roots on or inside the unit circle
        """
        modulus = self.ar_root_modulus()
        if modulus <= 1.0 + 1e-12:
            raise StationarityError(list(self.ar), modulus)

    @property
    def label(self) -> str:
        return f"varma(ar={list(self.ar)}, ma={list(self.ma)})"

    @classmethod
    def from_exp_decay(cls, tau: float) -> "VarmaAuto":
        """
        VAR(1) representation of the exponential decay model
        """
        b1 = math.exp(-1.0 / tau)
        return cls(ar=[b1], ma=[math.sqrt(1.0 - b1**2)])


AutoModel = Annotated[IdentityAuto | ExpDecayAuto | VarmaAuto, Field(discriminator="kind")]


class GaussianNoise(FrozenModel):
    kind: Literal["gaussian"] = "gaussian"


class StudentTNoise(FrozenModel):
    """
    Student-t entries, by default standardized to unit variance
    Without standardization the entries have variance nu / (nu - 2) and E estimates that multiple of C.
    """

    kind: Literal["student-t"] = "student-t"
    nu: Annotated[float, Field(gt=2)]
    standardize: bool = True

    @property
    def scale(self) -> float:
        return math.sqrt((self.nu - 2.0) / self.nu) if self.standardize else 1.0


NoiseDist = Annotated[GaussianNoise | StudentTNoise, Field(discriminator="kind")]
