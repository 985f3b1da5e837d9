"""
Estimators that can be requested in an experiment
"""

import math
from typing import Annotated, Literal

from pydantic import Field, field_validator

from covshrink import config
from covshrink.model.processes import AutoModel, FrozenModel


class MethodBase(FrozenModel):
    label: Annotated[
        str | None,
        Field(pattern=r"^[A-Za-z0-9_.-]+$", description="name used in reports and file names, defaults to the kind"),
    ] = None

    @property
    def name(self) -> str:
        return self.label or getattr(self, "kind")


class LedoitPecheMethod(MethodBase):
    """
    Ledoit-Péché shrinkage for uncorrelated samples
    """

    kind: Literal["ledoit-peche"] = "ledoit-peche"


class EffectiveLpMethod(MethodBase):
    """
    Ledoit-Péché shrinkage with the effective sample count T_eff = T (1 - exp(-1/tau_eff))
    """

    kind: Literal["effective-lp"] = "effective-lp"
    tau_eff: Annotated[float, Field(gt=0)]


class LinearMethod(MethodBase):
    """
    linear shrinkage towards the identity with a given coefficient
    """

    kind: Literal["linear"] = "linear"
    alpha_s: Annotated[float, Field(ge=0, le=1)]


class CorrelatedMethod(MethodBase):
    """
    nonlinear shrinkage for samples with the given auto-correlation model
    """

    kind: Literal["correlated"] = "correlated"
    auto: AutoModel


class OracleExactMethod(MethodBase):
    """
    exact oracle, requires the population covariance
    """

    kind: Literal["oracle-exact"] = "oracle-exact"


class OracleMwcvMethod(MethodBase):
    """
    moving-window cross-validation oracle
    """

    kind: Literal["oracle-mwcv"] = "oracle-mwcv"


class IsotonicMethod(MethodBase):
    """
    isotonic regression of the cross-validation oracle
    """

    kind: Literal["isotonic"] = "isotonic"


def _check_grid(value: list[float]) -> list[float]:
    if not value:
        raise ValueError("grid must not be empty")
    if not all(math.isfinite(point) and point > 0 for point in value):
        raise ValueError("grid points must be finite and positive")
    return value


class ExpDecayFitMethod(MethodBase):
    """
    exponential decay shrinkage with tau fitted to the cross-validation oracle
    """

    kind: Literal["exp-decay-fit"] = "exp-decay-fit"
    grid: list[float] = Field(default_factory=lambda: list(config.DEFAULT_TAU_GRID))

    @field_validator("grid")
    @classmethod
    def check_grid(cls, value: list[float]) -> list[float]:
        return _check_grid(value)


class EffectiveLpFitMethod(MethodBase):
    """
    effective Ledoit-Péché shrinkage with tau_eff fitted to the cross-validation oracle
    """

    kind: Literal["effective-lp-fit"] = "effective-lp-fit"
    grid: list[float] = Field(default_factory=lambda: list(config.DEFAULT_TAU_GRID))

    @field_validator("grid")
    @classmethod
    def check_grid(cls, value: list[float]) -> list[float]:
        return _check_grid(value)


class VarmaFitMethod(MethodBase):
    """
    VARMA shrinkage with coefficients fitted by brute force over a grid
    ar_grids[b] lists the candidates of b_{b+1}, ma_grids[a] those of a_a
    """

    kind: Literal["varma-fit"] = "varma-fit"
    ar_grids: list[list[float]] = Field(default_factory=lambda: [list(grid) for grid in config.DEFAULT_VARMA_AR_GRIDS])
    ma_grids: list[list[float]] = Field(default_factory=lambda: [list(grid) for grid in config.DEFAULT_VARMA_MA_GRIDS])
    quadrature_points: int = config.FIT_QUADRATURE_POINTS

    @field_validator("ar_grids", "ma_grids")
    @classmethod
    def check_grids(cls, value: list[list[float]]) -> list[list[float]]:
        for grid in value:
            if not grid or not all(math.isfinite(point) for point in grid):
                raise ValueError("every coefficient grid must be non-empty and finite")
        return value

    @field_validator("ma_grids")
    @classmethod
    def check_ma(cls, value: list[list[float]]) -> list[list[float]]:
        if not value:
            raise ValueError("at least the a_0 grid is required")
        return value


ShrinkMethod = Annotated[
    CorrelatedMethod | LedoitPecheMethod | EffectiveLpMethod | LinearMethod, Field(discriminator="kind")
]

FitFamily = Annotated[ExpDecayFitMethod | EffectiveLpFitMethod | VarmaFitMethod, Field(discriminator="kind")]

MethodSpec = Annotated[
    CorrelatedMethod
    | LedoitPecheMethod
    | EffectiveLpMethod
    | LinearMethod
    | OracleExactMethod
    | OracleMwcvMethod
    | IsotonicMethod
    | ExpDecayFitMethod
    | EffectiveLpFitMethod
    | VarmaFitMethod,
    Field(discriminator="kind"),
]

ORACLE_KINDS = {"oracle-mwcv", "isotonic", "exp-decay-fit", "effective-lp-fit", "varma-fit"}
