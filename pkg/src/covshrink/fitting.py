"""
Brute-force fit of shrinkage parameters to the cross-validation oracle

The objective is the mean squared deviation between the shrinkage curve and the oracle
estimate; the population covariance is never used.
"""

import itertools
import logging
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime

import numpy as np
from numpy.typing import NDArray

from covshrink.exceptions import CovShrinkError, FitError
from covshrink.model.methods import EffectiveLpFitMethod, ExpDecayFitMethod, FitFamily, VarmaFitMethod
from covshrink.model.processes import ExpDecayAuto, VarmaAuto
from covshrink.model.results import FitResult, FitSpec
from covshrink.model.spectra import SpectralEstimate
from covshrink.shrinkage import effective_sample_count, shrink_correlated, shrink_lp_effective
from covshrink.transforms import TransformContext

logger = logging.getLogger(__name__)

Params = dict[str, float]


def parameter_grid(family: FitFamily) -> list[Params]:
    """
    All parameter vectors of the family in ascending lexicographic order
    VARMA vectors are ordered (a_0, a_1, ..., b_1, ...).
    """
    if isinstance(family, ExpDecayFitMethod):
        return [{"tau": tau} for tau in sorted(set(family.grid))]
    if isinstance(family, EffectiveLpFitMethod):
        return [{"tau_eff": tau} for tau in sorted(set(family.grid))]
    if isinstance(family, VarmaFitMethod):
        names = [f"a{index}" for index in range(len(family.ma_grids))]
        names += [f"b{index + 1}" for index in range(len(family.ar_grids))]
        axes = [sorted(set(grid)) for grid in family.ma_grids + family.ar_grids]
        return [dict(zip(names, point, strict=True)) for point in itertools.product(*axes)]
    raise TypeError(f"Unknown fit family {family!r}")


def shrinkage_curve(family: FitFamily, params: Params, spec: SpectralEstimate, q: float) -> NDArray[np.float64]:
    """
    shrunk eigenvalues of the family at the given parameters
    """
    if isinstance(family, ExpDecayFitMethod):
        return shrink_correlated(spec, q, TransformContext(model=ExpDecayAuto(tau=params["tau"])))
    if isinstance(family, EffectiveLpFitMethod):
        return shrink_lp_effective(spec, spec.size, spec.n_samples, params["tau_eff"])
    if isinstance(family, VarmaFitMethod):
        ma = [value for name, value in params.items() if name.startswith("a")]
        ar = [value for name, value in params.items() if name.startswith("b")]
        ctx = TransformContext(model=VarmaAuto(ar=ar, ma=ma), quadrature_points=family.quadrature_points)
        return shrink_correlated(spec, q, ctx)
    raise TypeError(f"Unknown fit family {family!r}")


def _objective(
    family: FitFamily, spec: SpectralEstimate, q: float, reference: NDArray[np.float64]
) -> Callable[[Params], float]:
    def evaluate(params: Params) -> float:
        try:
            xis = shrinkage_curve(family, params, spec, q)
        except (CovShrinkError, ValueError) as exc:
            logger.debug(f"{family.kind} fit: {params} failed with {exc}")
            return np.inf
        value = float(np.mean((xis - reference) ** 2))
        return value if np.isfinite(value) else np.inf

    return evaluate


def fit_shrinkage_params(spec_data: SpectralEstimate, q: float, fit: FitSpec, max_workers: int = 1) -> FitResult:
    """
    Fit the parameters of the family by exhaustive evaluation over its grid
    Ties are broken towards the lexicographically smallest parameter vector.
    :param spec_data: kernel estimate of the sample spectrum
    :param q: ratio N / T
    :param fit: family and oracle to fit to
    :param max_workers: number of threads evaluating grid points
    :return: FitResult
    """
    reference = fit.objective_ref.xi_raw
    if reference.shape[0] != spec_data.size:
        raise ValueError(f"Oracle has {reference.shape[0]} values but the spectrum {spec_data.size}")
    family = fit.family
    grid = parameter_grid(family)
    start = datetime.now()
    evaluate = _objective(family, spec_data, q, reference)
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        objectives = list(executor.map(evaluate, grid))
    trace = list(zip(grid, objectives, strict=True))
    best = int(np.argmin(objectives))
    if not np.isfinite(objectives[best]):
        raise FitError(family.kind, len(grid))
    best_params = grid[best]
    logger.debug(
        f"{family.kind} fit over {len(grid)} grid points took {(datetime.now() - start).total_seconds():.2f}s, "
        f"best {best_params} with objective {objectives[best]:.4g}"
    )
    t_eff = None
    if isinstance(family, EffectiveLpFitMethod):
        t_eff = effective_sample_count(spec_data.n_samples, best_params["tau_eff"])
    return FitResult(
        family=family.kind,
        best_params=best_params,
        objective=objectives[best],
        evaluations=len(grid),
        trace=trace,
        t_eff=t_eff,
    )
