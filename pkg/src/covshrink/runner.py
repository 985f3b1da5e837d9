"""
End-to-end synthetic experiments
"""

import logging
from collections.abc import Callable
from concurrent.futures import Future, ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pandas as pd
from numpy.typing import NDArray
from pydantic import BaseModel, Field

from covshrink import __version__, config
from covshrink.datagen import generate_sandwich
from covshrink.exceptions import CovShrinkError, ExperimentFailedError
from covshrink.fitting import fit_shrinkage_params, shrinkage_curve
from covshrink.freeprob import frobenius_ratio
from covshrink.kde import bandwidth_for, density_grid, estimate_spectrum, kernel_density
from covshrink.linalg import sym_eig
from covshrink.model.experiment import ExperimentConfig, ExperimentReport, GenerationInfo, MethodSummary, SeedMetrics
from covshrink.model.methods import (
    ORACLE_KINDS,
    IsotonicMethod,
    MethodSpec,
    OracleExactMethod,
    OracleMwcvMethod,
)
from covshrink.model.results import FitResult, FitSpec, MetricReport, OracleResult
from covshrink.model.spectra import SandwichSample, SpectralEstimate, SymEig
from covshrink.oracle import estimate_oracle, oracle_exact
from covshrink.shrinkage import build_estimator, shrink

logger = logging.getLogger(__name__)

REPORT_FILE = "report.json"


class SeedOutcome(BaseModel):
    """
    result of one seed, error is set if the seed was aborted
    """

    seed: int
    metrics: list[SeedMetrics] = Field(default_factory=list)
    files: list[str] = Field(default_factory=list)
    error: str | None = None


class ExperimentRunner:
    """
    Runs every requested estimator on synthetic data of each seed
    """

    def __init__(self, experiment: ExperimentConfig):
        self.experiment = experiment
        self.output_dir = Path(experiment.output_dir)

    def run(self, seed_done_callback: Callable[[Future], None] | None = None) -> ExperimentReport:
        """
        Run all seeds and write report.json
        :param seed_done_callback: callback called with the future of each finished seed e.g. for progress tracking
        :return: ExperimentReport
        """
        experiment = self.experiment
        logger.info(f"Running experiment {experiment.name} with seeds {experiment.seeds}")
        self.output_dir.mkdir(parents=True, exist_ok=True)
        with ThreadPoolExecutor(max_workers=experiment.max_workers) as executor:
            futures = []
            for seed in experiment.seeds:
                future = executor.submit(self.run_seed_safely, seed)
                if seed_done_callback is not None:
                    future.add_done_callback(seed_done_callback)
                futures.append(future)
            outcomes = [future.result() for future in futures]
        report = self.build_report(outcomes)
        self.output_dir.joinpath(REPORT_FILE).write_text(report.model_dump_json(indent=2), encoding="utf-8")
        if not report.completed_seeds:
            raise ExperimentFailedError(report.failures)
        return report

    def run_seed_safely(self, seed: int) -> SeedOutcome:
        """
        run the seed and record a failure instead of raising
        """
        try:
            return self.run_seed(seed)
        except (CovShrinkError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            logger.error(f"Seed {seed} of {self.experiment.name} failed: {exc}")
            logger.debug("Seed failure", exc_info=exc)
            return SeedOutcome(seed=seed, error=f"{type(exc).__name__}: {exc}")

    def run_seed(self, seed: int) -> SeedOutcome:
        """
        Generate the data of one seed, apply all methods and write the per-seed tables
        :param seed: seed of the data
        :return: SeedOutcome
        """
        experiment = self.experiment
        start = datetime.now()
        sample = generate_sandwich(
            experiment.cross,
            experiment.auto_true,
            experiment.noise,
            experiment.n,
            experiment.t,
            experiment.t_total,
            seed,
        )
        e = sample.sample_covariance()
        eig = sym_eig(e)
        spec = estimate_spectrum(eig.values, experiment.t)
        oracle = None
        if any(method.kind in ORACLE_KINDS for method in experiment.methods):
            oracle = estimate_oracle(sample.y, experiment.cv, eig.values)
        seed_dir = self.output_dir.joinpath(f"seed_{seed}")
        seed_dir.mkdir(parents=True, exist_ok=True)
        files: list[Path] = []
        metrics: list[SeedMetrics] = []
        xis_by_method: dict[str, NDArray[np.float64]] = {}
        for method in experiment.methods:
            xis, fit = self.apply_method(method, sample, eig, spec, oracle)
            result = build_estimator(eig, np.maximum(xis, 0.0), method)
            report = frobenius_ratio(result.xi_matrix, e, sample.c_true)
            summary_fit = fit.model_copy(update={"trace": []}) if fit is not None else None
            metrics.append(SeedMetrics(seed=seed, metrics=report, fit=summary_fit))
            xis_by_method[method.name] = result.xis
            files.append(self.write_spectrum(seed_dir, method.name, eig.values, result.xis))
            if fit is not None:
                files.append(self.write_fit_trace(seed_dir, method.name, fit))
            logger.debug(f"Seed {seed}: {method.name} Frobenius ratio {report.frobenius_ratio:.4f}")
        files.append(self.write_density_grid(seed_dir, spec, xis_by_method))
        if oracle is not None:
            files.append(self.write_oracle_scatter(seed_dir, oracle))
        logger.info(f"Seed {seed} done in {(datetime.now() - start).total_seconds():.1f}s")
        return SeedOutcome(
            seed=seed, metrics=metrics, files=[file.relative_to(self.output_dir).as_posix() for file in files]
        )

    def apply_method(
        self,
        method: MethodSpec,
        sample: SandwichSample,
        eig: SymEig,
        spec: SpectralEstimate,
        oracle: OracleResult | None,
    ) -> tuple[NDArray[np.float64], FitResult | None]:
        """
        shrunk eigenvalues of the method and the fit it needed, if any
        """
        q = self.experiment.q
        if isinstance(method, OracleExactMethod):
            return oracle_exact(eig, sample.c_true), None
        if method.kind in ORACLE_KINDS:
            if oracle is None:
                raise ValueError(f"{method.name} needs the cross-validation oracle")
            if isinstance(method, OracleMwcvMethod):
                return oracle.xi_raw, None
            if isinstance(method, IsotonicMethod):
                return oracle.xi_isotonic, None
            fit = fit_shrinkage_params(
                spec, q, FitSpec(family=method, objective_ref=oracle), max_workers=self.experiment.max_workers
            )
            return shrinkage_curve(method, fit.best_params, spec, q), fit
        return shrink(method, spec, q), None

    @staticmethod
    def write_spectrum(seed_dir: Path, name: str, lambdas: NDArray[np.float64], xis: NDArray[np.float64]) -> Path:
        path = seed_dir.joinpath(f"spectra_{name}.csv")
        table = pd.DataFrame({"rank": np.arange(1, lambdas.size + 1), "lambda": lambdas, "xi": xis})
        table.to_csv(path, index=False)
        return path

    @staticmethod
    def write_fit_trace(seed_dir: Path, name: str, fit: FitResult) -> Path:
        path = seed_dir.joinpath(f"fit_{name}.csv")
        rows = [{**params, "objective": objective} for params, objective in fit.trace]
        pd.DataFrame(rows).to_csv(path, index=False)
        return path

    @staticmethod
    def write_density_grid(
        seed_dir: Path, spec: SpectralEstimate, xis_by_method: dict[str, NDArray[np.float64]]
    ) -> Path:
        """
        kernel densities of the sample spectrum and of every shrunk spectrum, all with the bandwidth of the sample
        """
        path = seed_dir.joinpath("density_grid.csv")
        grid = density_grid(spec.lambdas, spec.bandwidth)
        columns = {"lambda": grid, "rho_E": kernel_density(spec.lambdas, spec.bandwidth, grid)}
        for name, xis in xis_by_method.items():
            if np.max(xis) > 0:
                columns[f"rho_{name}"] = kernel_density(xis, spec.bandwidth, grid)
            else:
                columns[f"rho_{name}"] = np.zeros_like(grid)
        pd.DataFrame(columns).to_csv(path, index=False)
        return path

    @staticmethod
    def write_oracle_scatter(seed_dir: Path, oracle: OracleResult) -> Path:
        path = seed_dir.joinpath("oracle_scatter.csv")
        table = pd.DataFrame(
            {
                "rank": np.arange(1, oracle.size + 1),
                "lambda": oracle.lambdas_ref,
                "xi_mwcv": oracle.xi_raw,
                "xi_isotonic": oracle.xi_isotonic,
            }
        )
        table.to_csv(path, index=False)
        return path

    def build_report(self, outcomes: list[SeedOutcome]) -> ExperimentReport:
        """
        Average the per-seed metrics of the completed seeds
        """
        experiment = self.experiment
        completed = [outcome for outcome in outcomes if outcome.error is None]
        summaries = []
        for index, method in enumerate(experiment.methods):
            per_seed = [_rounded(outcome.metrics[index]) for outcome in completed]
            ratios = np.array([entry.metrics.frobenius_ratio for entry in per_seed])
            summary = MethodSummary(name=method.name, kind=method.kind, per_seed=per_seed)
            if ratios.size:
                summary.frobenius_ratio_mean = _round(float(np.mean(ratios)))
                summary.frobenius_ratio_std = _round(float(np.std(ratios, ddof=1)) if ratios.size > 1 else 0.0)
            summaries.append(summary)
        generation = GenerationInfo(
            cross=experiment.cross.kind,
            auto=experiment.auto_true.label,
            noise=experiment.noise.kind,
            n=experiment.n,
            t=experiment.t,
            t_total=experiment.t_total,
            q=experiment.q,
            k_folds=experiment.cv.k_folds,
            t_out=experiment.cv.t_out,
            bandwidth=bandwidth_for(experiment.t),
        )
        return ExperimentReport(
            name=experiment.name,
            created=datetime.now(timezone.utc).isoformat(timespec="seconds"),
            package_version=__version__,
            generation=generation,
            seeds=list(experiment.seeds),
            completed_seeds=[outcome.seed for outcome in completed],
            failures={outcome.seed: outcome.error for outcome in outcomes if outcome.error is not None},
            methods=summaries,
            manifest=[REPORT_FILE] + [file for outcome in completed for file in outcome.files],
            profile=experiment.model_dump(mode="json"),
        )


def _round(value: float) -> float:
    return round(value, config.FROBENIUS_DECIMALS)


def _rounded(entry: SeedMetrics) -> SeedMetrics:
    metrics = entry.metrics
    rounded = MetricReport(
        frobenius_ratio=_round(metrics.frobenius_ratio),
        mse_estimator=metrics.mse_estimator,
        mse_sample=metrics.mse_sample,
    )
    return entry.model_copy(update={"metrics": rounded})


def run_experiment(
    experiment: ExperimentConfig, seed_done_callback: Callable[[Future], None] | None = None
) -> ExperimentReport:
    """
    Run the experiment and write its tables and report into experiment.output_dir
    :param experiment: experiment configuration
    :param seed_done_callback: callback called with the future of each finished seed
    :return: ExperimentReport
    """
    return ExperimentRunner(experiment).run(seed_done_callback=seed_done_callback)
