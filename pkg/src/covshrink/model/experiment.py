"""
Experiment profiles and reports
"""

import logging
from pathlib import Path
from typing import Annotated, Any

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from covshrink import config
from covshrink.exceptions import ConfigError
from covshrink.model.methods import MethodSpec
from covshrink.model.processes import AutoModel, CrossModel, ExplicitCross, GaussianNoise, NoiseDist
from covshrink.model.results import FitResult, MetricReport

logger = logging.getLogger(__name__)


class CvConfig(BaseModel):
    """
    moving-window cross-validation layout
    fold mu (0-based) trains on columns [mu T_out, mu T_out + T) and tests on the T_out columns that follow
    """

    model_config = ConfigDict(frozen=True, extra="forbid")
    k_folds: Annotated[int, Field(ge=1)] = config.DEFAULT_K_FOLDS
    t_out: Annotated[int, Field(ge=1)] = config.DEFAULT_T_OUT
    t_train: Annotated[int | None, Field(ge=1, description="length T of the training window")] = None

    @property
    def required_samples(self) -> int:
        """
        T + K T_out
        """
        return self.window + self.k_folds * self.t_out

    def train_columns(self, fold: int) -> slice:
        start = fold * self.t_out
        return slice(start, start + self.window)

    def test_columns(self, fold: int) -> slice:
        start = fold * self.t_out + self.window
        return slice(start, start + self.t_out)

    @property
    def window(self) -> int:
        if self.t_train is None:
            raise ValueError("t_train is not set")
        return self.t_train


class ExperimentConfig(BaseModel):
    """
    synthetic experiment: data-generating process, estimators and seeds
    """

    model_config = ConfigDict(extra="forbid")
    name: str = "experiment"
    description: str | None = None
    n: Annotated[int, Field(ge=2)]
    t: Annotated[int, Field(ge=1)]
    cv: CvConfig = Field(default_factory=CvConfig)
    cross: CrossModel
    auto_true: AutoModel
    noise: NoiseDist = Field(default_factory=GaussianNoise)
    methods: list[MethodSpec] = Field(default_factory=list)
    seeds: Annotated[list[int], Field(min_length=1)]
    output_dir: Path = Path("results")
    max_workers: Annotated[int, Field(ge=1)] = 1

    @field_validator("seeds")
    @classmethod
    def check_seeds(cls, value: list[int]) -> list[int]:
        for seed in value:
            if not 0 <= seed < 2**64:
                raise ValueError(f"seed {seed} is not an unsigned 64-bit integer")
        return value

    @model_validator(mode="after")
    def check_experiment(self) -> "ExperimentConfig":
        if self.t * 100 < self.n:
            raise ValueError(f"t must be at least n/100, got n={self.n}, t={self.t}")
        if isinstance(self.cross, ExplicitCross) and len(self.cross.matrix) != self.n:
            size = len(self.cross.matrix)
            raise ValueError(f"explicit covariance is {size} x {size} but n is {self.n}")
        if self.cv.t_train is None:
            self.cv = self.cv.model_copy(update={"t_train": self.t})
        elif self.cv.t_train != self.t:
            raise ValueError(f"cv.t_train ({self.cv.t_train}) must equal t ({self.t})")
        names = [method.name for method in self.methods]
        duplicates = sorted({name for name in names if names.count(name) > 1})
        if duplicates:
            raise ValueError(f"method names must be unique, duplicated: {duplicates}")
        return self

    @property
    def q(self) -> float:
        return self.n / self.t

    @property
    def t_total(self) -> int:
        return self.cv.required_samples

    def with_overrides(self, seeds: list[int] | None = None, output_dir: Path | None = None) -> "ExperimentConfig":
        """
        copy of the config with the given seeds and output directory, validated again
        """
        values = self.model_dump()
        if seeds is not None:
            values["seeds"] = seeds
        if output_dir is not None:
            values["output_dir"] = output_dir
        return ExperimentConfig.model_validate(values)


class SeedMetrics(BaseModel):
    seed: int
    metrics: MetricReport
    fit: FitResult | None = None


class MethodSummary(BaseModel):
    """
    Frobenius ratio of one method averaged over the completed seeds
    """

    name: str
    kind: str
    frobenius_ratio_mean: float | None = None
    frobenius_ratio_std: float | None = None
    per_seed: list[SeedMetrics] = Field(default_factory=list)


class GenerationInfo(BaseModel):
    """
    metadata of the generated data
    """

    cross: str
    auto: str
    noise: str
    n: int
    t: int
    t_total: int
    q: float
    k_folds: int
    t_out: int
    bandwidth: float


class ExperimentReport(BaseModel):
    """
    content of report.json
    Frobenius ratios are fractions (not percent) rounded to four decimals.
    """

    schema_version: str = config.REPORT_SCHEMA_VERSION
    name: str
    created: str
    package_version: str
    generation: GenerationInfo
    seeds: list[int]
    completed_seeds: list[int]
    failures: dict[int, str] = Field(default_factory=dict)
    methods: list[MethodSummary] = Field(default_factory=list)
    manifest: list[str] = Field(default_factory=list)
    profile: dict[str, Any] = Field(description="validated experiment profile the report was produced from")

    def get_method(self, name: str) -> MethodSummary | None:
        """
        Get the summary of the method with the given name
        """
        for method in self.methods:
            if method.name == name:
                return method
        return None


def _line_of(text: str, location: tuple[int | str, ...]) -> int | None:
    """
    1-based line of the deepest YAML node on the given key path
    """
    try:
        node = yaml.compose(text)
    except yaml.YAMLError:
        return None
    if node is None:
        return None
    for part in location:
        if isinstance(node, yaml.MappingNode):
            match = next((value for key, value in node.value if key.value == str(part)), None)
            if match is None:
                # union tags of pydantic are part of the location but not of the document
                continue
            node = match
        elif isinstance(node, yaml.SequenceNode) and isinstance(part, int) and part < len(node.value):
            node = node.value[part]
        else:
            break
    return node.start_mark.line + 1


def load_config(path: Path | str) -> ExperimentConfig:
    """
    load experiment configuration

    :param path: path to the YAML file
    :return: validated experiment configuration
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file {path} not found")
    text = path.read_text(encoding="utf-8")
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        logger.debug("Failed to parse config file")
        mark = getattr(exc, "problem_mark", None)
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"Invalid YAML in {path}: {problem}", line=mark.line + 1 if mark else None) from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"Config file {path} must contain a mapping", line=1)
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        error = exc.errors()[0]
        location = tuple(error["loc"])
        key_path = ".".join(str(part) for part in location)
        logger.debug(f"Validation of {path} failed with {exc.error_count()} errors")
        line = _line_of(text, location)
        raise ConfigError(f"Invalid config {path}: {error['msg']}", path=key_path, line=line) from exc
