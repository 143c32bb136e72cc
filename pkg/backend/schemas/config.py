"""schemas/config.py — Validated experiment configurations, one model per subcommand.

Every model shares the common fields (seed, threads, output, scheme,
generator).  Field values arrive as Python values from argparse or as
strings from a config file; list fields accept "a,b,c" strings.

Usage
-----
    config = CltConfig(paradigm="on-data", statistic="t_star_star", m_rule="nlogn:4")
    scheme = config.build_scheme()
"""

from __future__ import annotations

from typing import ClassVar, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.config import settings
from resampling.sampling import (
    BootstrapScheme,
    DataGenerator,
    EfronScheme,
    IidPositiveScheme,
    MRule,
    PositiveLaw,
)


def _split_list(v):
    """"a,b,c" -> ["a", "b", "c"]; lists pass through."""
    if isinstance(v, str):
        return [item.strip() for item in v.split(",") if item.strip()]
    return v


class ExperimentConfig(BaseModel):
    """Fields common to every subcommand."""

    model_config = ConfigDict(from_attributes=False, extra="forbid")

    command: ClassVar[str] = ""

    seed: int = Field(default_factory=lambda: settings.default_seed, ge=0, lt=2**64)
    threads: int = Field(default_factory=lambda: settings.threads, ge=1)
    out: str = ""                                   # empty = <output_dir>/<command>.<format>
    format: Literal["csv", "json"] = "csv"

    scheme: Literal["efron", "gamma", "custom-positive"] = "efron"
    m_rule: str = "ratio:1"
    law: str = "gamma:4,1"                          # custom-positive only
    generator: str = "normal"
    csv_header: Optional[bool] = None

    @field_validator("m_rule")
    @classmethod
    def _check_m_rule(cls, v: str) -> str:
        return MRule.parse(v).to_spec()

    @field_validator("law")
    @classmethod
    def _check_law(cls, v: str) -> str:
        return PositiveLaw.parse(v).to_spec()

    @field_validator("generator")
    @classmethod
    def _check_generator(cls, v: str) -> str:
        v = v.strip()
        if not v.startswith("csv:"):
            DataGenerator.parse(v)   # datasets are read when the study runs
        return v

    # ---- builders ----------------------------------------------------------

    def build_scheme(self) -> BootstrapScheme:
        if self.scheme == "efron":
            return EfronScheme(MRule.parse(self.m_rule))
        if self.scheme == "gamma":
            return IidPositiveScheme(PositiveLaw())
        return IidPositiveScheme(PositiveLaw.parse(self.law))

    def build_generator(self) -> DataGenerator:
        return DataGenerator.parse(self.generator, csv_header=self.csv_header)

    def to_flat(self) -> dict[str, str]:
        """Every field as a config-file string; None fields are omitted."""
        flat = {}
        for name, value in self.model_dump().items():
            if value is None:
                continue
            if isinstance(value, list):
                flat[name] = ",".join(repr(v) if isinstance(v, float) else str(v) for v in value)
            elif isinstance(value, bool):
                flat[name] = "true" if value else "false"
            elif isinstance(value, float):
                flat[name] = repr(value)
            else:
                flat[name] = str(value)
        return flat


class WeightsCheckConfig(ExperimentConfig):
    command: ClassVar[str] = "weights-check"

    n_grid: list[int] = Field(default_factory=lambda: [100, 400, 1600], min_length=1)
    reps: int = Field(1000, ge=1)

    @field_validator("n_grid", mode="before")
    @classmethod
    def _split_n_grid(cls, v):
        return _split_list(v)

    @field_validator("n_grid")
    @classmethod
    def _check_n_grid(cls, v: list[int]) -> list[int]:
        if any(n < 2 for n in v):
            raise ValueError("every n must be >= 2")
        return v


class CltConfig(ExperimentConfig):
    command: ClassVar[str] = "clt"

    paradigm: Literal["on-weights", "on-data"] = "on-weights"
    statistic: Literal["t_star", "t_star_star", "t_star_star_sn"] = "t_star"
    n: int = Field(500, ge=2)
    outer_reps: int = Field(11, ge=1)
    inner_reps: int = Field(2000, ge=1)
    ks_threshold: float = Field(0.05, gt=0, lt=1)


class NegligibilityConfig(ExperimentConfig):
    command: ClassVar[str] = "negligibility"

    statistic: Literal["t_star", "t_star_star"] = "t_star"
    n: int = Field(500, ge=2)
    reps: int = Field(2000, ge=1)
    epsilon: list[float] = Field(default_factory=lambda: [0.05, 0.1, 0.2, 0.5], min_length=1)
    sigma_sq: Optional[float] = Field(None, gt=0)

    @field_validator("epsilon", mode="before")
    @classmethod
    def _split_epsilon(cls, v):
        return _split_list(v)

    @field_validator("epsilon")
    @classmethod
    def _check_epsilon(cls, v: list[float]) -> list[float]:
        if any(not e > 0 for e in v):
            raise ValueError("every epsilon must be > 0")
        return v


class _BoundMixin(BaseModel):
    kind: int = Field(2, ge=1, le=4)
    n: int = Field(1000, ge=2)
    B: int = Field(399, ge=1)
    alpha: float = Field(0.95, gt=0, lt=1)
    reps: int = Field(500, ge=1)


class IntervalConfig(_BoundMixin, ExperimentConfig):
    command: ClassVar[str] = "interval"

    data: str = ""       # CSV dataset; empty = coverage run on the generator
    two_sided: bool = True


class CoverageConfig(_BoundMixin, ExperimentConfig):
    command: ClassVar[str] = "coverage"

    n_grid: list[int] = Field(default_factory=list)   # non-empty = quantile convergence over n

    @field_validator("n_grid", mode="before")
    @classmethod
    def _split_n_grid(cls, v):
        return _split_list(v)


class FixedNConfig(ExperimentConfig):
    command: ClassVar[str] = "fixed-n"

    n: int = Field(50, ge=2)
    m_grid: list[int] = Field(default_factory=lambda: [1000, 10000, 100000], min_length=1)
    reps: int = Field(100, ge=1)
    data: str = ""       # CSV dataset; empty = one sample from the generator

    @field_validator("m_grid", mode="before")
    @classmethod
    def _split_m_grid(cls, v):
        return _split_list(v)

    @field_validator("m_grid")
    @classmethod
    def _check_m_grid(cls, v: list[int]) -> list[int]:
        if any(m < 1 for m in v):
            raise ValueError("every m must be >= 1")
        return v


CONFIG_MODELS: dict[str, type[ExperimentConfig]] = {
    model.command: model
    for model in (WeightsCheckConfig, CltConfig, NegligibilityConfig, IntervalConfig, FixedNConfig, CoverageConfig)
}
