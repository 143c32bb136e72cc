from schemas.config import (
    CONFIG_MODELS,
    CltConfig,
    CoverageConfig,
    ExperimentConfig,
    FixedNConfig,
    IntervalConfig,
    NegligibilityConfig,
    WeightsCheckConfig,
)
from schemas.manifest import ARTIFACT_VERSION, CONVERGENCE_MODE, RunManifest

__all__ = [
    "CONFIG_MODELS",
    "ExperimentConfig",
    "WeightsCheckConfig", "CltConfig", "NegligibilityConfig",
    "IntervalConfig", "CoverageConfig", "FixedNConfig",
    "ARTIFACT_VERSION", "CONVERGENCE_MODE", "RunManifest",
]
