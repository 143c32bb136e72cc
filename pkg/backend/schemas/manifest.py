"""schemas/manifest.py — Run manifest written next to every result file."""

from __future__ import annotations

from datetime import datetime

from pydantic import BaseModel, ConfigDict, Field

ARTIFACT_VERSION = "0.1.0"

CONVERGENCE_MODE = "in-probability (finite-n surrogate)"


class RunManifest(BaseModel):
    model_config = ConfigDict(from_attributes=False)

    command: str
    artifact_version: str = ARTIFACT_VERSION
    seed: int
    config: dict[str, str]                 # flat echo, same keys as the config file
    started_at: datetime
    finished_at: datetime
    regime: str = ""
    convergence_mode: str = CONVERGENCE_MODE
    degenerate_counts: dict[str, int] = Field(default_factory=dict)
    outputs: list[str] = Field(default_factory=list)
