"""cli/writers.py — Result tables and run manifests on disk.

CSV: '.' decimal, '\\n' line endings, the table's own column order.
JSON: the same rows as a list of records (NaN -> null).
Each result file gets a sibling `<name>.manifest.json`.
"""

from __future__ import annotations

import json
import logging
from datetime import datetime, timezone
from pathlib import Path

import pandas as pd

from core.config import settings
from schemas.config import ExperimentConfig
from schemas.manifest import RunManifest

logger = logging.getLogger(__name__)


def now() -> datetime:
    return datetime.now(timezone.utc)


def result_path(config: ExperimentConfig, table: str = "") -> Path:
    """Main table at `out` (or <output_dir>/<command>.<format>); extra tables as <stem>.<table>.<format>."""
    base = Path(config.out) if config.out else Path(settings.output_dir) / f"{config.command}.{config.format}"
    if not table:
        return base
    return base.with_name(f"{base.stem}.{table}{base.suffix or '.' + config.format}")


def write_table(frame: pd.DataFrame, path: Path, fmt: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        # to_json caps double_precision at 15; json.dumps writes floats at repr precision
        records = frame.astype(object).where(frame.notna(), None).to_dict(orient="records")
        path.write_text(json.dumps(records, indent=2, default=str) + "\n", encoding="utf-8")
    else:
        frame.to_csv(path, index=False, lineterminator="\n")
    logger.debug("wrote %s (%d rows)", path, len(frame))
    return path


def write_manifest(manifest: RunManifest, result: Path) -> Path:
    path = result.with_name(f"{result.stem}.manifest.json")
    path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def emit(
    config: ExperimentConfig,
    tables: dict[str, pd.DataFrame],
    started_at: datetime,
    regime: str = "",
    degenerate_counts: dict[str, int] | None = None,
) -> list[Path]:
    """Write every table plus one manifest per table; returns all written paths."""
    paths = [write_table(frame, result_path(config, name), config.format) for name, frame in tables.items()]
    manifest = RunManifest(
        command=config.command,
        seed=config.seed,
        config=config.to_flat(),
        started_at=started_at,
        finished_at=now(),
        regime=regime,
        degenerate_counts=degenerate_counts or {},
        outputs=[str(p) for p in paths],
    )
    manifests = [write_manifest(manifest, p) for p in paths]
    return paths + manifests
