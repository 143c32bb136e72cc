"""cli/config_file.py — Sectioned key-value config files.

Format (configparser, no interpolation):

    [common]
    seed = 7
    threads = 4

    [clt]
    paradigm = on-data
    statistic = t_star_star
    m_rule = nlogn:4

[common] applies to every subcommand; the subcommand's own section
overrides it, and command-line flags override both.

Public API
----------
load_config(command, path=None, overrides=None) -> ExperimentConfig
parse_config_text(command, text, overrides=None) -> ExperimentConfig
serialize_config(config) -> str
"""

from __future__ import annotations

import configparser
import logging
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from core.errors import ConfigurationError
from schemas.config import CONFIG_MODELS, ExperimentConfig

logger = logging.getLogger(__name__)

COMMON_SECTION = "common"


def _model_for(command: str) -> type[ExperimentConfig]:
    try:
        return CONFIG_MODELS[command]
    except KeyError:
        raise ConfigurationError(f"unknown subcommand {command!r}", field="command") from None


def _read_sections(command: str, text: str, source: str) -> dict[str, str]:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config {source}: {exc}") from exc

    merged: dict[str, str] = {}
    if parser.has_section(COMMON_SECTION):
        merged.update(parser.items(COMMON_SECTION))
    if parser.has_section(command):
        merged.update(parser.items(command))
    return merged


def build_config(command: str, values: dict[str, Any]) -> ExperimentConfig:
    """Validate *values* into the subcommand's model.

    Raises:
        ConfigurationError: naming the first violated field.
    """
    model = _model_for(command)
    try:
        return model(**values)
    except ValidationError as exc:
        first = exc.errors()[0]
        field = ".".join(str(p) for p in first["loc"]) or None
        raise ConfigurationError(f"invalid {field}: {first['msg']}", field=field) from exc


def parse_config_text(
    command: str,
    text: str,
    overrides: dict[str, Any] | None = None,
    source: str = "<string>",
) -> ExperimentConfig:
    values: dict[str, Any] = dict(_read_sections(command, text, source))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return build_config(command, values)


def load_config(
    command: str,
    path: str | Path | None = None,
    overrides: dict[str, Any] | None = None,
) -> ExperimentConfig:
    """Defaults < config file ([common], then [command]) < overrides."""
    text = ""
    source = "<defaults>"
    if path is not None:
        path = Path(path)
        text = path.read_text(encoding="utf-8")    # OSError -> exit 4
        source = str(path)
        logger.debug("read config %s", path)
    return parse_config_text(command, text, overrides, source=source)


def serialize_config(config: ExperimentConfig) -> str:
    """One [command] section holding every field; parses back to an equal config."""
    lines = [f"[{config.command}]"]
    lines += [f"{key} = {value}" for key, value in config.to_flat().items()]
    return "\n".join(lines) + "\n"
