"""core/logging.py — Structured JSON logging with optional rotating file output.

Call configure_logging() once at CLI startup (cli/run_study.py).
After that, use standard logging.getLogger(__name__) throughout.

Output:
  - Console — JSON lines to stderr (stdout is kept for the run summary)
  - File    — JSON lines, rotated at 10 MB, 5 backups kept; only when a
              log file is configured (BOOT_T_LOG_FILE)
"""

from __future__ import annotations

import logging
import logging.handlers
import os
import sys

from pythonjsonlogger.json import JsonFormatter

_MAX_BYTES = 10 * 1024 * 1024   # 10 MB per file
_BACKUP_COUNT = 5                # keep 5 rotated files


def configure_logging(log_level: str = "INFO", log_file: str | None = None) -> None:
    """Configure the root logger with a JSON console handler (+ rotating file).

    Args:
        log_level: One of DEBUG, INFO, WARNING, ERROR, CRITICAL.
                   Passed from settings.log_level at startup.
        log_file:  Optional path; when set, a rotating file handler is added.
    """
    level = getattr(logging, log_level.upper(), logging.INFO)
    fmt = "%(asctime)s %(name)s %(levelname)s %(message)s"
    formatter = JsonFormatter(fmt)

    # ── Console handler ────────────────────────────────────────────────────────
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    console_handler.setLevel(level)

    root = logging.getLogger()
    root.setLevel(level)
    root.handlers.clear()
    root.addHandler(console_handler)

    # ── Rotating file handler ──────────────────────────────────────────────────
    if log_file:
        os.makedirs(os.path.dirname(os.path.abspath(log_file)), exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            log_file,
            maxBytes=_MAX_BYTES,
            backupCount=_BACKUP_COUNT,
            encoding="utf-8",
        )
        file_handler.setFormatter(formatter)
        file_handler.setLevel(level)
        root.addHandler(file_handler)

    logging.getLogger(__name__).debug(
        "Logging configured",
        extra={"log_level": log_level, "log_file": os.path.abspath(log_file) if log_file else None},
    )
