import json
import logging
import os
import sys
from typing import Any

LOGGER_NAME = "mistsim"

# Attributes every LogRecord carries; anything else came in through ``extra=``
_RECORD_FIELDS = frozenset(vars(logging.LogRecord("", 0, "", 0, "", None, None))) | {"message", "asctime"}


class JsonLineFormatter(logging.Formatter):
    """One JSON object per record, including ``extra=`` fields such as ``scenario_sha256``."""

    def format(self, record: logging.LogRecord) -> str:
        payload: dict[str, Any] = {
            "timestamp": self.formatTime(record, "%Y-%m-%dT%H:%M:%S"),
            "level": record.levelname,
            "name": record.name,
            "message": record.getMessage(),
        }
        payload.update({k: v for k, v in vars(record).items() if k not in _RECORD_FIELDS})
        if record.exc_info:
            payload["exception"] = self.formatException(record.exc_info)
        return json.dumps(payload, default=str)


def _resolve_level(level: int | str | None) -> int | str:
    if level is None:
        level = os.environ.get("MIST_SIM_LOG_LEVEL", "INFO")
    return level.upper() if isinstance(level, str) else level


def configure_logging(level: int | str | None = None, json_format: bool | None = None) -> logging.Logger:
    """
    Configure the mistsim logger.

    Records go to stderr; stdout carries only the paths the CLI writes.

    Args:
        level: Logging level (e.g., logging.INFO, "DEBUG"). Defaults to MIST_SIM_LOG_LEVEL.
        json_format: Emit JSON lines. Defaults to MIST_SIM_LOG_FORMAT == "json".

    Returns:
        The configured logger instance.
    """
    resolved = _resolve_level(level)
    if json_format is None:
        json_format = os.environ.get("MIST_SIM_LOG_FORMAT", "").lower() == "json"

    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(resolved)
    if logger.handlers:
        logger.handlers.clear()

    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(resolved)
    if json_format:
        handler.setFormatter(JsonLineFormatter())
    else:
        handler.setFormatter(
            logging.Formatter("[%(asctime)s] %(levelname)s [%(name)s] %(message)s", datefmt="%Y-%m-%d %H:%M:%S")
        )
    logger.addHandler(handler)
    logger.propagate = False
    return logger


def get_logger(name: str | None = None) -> logging.Logger:
    """Child logger ``mistsim.<name>``."""
    return logging.getLogger(f"{LOGGER_NAME}.{name}" if name else LOGGER_NAME)
