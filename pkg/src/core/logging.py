import sys
from pathlib import Path

from loguru import logger

from .config import settings


def setup_logging(
    level: str | None = None,
    json: bool | None = None,
    log_file: str | Path | None = None,
):
    """
    Configure the process-wide loguru sinks.

    Replaces the default handler with a stderr sink at the configured level.
    When log_file is given the same records are mirrored there (always at
    DEBUG so artifact directories keep the full solver trace).
    """
    level = (level or settings.log_level).upper()
    serialize = settings.log_json if json is None else json

    logger.remove()
    logger.add(sys.stderr, level=level, serialize=serialize, backtrace=False, diagnose=False)
    if log_file is not None:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        logger.add(str(log_file), level="DEBUG", serialize=serialize, mode="w")

    logger.debug("Logging initialised", level=level, serialize=serialize)
    return logger
