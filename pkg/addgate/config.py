"""Central configuration for addgate."""

import logging
import os

debug: bool = os.environ.get("ADDGATE_DEBUG", "").lower() in ("1", "true")

log_level: str = os.environ.get("ADDGATE_LOG_LEVEL", "WARNING").upper()

mnist_dir: str | None = os.environ.get("ADDGATE_MNIST_DIR") or None

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def configure_logging(level: int | str | None = None) -> logging.Logger:
    """Attach a single stream handler to the ``addgate`` logger.

    *level* defaults to DEBUG in debug mode, else ``ADDGATE_LOG_LEVEL``.
    Calling this again only adjusts the level.
    """
    if level is None:
        level = logging.DEBUG if debug else log_level
    logger = logging.getLogger("addgate")
    if not any(getattr(h, "_addgate", False) for h in logger.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._addgate = True  # type: ignore[attr-defined]
        logger.addHandler(handler)
    logger.setLevel(level)
    return logger
