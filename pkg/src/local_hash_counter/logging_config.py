"""Logging configuration for the local hash counter.

Counting runs tag their log lines with the seed (and repeat index) that
replays them, so interleaved output from ``--repeats`` stays attributable.
"""

from __future__ import annotations

import logging
import os
import sys
from contextlib import contextmanager
from contextvars import ContextVar
from typing import Final, Iterator, TextIO

LOG_FORMAT: Final[str] = "%(asctime)s %(levelname)s [%(name)s] %(run)s%(message)s"
LOG_DATE_FORMAT: Final[str] = "%Y-%m-%d %H:%M:%S"
LOG_LEVEL_ENV_VAR: Final[str] = "LHCOUNT_LOG_LEVEL"

_RUN_FIELDS: ContextVar[tuple[tuple[str, object], ...]] = ContextVar(
    "lhcount_run_fields", default=()
)


@contextmanager
def run_context(**fields: object) -> Iterator[None]:
    """Tag records logged inside the block with ``key=value`` run fields.

    Nested blocks extend the outer fields and an inner value replaces an outer
    one. ``None`` values are skipped.

    :param fields: Run fields such as ``seed`` or ``repeat``.
    :type fields: object
    :return: Context manager.
    :rtype: Iterator[None]
    """
    merged = dict(_RUN_FIELDS.get())
    merged.update({key: value for key, value in fields.items() if value is not None})
    token = _RUN_FIELDS.set(tuple(merged.items()))
    try:
        yield
    finally:
        _RUN_FIELDS.reset(token)


class RunContextFilter(logging.Filter):
    """Expose the active run fields to formatters as ``%(run)s``."""

    def filter(self, record: logging.LogRecord) -> bool:
        record.run = "".join(f"{key}={value} " for key, value in _RUN_FIELDS.get())
        return True


def resolve_level(verbose: bool = False) -> int:
    """Return the log level from ``LHCOUNT_LOG_LEVEL`` or the verbose flag.

    An unrecognized level name in the environment is ignored.

    :param verbose: If ``True``, default to ``DEBUG``; otherwise ``INFO``.
    :type verbose: bool
    :return: Numeric logging level.
    :rtype: int
    """
    override = os.environ.get(LOG_LEVEL_ENV_VAR, "").strip().upper()
    if override:
        level = logging.getLevelName(override)
        if isinstance(level, int):
            return level
    return logging.DEBUG if verbose else logging.INFO


def configure_logging(
    verbose: bool = False,
    stream: TextIO | None = None,
) -> None:
    """Configure the root logger with one run-tagging stream handler.

    Repeated calls replace the handler instead of stacking a new one.

    :param verbose: If ``True``, use ``DEBUG`` level unless the environment
        overrides it.
    :type verbose: bool
    :param stream: Log destination; defaults to ``sys.stderr`` so standard
        output only carries records.
    :type stream: TextIO | None
    :return: None
    :rtype: None
    """
    level = resolve_level(verbose)

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    _clear_handlers(root_logger)

    handler = logging.StreamHandler(stream if stream is not None else sys.stderr)
    handler.setLevel(level)
    handler.addFilter(RunContextFilter())
    handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=LOG_DATE_FORMAT))
    root_logger.addHandler(handler)


def _clear_handlers(logger: logging.Logger) -> None:
    """Remove and close every handler attached to ``logger``.

    :param logger: Logger to strip.
    :type logger: logging.Logger
    :return: None
    :rtype: None
    """
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        try:
            handler.close()
        except Exception:
            # A handler that fails to close must not stop reconfiguration.
            pass
