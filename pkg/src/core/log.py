"""Logging setup for the command line.

Reports and check results are log lines, so output is message-only (no level or
timestamp prefixes); the level only gates which lines appear. Only the
`composite_entropy` logger hierarchy is configured, so using the physics layer as a
library leaves the root logger untouched.

Sweep rows are computed on worker threads, and the physics layer logs without knowing
which parameter point it serves. [`at_point`][core.log.at_point] tags every line
emitted while a row is computed with that row's `(u, v_eff)`, so interleaved grid
extensions and refinement traces stay attributable.
"""

import contextlib
import contextvars
import logging
import os

logger = logging.getLogger(__name__)

ENV_LEVEL = "COMPOSITE_ENTROPY_LOG_LEVEL"
_PACKAGE_LOGGERS = ("composite_entropy",)

_point = contextvars.ContextVar("composite_entropy_point", default="")


def resolve_level(*, verbose=False, quiet=False):
    """Pick the log level: flags win, then COMPOSITE_ENTROPY_LOG_LEVEL, else INFO."""
    if verbose:
        return logging.DEBUG
    if quiet:
        return logging.WARNING
    name = os.environ.get(ENV_LEVEL, "INFO").strip().upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.INFO


def current_point():
    """The tag of the parameter point being computed in this context, or ''."""
    return _point.get()


@contextlib.contextmanager
def at_point(u, v_eff):
    """Tag log lines emitted inside the block with `[u=.. v_eff=..]`."""
    token = _point.set(f"[u={u:g} v_eff={v_eff:g}] ")
    try:
        yield
    finally:
        _point.reset(token)


class PointFormatter(logging.Formatter):
    """Formatter exposing the current point tag as `%(point)s`."""

    def format(self, record):
        # Handlers run on the emitting thread, so the context is the caller's.
        record.point = current_point()
        return super().format(record)


def configure(level):
    """Attach a message-only stderr handler to the package loggers."""
    # At DEBUG the refinement traces interleave with results; the prefix tells
    # them apart.
    fmt = (
        "%(levelname)s %(point)s%(message)s"
        if level <= logging.DEBUG
        else "%(point)s%(message)s"
    )
    handler = logging.StreamHandler()
    handler.setFormatter(PointFormatter(fmt))
    for name in _PACKAGE_LOGGERS:
        pkg = logging.getLogger(name)
        pkg.handlers.clear()
        pkg.addHandler(handler)
        pkg.setLevel(level)
        pkg.propagate = False
    logger.debug("log level %s on %s", logging.getLevelName(level), _PACKAGE_LOGGERS[0])
