"""Shared fixtures for the unit suite."""

import logging

import pytest

from composite_entropy.core.config import SweepConfig


class CapturedLog:
    """A capsys-style view over captured log text.

    Reports and check results go through ``logging`` rather than ``print``, so
    ``.out`` and ``.err`` both return the captured log text.
    """

    def __init__(self, text):
        self.out = text
        self.err = text


@pytest.fixture(autouse=True)
def _restore_package_logger():
    """Snapshot and restore the package logger around each test.

    ``log.configure`` mutates the ``composite_entropy`` logger (handlers, level,
    ``propagate``); restoring it keeps a test that calls it from hiding records
    from ``caplog`` in later tests.
    """
    log = logging.getLogger("composite_entropy")
    saved = (log.handlers[:], log.level, log.propagate)
    yield
    log.handlers[:], level, log.propagate = saved
    log.setLevel(level)


@pytest.fixture
def readlog(caplog):
    """Return a reader yielding captured log output, capsys-style.

    Each call returns the text logged since the previous call, then clears the
    buffer.
    """
    caplog.set_level(logging.DEBUG)

    def _read():
        captured = CapturedLog(caplog.text)
        caplog.clear()
        return captured

    return _read


@pytest.fixture
def small_config():
    """A coarse configuration that keeps entropy computations fast."""
    return SweepConfig(grid_n=256, phase_n=129, workers=1)
