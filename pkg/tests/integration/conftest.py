"""Shared setup for integration tests that run the installed console script.

These tests start `composite-entropy` as a real subprocess, the way a user or a
plotting script would, so they are opt-in: `tests/integration` is excluded from
default discovery (see pyproject.toml). Every test skips when the script is not
on PATH (package not installed), so on an unprepared checkout the folder
degrades to a no-op rather than a failure.
"""

import shutil
import subprocess

import pytest


@pytest.fixture(scope="session")
def script():
    """Path of the installed console script; skips the test when it is absent."""
    path = shutil.which("composite-entropy")
    if path is None:
        pytest.skip("composite-entropy is not installed on PATH")
    return path


@pytest.fixture
def run_script(script, tmp_path):
    """Run the console script in `tmp_path` and return the completed process."""

    def _run(*args, env=None):
        return subprocess.run(
            [script, *args],
            capture_output=True,
            text=True,
            cwd=tmp_path,
            env=env,
            timeout=600,
            check=False,
        )

    return _run
