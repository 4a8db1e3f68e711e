"""Shared steps for the command-line acceptance scenarios (pytest-bdd).

Every scenario drives the real `composite-entropy` entry point in-process
(`cli.run(argv)`) on coarse grids and asserts what a user sees: the exit code,
the log lines on stderr and the CSV files left behind.

**Note:** See the integration suite for the installed console script run as a
subprocess.
"""

import logging
import shlex

import pytest
from pytest_bdd import given, parsers, then, when

from composite_entropy.core import cli

COARSE = ["--grid-n", "256", "--phase-n", "129", "--workers", "1"]


@pytest.fixture(autouse=True)
def _restore_package_logger():
    """`cli.run` reconfigures the package logger; put it back afterwards."""
    log = logging.getLogger("composite_entropy")
    saved = (log.handlers[:], log.level, log.propagate)
    yield
    log.handlers[:], level, log.propagate = saved
    log.setLevel(level)


@pytest.fixture
def ctx(tmp_path):
    return {"flags": [], "dir": tmp_path}


@given(parsers.parse("the mass ratio {u} and the effective volume {v}"))
def point_settings(ctx, u, v):
    ctx["flags"] += ["--u", u, "--veff", v]


@given(parsers.parse('the output file "{name}"'))
def output_file(ctx, name):
    ctx["flags"] += ["--out", str(ctx["dir"] / name)]


@given(parsers.parse('the extra flags "{flags}"'))
def extra_flags(ctx, flags):
    ctx["flags"] += shlex.split(flags)


def _run(ctx, capsys, argv):
    ctx["code"] = cli.run(argv)
    captured = capsys.readouterr()
    ctx["out"], ctx["log"] = captured.out, captured.err


@when(parsers.parse("I run the {command} command"))
def run_command(ctx, capsys, command):
    _run(ctx, capsys, [command, *COARSE, *ctx["flags"]])


@then("the command succeeds")
def succeeds(ctx):
    assert ctx["code"] == 0, ctx["log"]


@then(parsers.parse('the command fails with exit code {code:d} naming "{invariant}"'))
def fails(ctx, code, invariant):
    assert ctx["code"] == code
    assert f"[{invariant}]" in ctx["log"]


@then(parsers.parse('"{name}" does not exist'))
def no_file(ctx, name):
    assert not (ctx["dir"] / name).exists()
    assert not list(ctx["dir"].glob(".*.partial"))


@when(parsers.parse('I run the checks "{names}"'))
def run_checks(ctx, capsys, names):
    only = [arg for name in names.split(",") for arg in ("--only", name)]
    _run(ctx, capsys, ["check", *COARSE, *only])


@when("I run the full self-check at the default resolution")
def run_full_check(ctx, capsys):
    _run(ctx, capsys, ["check"])
