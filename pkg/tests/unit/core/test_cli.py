"""Tests for the core CLI entry point."""

import logging
import shutil
from importlib import import_module
from unittest.mock import patch

import pytest

from composite_entropy.core import cli
from composite_entropy.core.config import ConfigError
from composite_entropy.physics.errors import GridTooCoarse


def test_dunder_main_module():
    """Exercise (most of) the code in the ``__main__`` module."""
    import_module("composite_entropy.core.__main__")


def test_entrypoint():
    """Is entrypoint script installed? (pyproject.toml)"""
    assert shutil.which("composite-entropy")


@pytest.mark.parametrize(
    ("argv", "verbose", "quiet"),
    [
        (["check"], False, False),
        (["-v", "check"], True, False),
        (["--verbose", "check"], True, False),
        (["-q", "check"], False, True),
        (["--quiet", "check"], False, True),
    ],
)
def test_parse_args_flags(argv, verbose, quiet):
    """-v/--verbose and -q/--quiet set their flags; default is neither."""
    args = cli.parse_args(argv)

    assert args.verbose is verbose
    assert args.quiet is quiet


def test_parse_args_verbose_and_quiet_are_mutually_exclusive():
    """Passing both -v and -q is rejected by argparse."""
    with pytest.raises(SystemExit):
        cli.parse_args(["-v", "-q", "point"])


def test_parse_args_requires_a_command():
    with pytest.raises(SystemExit):
        cli.parse_args([])


@patch("composite_entropy.core.cli.app_version", return_value="1.2.3")
def test_version_prints_program_and_version_then_exits(_app_version, capsys):
    """--version prints "composite-entropy <version>" and exits 0."""
    with pytest.raises(SystemExit) as exc:
        cli.parse_args(["--version"])

    assert exc.value.code == 0
    assert capsys.readouterr().out == "composite-entropy 1.2.3\n"


def test_parse_args_unset_options_are_none():
    """Unset flags stay None so they never override config-file values."""
    args = cli.parse_args(["sweep"])

    assert all(value is None for value in cli._settings(args).values())


def test_parse_args_collects_run_options():
    args = cli.parse_args(
        [
            "sweep",
            "--weight",
            "constant",
            "--u",
            "1,8",
            "--veff",
            "0:2:3",
            "--grid-n",
            "512",
            "--no-cl",
            "--wehrl",
            "--no-large-u",
            "--box-edges",
            "hard",
        ]
    )
    settings = cli._settings(args)

    assert settings["weight"] == "constant"
    assert settings["u_values"] == (1.0, 8.0)
    assert settings["v_values"] == (0.0, 1.0, 2.0)
    assert settings["grid_n"] == 512
    assert settings["include_cl"] is False
    assert settings["include_wehrl"] is True
    assert settings["include_large_u"] is False
    assert settings["box_edges"] == "hard"


def test_parse_args_accepts_table_weight():
    assert cli.parse_args(["point", "--weight", "table:w.txt"]).weight == "table:w.txt"


def test_parse_args_rejects_unknown_weight():
    with pytest.raises(SystemExit):
        cli.parse_args(["point", "--weight", "lorentzian"])


def test_check_only_collects_names():
    args = cli.parse_args(["check", "--only", "spectrum", "--only", "pure-states"])

    assert args.only == ["spectrum", "pure-states"]


@pytest.mark.parametrize(
    ("command", "target"),
    [
        ("point", "cmd_point"),
        ("sweep", "cmd_sweep"),
        ("fig1", "cmd_fig1"),
    ],
)
def test_dispatch_runs_the_command(command, target):
    with patch(f"composite_entropy.core.sweep.{target}") as mock_cmd:
        assert cli.run([command, "--veff", "2"]) == 0

    (config,) = mock_cmd.call_args.args
    assert config.v_values == (2.0,)


@patch("composite_entropy.core.checks.cmd_check", return_value=1)
def test_dispatch_check_returns_its_exit_code(mock_check):
    assert cli.run(["check", "--only", "spectrum"]) == 1
    assert mock_check.call_args.args[1] == ["spectrum"]


def test_run_invalid_input_exits_2_naming_the_invariant(capsys):
    """A bad value is logged with its invariant and maps to exit code 2."""
    assert cli.run(["point", "--u", "-1"]) == 2

    assert "ConfigError [valid-config]" in capsys.readouterr().err


@patch(
    "composite_entropy.core.sweep.cmd_point",
    side_effect=GridTooCoarse("trace does not settle"),
)
def test_run_numerical_failure_exits_3(_cmd_point, capsys):
    assert cli.run(["point", "--veff", "2"]) == 3

    err = capsys.readouterr().err
    assert "GridTooCoarse [grid-resolves-trace]: trace does not settle" in err


@patch(
    "composite_entropy.core.sweep.cmd_sweep",
    side_effect=ConfigError("sweep needs --out", invariant="output-path"),
)
def test_run_reports_specific_invariant(_cmd_sweep, capsys):
    assert cli.run(["sweep", "--veff", "2"]) == 2

    assert "[output-path]" in capsys.readouterr().err


def _run_then_log(argv, capsys, level, message):
    """Run the CLI with argv, emit one log record, return its formatted stderr.

    The command itself is mocked out; its startup output is discarded so only
    the record's resulting line (if any) is returned.
    """
    with patch("composite_entropy.core.checks.cmd_check", return_value=0):
        cli.run(argv)
    capsys.readouterr()
    logging.getLogger("composite_entropy").log(level, message)
    return capsys.readouterr().err


def test_run_default_prints_info_without_prefix(capsys):
    """No flag: INFO is shown as the bare message; DEBUG is suppressed."""
    assert _run_then_log(["check"], capsys, logging.INFO, "hello") == "hello\n"
    assert _run_then_log(["check"], capsys, logging.DEBUG, "noise") == ""


def test_run_verbose_enables_debug_with_level_prefix(capsys):
    """-v: DEBUG is shown and every line is prefixed with its level name."""
    assert _run_then_log(["-v", "check"], capsys, logging.INFO, "hi") == "INFO hi\n"
    assert _run_then_log(["-v", "check"], capsys, logging.DEBUG, "x") == "DEBUG x\n"


def test_run_quiet_silences_info_but_keeps_warnings(capsys):
    """-q: INFO is silent; warnings and errors still print (without a prefix)."""
    assert _run_then_log(["-q", "check"], capsys, logging.INFO, "hidden") == ""
    assert _run_then_log(["-q", "check"], capsys, logging.WARNING, "oops") == "oops\n"


def test_run_quiet_point_still_prints_the_report(capsys):
    """-q silences the diagnostics, not the report on stdout."""
    argv = ["-q", "point", "--veff", "2", "--grid-n", "256", "--phase-n", "129"]

    assert cli.run(argv) == 0

    captured = capsys.readouterr()
    assert "closed form 0.510826" in captured.out
    assert "raw trace" not in captured.err
