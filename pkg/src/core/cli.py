"""Command-line entry point: parse arguments, set up logging, run a command.

Commands are `point` (one parameter point, logged and optionally written as CSV),
`sweep` (a grid of points into a CSV file), `fig1` (the canonical figure sweep) and
`check` (the self-check). Settings come from defaults, then `--config`, then flags.

Verbosity comes from the mutually exclusive `-v`/`--verbose` and `-q`/`--quiet`
flags, or, with neither, the `COMPOSITE_ENTROPY_LOG_LEVEL` environment variable (see
[`resolve_level`][core.log.resolve_level]). Exit codes: 0 success, 1 a failed check,
2 invalid input, 3 a numerical failure; errors name the violated invariant.
"""

import argparse
import logging
from pathlib import Path

from . import log
from .about import DESCRIPTION, PROG, app_version

logger = logging.getLogger(__name__)

EXIT_OK = 0


def _weight(text):
    if text in {"constant", "gaussian"} or text.startswith("table:"):
        return text
    msg = f"expected constant, gaussian or table:<path>, got {text!r}"
    raise argparse.ArgumentTypeError(msg)


def _run_options():
    """Options shared by every command, all defaulting to None (unset)."""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", type=Path, help="key = value settings file")
    parent.add_argument(
        "--weight", type=_weight, help="constant, gaussian or table:<path>"
    )
    parent.add_argument(
        "--u", dest="u_values", help="mass ratio(s): 1,8 or lo:hi:count"
    )
    parent.add_argument(
        "--veff", dest="v_values", help="effective volume(s): 2 or lo:hi:count"
    )
    parent.add_argument("--V", type=float, help="box length (instead of --veff)")
    parent.add_argument("--B", type=float, help="Gaussian width (instead of --veff)")
    parent.add_argument("--grid-n", type=int, help="position grid points")
    parent.add_argument("--grid-l", type=float, help="position grid half-width")
    parent.add_argument("--phase-n", type=int, help="points per phase-space axis")
    parent.add_argument("--out", type=Path, help="CSV output path")
    parent.add_argument(
        "--box-edges", choices=("bulk", "hard"), help="box as a ring or with edges"
    )
    parent.add_argument("--workers", type=int, help="sweep threads (0: one per CPU)")
    parent.add_argument(
        "--no-cl",
        dest="include_cl",
        action="store_const",
        const=False,
        help="skip the semi-classical entropies",
    )
    parent.add_argument(
        "--wehrl",
        dest="include_wehrl",
        action="store_const",
        const=True,
        help="add the hbar/2 Wehrl entropies (u = 1 only)",
    )
    parent.add_argument(
        "--no-large-u",
        dest="include_large_u",
        action="store_const",
        const=False,
        help="leave the S_R2_largeU column empty",
    )
    return parent


def parse_args(argv=None):
    """Parse the command-line arguments."""
    parser = argparse.ArgumentParser(prog=PROG, description=DESCRIPTION)
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument(
        "-q", "--quiet", action="store_true", help="show only warnings and errors"
    )
    verbosity.add_argument(
        "-v", "--verbose", action="store_true", help="show debug output"
    )
    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {app_version()}",
        help="show the installed version and exit",
    )
    commands = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    options = _run_options()
    commands.add_parser(
        "point", parents=[options], help="evaluate and report one parameter point"
    )
    commands.add_parser(
        "sweep", parents=[options], help="write a (u, v_eff) grid of points as CSV"
    )
    commands.add_parser(
        "fig1", parents=[options], help="write the canonical figure sweep as CSV"
    )
    check = commands.add_parser(
        "check", parents=[options], help="run the self-check suite"
    )
    check.add_argument(
        "--only", action="append", metavar="NAME", help="run only the named check"
    )
    return parser.parse_args(argv)


def _values(text, name):
    from .config import parse_values

    return None if text is None else parse_values(text, name)


def _settings(args):
    """Flag values to lay over the config file; unset flags are None."""
    return {
        "weight": args.weight,
        "u_values": _values(args.u_values, "--u"),
        "v_values": _values(args.v_values, "--veff"),
        "V": args.V,
        "B": args.B,
        "grid_n": args.grid_n,
        "grid_l": args.grid_l,
        "phase_n": args.phase_n,
        "out": args.out,
        "box_edges": args.box_edges,
        "workers": args.workers,
        "include_cl": args.include_cl,
        "include_wehrl": args.include_wehrl,
        "include_large_u": args.include_large_u,
    }


def dispatch(args):
    """Build the configuration and run the chosen command; returns the exit code."""
    from .checks import cmd_check
    from .config import load_config
    from .sweep import cmd_fig1, cmd_point, cmd_sweep

    config = load_config(args.config, **_settings(args))
    if args.command == "point":
        cmd_point(config)
    elif args.command == "sweep":
        cmd_sweep(config)
    elif args.command == "fig1":
        cmd_fig1(config)
    else:
        return cmd_check(config, args.only)
    return EXIT_OK


def run(argv=None):
    """Run one command and return its exit code.

    The physics layer is imported lazily so `--help` and `--version` stay fast.
    """
    args = parse_args(argv)
    log.configure(log.resolve_level(verbose=args.verbose, quiet=args.quiet))

    from ..physics.errors import CompositeEntropyError

    try:
        return dispatch(args)
    except CompositeEntropyError as exc:
        logger.error(  # noqa: TRY400
            "%s [%s]: %s", type(exc).__name__, exc.invariant, exc
        )
        return exc.exit_code
