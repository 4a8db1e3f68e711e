"""Single points, parameter sweeps and the canonical figure sweep.

Rows are independent and computed on a thread pool (the eigensolver and the
array kernels release the GIL); they are written in `(u, v_eff)` order whatever
order they finish in. CSV files are assembled next to their destination and only
renamed into place once every row succeeded, so a failed sweep leaves no file.
"""

import csv
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from ..physics.analytic import (
    closed_form_constant,
    closed_form_gaussian,
    closed_form_gaussian_large_u,
)
from ..physics.entropy import entropy_report
from ..physics.errors import OutOfValidity
from ..physics.model import CompositeParams, ConstantBox, Gaussian
from .about import provenance
from .config import FIG1_U, FIG1_VEFF, ConfigError, parse_values
from .log import at_point

logger = logging.getLogger(__name__)

COLUMNS = (
    "u",
    "v_eff",
    "S_R2",
    "S_R2_cl",
    "S_vN",
    "S_WSh",
    "S_WSh_cl",
    "expS_R2",
    "expS_R2_cl",
    "expS_vN",
    "expS_WSh",
    "S_R2_largeU",
)
DEFAULT_FIG1_OUT = Path("fig1.csv")


def format_value(value):
    """Six significant digits; empty for a value that was not computed."""
    if value is None:
        return ""
    text = f"{value:.6g}"
    return "0" if text == "-0" else text


@dataclass(frozen=True)
class Row:
    """One computed parameter point."""

    u: float
    v_eff: float
    report: object
    large_u: float | None = None

    def values(self):
        """Column name -> number (or None) in CSV order."""
        r = self.report
        return {
            "u": self.u,
            "v_eff": self.v_eff,
            "S_R2": r.S_R2,
            "S_R2_cl": r.S_R2_cl,
            "S_vN": r.S_vN,
            "S_WSh": r.S_WSh,
            "S_WSh_cl": r.S_WSh_cl,
            "expS_R2": r.exp("S_R2"),
            "expS_R2_cl": r.exp("S_R2_cl"),
            "expS_vN": r.exp("S_vN"),
            "expS_WSh": r.exp("S_WSh"),
            "S_R2_largeU": self.large_u,
        }

    def csv_fields(self):
        """The row as CSV text fields."""
        return [format_value(value) for value in self.values().values()]


def compute_row(config, u, v_eff, w, *, include_vn_cl=False):
    """Evaluate every entropy of one `(u, weight)` point."""
    with at_point(u, v_eff):
        report = entropy_report(
            CompositeParams(u=u),
            w,
            grid=config.grid_spec(),
            phase_n=config.phase_n,
            include_cl=config.include_cl,
            include_wehrl=config.include_wehrl,
            include_vn_cl=include_vn_cl,
        )
    large_u = None
    if config.include_large_u and isinstance(w, Gaussian):
        large_u = closed_form_gaussian_large_u(v_eff)
    logger.info(
        "u=%g v_eff=%g: S_R2=%.6g S_vN=%.6g S_WSh=%.6g",
        u,
        v_eff,
        report.S_R2,
        report.S_vN,
        report.S_WSh,
    )
    return Row(u, v_eff, report, large_u)


def iter_rows(config):
    """Yield the rows of a sweep in `(u, v_eff)` order, computed concurrently.

    The first failing row stops the sweep: pending rows are cancelled and its
    exception propagates.
    """
    points = config.points()
    logger.info("sweeping %d points with %s", len(points), config.weight)
    workers = config.workers or None
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(compute_row, config, u, v, w) for u, v, w in points]
        try:
            for future in futures:
                yield future.result()
        finally:
            for future in futures:
                future.cancel()


def write_csv(rows, path, settings):
    """Write `rows` to `path` through a temporary sibling file.

    Returns:
        The number of data rows written.
    """
    path = Path(path)
    partial = path.with_name(f".{path.name}.partial")
    count = 0
    try:
        with partial.open("w", encoding="utf-8", newline="") as handle:
            handle.writelines(f"{line}\n" for line in provenance(settings))
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(COLUMNS)
            for row in rows:
                writer.writerow(row.csv_fields())
                count += 1
        partial.replace(path)
    except BaseException:
        partial.unlink(missing_ok=True)
        raise
    logger.info("wrote %d rows to %s", count, path)
    return count


def read_csv(path):
    """Read a CSV written by `write_csv` back as dicts of floats (None for blanks)."""
    with Path(path).open(encoding="utf-8", newline="") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    return [
        {key: float(text) if text else None for key, text in record.items()}
        for record in csv.DictReader(lines)
    ]


def _closed_form(params, w):
    """Closed-form counterpart of a point, or None where none applies."""
    try:
        if isinstance(w, Gaussian):
            return closed_form_gaussian(params, w.B)
        if isinstance(w, ConstantBox) and w.edges == "bulk" and params.u > 0:
            return closed_form_constant(params, w.V)
    except OutOfValidity as exc:
        logger.info("no closed form: %s", exc)
    return None


def render_report(row, closed):
    """The point report: every entropy with `e^S` and its closed form, one per line."""
    r = row.report
    lines = [f"u = {row.u:g}, v_eff = {row.v_eff:g} (entropies in nats)"]
    for name, value in r.entropies().items():
        reference = getattr(closed, name, None) if closed else None
        suffix = (
            "" if reference is None else f"  (closed form {format_value(reference)})"
        )
        lines.append(
            f"  {name:<15} {format_value(value):<10} "
            f"e^S = {format_value(r.exp(name)):<10}{suffix}".rstrip()
        )
    extras = {
        "S_vN (spectrum)": closed.S_vN_oracle if closed is not None else None,
        "S_R2 (u -> inf)": row.large_u,
        "kT": r.kT,
    }
    lines += [
        f"  {label:<15} {format_value(value)}"
        for label, value in extras.items()
        if value is not None
    ]
    return "\n".join(lines) + "\n"


def _log_diagnostics(report):
    d = report.diagnostics
    logger.info(
        "purity %.8g, phase-space purity %.8g", report.purity, report.phase_purity
    )
    logger.info(
        "grid N=%d, L=%.4g, phase n=%d, raw trace %.8g, min eigenvalue %.3g, "
        "S_vN change %.3g",
        d.grid_n,
        d.grid_L,
        d.phase_n,
        d.raw_trace,
        d.min_eigenvalue,
        d.vn_change,
    )
    if d.momentum_offdiagonal is not None:
        logger.info("momentum off-diagonal %.3g", d.momentum_offdiagonal)


def cmd_point(config):
    """Evaluate one parameter point and print its report; `--out` also writes CSV.

    The report goes to stdout; the numerical diagnostics are logged.

    Raises:
        ConfigError: The settings describe more than one point.
    """
    points = config.points()
    if len(points) != 1:
        raise ConfigError(
            f"point takes one u and one v_eff, got {len(points)} combinations",
            invariant="single-point",
        )
    u, v_eff, w = points[0]
    row = compute_row(config, u, v_eff, w, include_vn_cl=config.include_cl)
    sys.stdout.write(render_report(row, _closed_form(CompositeParams(u=u), w)))
    _log_diagnostics(row.report)
    if config.out is not None:
        write_csv([row], config.out, config.settings())
    return row.report


def cmd_sweep(config):
    """Run every point of the config into the CSV at `config.out`.

    Raises:
        ConfigError: No output path.
    """
    if config.out is None:
        raise ConfigError("sweep needs --out", invariant="output-path")
    return write_csv(iter_rows(config), config.out, config.settings())


def fig1_config(config):
    """The canonical figure sweep: Gaussian weights, u in {1, 8}, v_eff 0..8 by 0.25.

    Grid, worker and output settings are taken from `config`.
    """
    return replace(
        config,
        weight=Gaussian.kind,
        u_values=FIG1_U,
        v_values=parse_values(FIG1_VEFF, "fig1 veff"),
        V=None,
        B=None,
        include_cl=True,
        include_large_u=True,
        out=config.out or DEFAULT_FIG1_OUT,
    )


def cmd_fig1(config):
    """Write the canonical figure sweep."""
    return cmd_sweep(fig1_config(config))

