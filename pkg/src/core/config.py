"""Run settings: environment defaults, the config file and the sweep configuration.

Three layers feed a [`SweepConfig`][core.config.SweepConfig], later ones winning:
the defaults below, a `key = value` config file (`--config`), and command-line flags.
These defaults honor a `COMPOSITE_ENTROPY_*` environment variable:

- `COMPOSITE_ENTROPY_GRID_N`: position grid points (default 1024, at least 64)
- `COMPOSITE_ENTROPY_PHASE_N`: points per phase-space axis (default 256, at least 33)
- `COMPOSITE_ENTROPY_WORKERS`: sweep threads (default 0, one per CPU)

`COMPOSITE_ENTROPY_LOG_LEVEL` is read by [`core.log`][core.log].
"""

import logging
import math
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from ..physics.errors import CompositeEntropyError
from ..physics.kernels import MIN_GRID_N, GridSpec
from ..physics.model import (
    BOX_EDGES,
    CompositeParams,
    ConstantBox,
    Gaussian,
    Tabulated,
    effective_volumes,
    weight_from_veff,
)
from ..physics.phase_space import MIN_PHASE_N

logger = logging.getLogger(__name__)

try:
    GRID_N = max(MIN_GRID_N, int(os.environ.get("COMPOSITE_ENTROPY_GRID_N", "1024")))
except ValueError:
    GRID_N = 1024
try:
    PHASE_N = max(MIN_PHASE_N, int(os.environ.get("COMPOSITE_ENTROPY_PHASE_N", "256")))
except ValueError:
    PHASE_N = 256
try:
    WORKERS = max(0, int(os.environ.get("COMPOSITE_ENTROPY_WORKERS", "0")))
except ValueError:
    WORKERS = 0

WEIGHT_KINDS = ("constant", "gaussian")
TABLE_PREFIX = "table:"
# The v_eff sampling of the canonical figure sweep.
FIG1_U = (1.0, 8.0)
FIG1_VEFF = "0:8:33"
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class ConfigError(CompositeEntropyError, ValueError):
    """A config file or flag value that cannot be turned into a run."""

    invariant = "valid-config"
    exit_code = 2


def _parse_range(text, name):
    try:
        lo, hi, count = text.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError as exc:
        raise ConfigError(f"{name}: cannot parse range {text!r}: {exc}") from exc
    if count < 1:
        raise ConfigError(f"{name}: a range needs count >= 1, got {count}")
    return np.linspace(lo, hi, count).tolist()


def parse_values(text, name="values"):
    """Parse `1,2.5,8` or `lo:hi:count` into a tuple of floats.

    Raises:
        ConfigError: Empty, malformed, negative or non-finite values.
    """
    text = str(text).strip()
    if ":" in text:
        values = _parse_range(text, name)
    else:
        try:
            values = [float(item) for item in text.split(",") if item.strip()]
        except ValueError as exc:
            raise ConfigError(f"{name}: cannot parse {text!r}: {exc}") from exc
    if not values:
        raise ConfigError(f"{name}: no values in {text!r}")
    if not all(math.isfinite(v) and v >= 0 for v in values):
        raise ConfigError(f"{name}: values must be finite and >= 0, got {text!r}")
    return tuple(values)


def _parse_bool(text, name):
    value = str(text).strip().lower()
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise ConfigError(f"{name}: expected on/off, got {text!r}")


def _parse_number(convert):
    def parse(text, name):
        try:
            return convert(str(text).strip())
        except ValueError as exc:
            raise ConfigError(f"{name}: cannot parse {text!r}") from exc

    return parse


# Config-file key -> (SweepConfig field, converter).
KEYS = {
    "weight": ("weight", lambda text, name: str(text).strip()),
    "u": ("u_values", parse_values),
    "veff": ("v_values", parse_values),
    "V": ("V", _parse_number(float)),
    "B": ("B", _parse_number(float)),
    "grid_n": ("grid_n", _parse_number(int)),
    "grid_l": ("grid_l", _parse_number(float)),
    "phase_n": ("phase_n", _parse_number(int)),
    "out": ("out", lambda text, name: Path(str(text).strip())),
    "cl": ("include_cl", _parse_bool),
    "wehrl": ("include_wehrl", _parse_bool),
    "large_u": ("include_large_u", _parse_bool),
    "box_edges": ("box_edges", lambda text, name: str(text).strip()),
    "workers": ("workers", _parse_number(int)),
}


def read_config_file(path):
    """Read `key = value` lines; `#` starts a comment, blank lines are skipped.

    Keys may use `-` or `_` (`grid-n` and `grid_n` are the same key).

    Returns:
        The raw string values by key, in file order.

    Raises:
        ConfigError: The file is unreadable, or a line is malformed or has an unknown
            key; the message names the line.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        key, sep, value = content.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key or not value.strip():
            raise ConfigError(
                f"{path}:{lineno}: expected 'key = value', got {content!r}"
            )
        if key not in KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        raw[key] = value.strip()
    logger.debug("read %d settings from %s", len(raw), path)
    return raw


def convert_settings(raw, source="config"):
    """Turn raw config-file strings into SweepConfig field values."""
    values = {}
    for key, text in raw.items():
        name, convert = KEYS[key]
        values[name] = convert(text, f"{source}: {key}")
    return values


@dataclass(frozen=True)
class SweepConfig:
    """Everything one `point`, `sweep` or `fig1` run needs.

    `weight` is `constant`, `gaussian` or `table:<path>`. A box or Gaussian weight is
    placed at every `v_values` entry, unless `V` or `B` gives the size directly; a
    table is used as it is.
    """

    weight: str = "gaussian"
    u_values: tuple = (1.0,)
    v_values: tuple = ()
    V: float | None = None
    B: float | None = None
    grid_n: int = GRID_N
    grid_l: float | None = None
    phase_n: int = PHASE_N
    out: Path | None = None
    include_cl: bool = True
    include_wehrl: bool = False
    include_large_u: bool = True
    box_edges: str = "bulk"
    workers: int = WORKERS
    table: Tabulated | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        """Validate the settings and load a tabulated weight once."""
        if self.weight.startswith(TABLE_PREFIX):
            if self.table is None:
                path = self.weight.removeprefix(TABLE_PREFIX)
                if not path:
                    raise ConfigError("weight 'table:' needs a file path")
                object.__setattr__(self, "table", Tabulated.from_file(path))
        else:
            object.__setattr__(self, "table", None)
            if self.weight not in WEIGHT_KINDS:
                raise ConfigError(
                    f"weight must be one of {WEIGHT_KINDS} or table:<path>, "
                    f"got {self.weight!r}"
                )
        if not self.u_values:
            raise ConfigError("u: no mass ratios given", invariant="non-empty-range")
        if not all(math.isfinite(u) and u >= 0 for u in self.u_values):
            raise ConfigError(f"u: mass ratios must be >= 0, got {self.u_values}")
        if any(v < 0 for v in self.v_values):
            raise ConfigError(f"veff: values must be >= 0, got {self.v_values}")
        if self.grid_n < MIN_GRID_N:
            raise ConfigError(f"grid-n must be >= {MIN_GRID_N}, got {self.grid_n}")
        if self.grid_l is not None and not self.grid_l > 0:
            raise ConfigError(f"grid-l must be > 0, got {self.grid_l}")
        if self.phase_n < MIN_PHASE_N:
            raise ConfigError(f"phase-n must be >= {MIN_PHASE_N}, got {self.phase_n}")
        if self.box_edges not in BOX_EDGES:
            raise ConfigError(f"box-edges must be one of {BOX_EDGES}")
        if self.workers < 0:
            raise ConfigError(f"workers must be >= 0, got {self.workers}")

    @property
    def weight_kind(self):
        """`constant`, `gaussian` or `table`."""
        return Tabulated.kind if self.table is not None else self.weight

    def grid_spec(self):
        """The position grid the density matrices start from."""
        return GridSpec(self.grid_n, self.grid_l)

    def points(self):
        """`(u, v_eff, weight)` for every row, sorted by `(u, v_eff)`.

        Raises:
            ConfigError: A box or Gaussian run without any size.
        """
        rows = []
        for u in sorted(set(self.u_values)):
            params = CompositeParams(u=u)
            rows.extend((u, v, w) for v, w in self._weights(params))
        rows.sort(key=lambda row: row[:2])
        return rows

    def _weights(self, params):
        """`(v_eff, weight)` pairs at one parameter point."""
        fixed = None
        if self.table is not None:
            fixed = self.table
        elif self.weight == ConstantBox.kind and self.V is not None:
            fixed = ConstantBox(self.V, edges=self.box_edges)
        elif self.weight == Gaussian.kind and self.B is not None:
            fixed = Gaussian(self.B)
        if fixed is not None:
            return [(effective_volumes(params, fixed).v_eff, fixed)]
        if not self.v_values:
            raise ConfigError(
                f"a {self.weight} weight needs --veff or its size "
                f"({'--V' if self.weight == ConstantBox.kind else '--B'})",
                invariant="non-empty-range",
            )
        return [
            (v, weight_from_veff(params, self.weight, v, edges=self.box_edges))
            for v in sorted(set(self.v_values))
        ]

    def settings(self):
        """Ordered `key -> value` text of the settings that shape the numbers."""
        return {
            "weight": self.weight,
            "box_edges": self.box_edges,
            "grid_n": self.grid_n,
            "grid_l": "auto" if self.grid_l is None else f"{self.grid_l:g}",
            "phase_n": self.phase_n,
            "cl": "on" if self.include_cl else "off",
            "wehrl": "on" if self.include_wehrl else "off",
        }


def load_config(path=None, **overrides):
    """Build a SweepConfig from defaults, then the config file, then `overrides`.

    `None` overrides are ignored, so unset command-line flags leave file values alone.
    """
    values = {}
    if path is not None:
        values |= convert_settings(read_config_file(path), source=str(path))
    values |= {key: value for key, value in overrides.items() if value is not None}
    unknown = set(values) - {f.name for f in fields(SweepConfig)}
    if unknown:
        raise ConfigError(f"unknown settings: {', '.join(sorted(unknown))}")
    return SweepConfig(**values)
