"""Physical parameters, derived widths and generator-coordinate weights.

A two-particle composite is made of particle *a* (mass `m`, Gaussian packet width
`b`) and particle *b* (mass `u*m`, width `b/sqrt(u)`), superposed over the common
packet centre `R` with the weight `F(R)`. Every symbol the other physics modules use
lives here:

- [`CompositeParams`][physics.model.CompositeParams] holds the inputs `u, b, hbar, m`;
- [`derive_params`][physics.model.derive_params] computes the mass fractions and widths;
- the three weight kinds are [`ConstantBox`][physics.model.ConstantBox],
  [`Gaussian`][physics.model.Gaussian] and [`Tabulated`][physics.model.Tabulated].

Natural units are the default (`b = hbar = m = 1`), so results depend on `u` and the
effective volume only. Weights are unnormalized shapes: everything built from them is
renormalized to unit trace downstream.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidParams, OutOfRange

logger = logging.getLogger(__name__)

BOX_EDGES = ("bulk", "hard")
MIN_TABLE_SAMPLES = 8


def _finite_positive(name, value):
    if not math.isfinite(value) or value <= 0:
        raise InvalidParams(f"{name} must be finite and > 0, got {value}")


@dataclass(frozen=True)
class CompositeParams:
    """Mass ratio `u = m_b/m_a`, packet width `b`, `hbar` and the mass `m` of a."""

    u: float = 1.0
    b: float = 1.0
    hbar: float = 1.0
    m: float = 1.0

    def __post_init__(self):
        """Reject negative mass ratios and non-positive scales."""
        if not math.isfinite(self.u) or self.u < 0:
            raise InvalidParams(f"mass ratio u must be finite and >= 0, got {self.u}")
        _finite_positive("b", self.b)
        _finite_positive("hbar", self.hbar)
        _finite_positive("m", self.m)


@dataclass(frozen=True)
class DerivedParams:
    """Mass fractions and widths of one parameter point.

    `b2`, `bs` and `mu` are `None` when `u = 0`: without a second particle there is
    no packet of particle b, no smearing width and no reduced mass. Use
    [`require_bs`][physics.model.DerivedParams.require_bs] where a smearing width is
    mandatory.
    """

    b: float
    u1: float
    u2: float
    bG: float
    M: float
    b2: float | None
    bs: float | None
    mu: float | None

    def require_bs(self, operation="this operation"):
        """Return `bs`, or raise InvalidParams when `u = 0` leaves it undefined."""
        if self.bs is None:
            raise InvalidParams(
                f"{operation} needs u > 0 (bs is undefined for u = 0)",
                invariant="u-positive",
            )
        return self.bs

    def beta(self, B):
        """Width of the cm packet for a Gaussian weight of width `B`."""
        return math.sqrt(B**2 + self.u1 * self.b**2)


def derive_params(params):
    """Mass fractions `u1, u2`, widths `b2, bG, bs`, reduced and total mass."""
    u, b = params.u, params.b
    u1 = 1 / (u + 1)
    u2 = u / (u + 1)
    if u > 0:
        b2 = b / math.sqrt(u)
        bs = b / math.sqrt(u2)
        mu = u2 * params.m
    else:
        b2 = bs = mu = None
    return DerivedParams(
        b=b,
        u1=u1,
        u2=u2,
        bG=math.sqrt(u1) * b,
        M=(u + 1) * params.m,
        b2=b2,
        bs=bs,
        mu=mu,
    )


@dataclass(frozen=True)
class ConstantBox:
    """`F(R) = 1` on `[-V/2, V/2]`, zero outside.

    With `edges="bulk"` the box is treated as a ring of circumference `V`, which
    drops the boundary contribution entirely; `edges="hard"` integrates the sharp
    box as it is.
    """

    V: float
    edges: str = "bulk"

    kind = "constant"

    def __post_init__(self):
        """Validate the box length and the edge mode."""
        _finite_positive("box length V", self.V)
        if self.edges not in BOX_EDGES:
            raise InvalidParams(
                f"box edges must be one of {BOX_EDGES}, got {self.edges!r}"
            )

    @property
    def support(self):
        """Interval on which F is non-zero."""
        return -self.V / 2, self.V / 2


@dataclass(frozen=True)
class Gaussian:
    """`F(R) = exp(-R^2 / 2B^2) / (B^2 pi)^(1/4)`; `B = 0` is the delta-weight limit."""

    B: float

    kind = "gaussian"

    def __post_init__(self):
        """Validate the width."""
        if not math.isfinite(self.B) or self.B < 0:
            raise InvalidParams(f"Gaussian width B must be finite and >= 0: {self.B}")

    @property
    def support(self):
        """Interval holding all but e^-100 of |F|^2."""
        return -10 * self.B, 10 * self.B


@dataclass(frozen=True, eq=False)
class Tabulated:
    """A weight sampled at increasing `R`, linearly interpolated in between.

    Outside the table F is zero; evaluating it there with
    [`weight_eval`][physics.model.weight_eval] raises OutOfRange. Instances compare
    and hash by identity so they can key caches.
    """

    R: np.ndarray = field(repr=False)
    amplitude: np.ndarray = field(repr=False)
    source: str = "samples"

    kind = "table"

    def __post_init__(self):
        """Check sample count, ordering and finiteness; freeze the arrays."""
        R = np.array(self.R, dtype=float)
        amp = np.array(self.amplitude, dtype=complex)
        if R.ndim != 1 or R.shape != amp.shape:
            raise InvalidParams("table needs matching one-dimensional R and amplitude")
        if R.size < MIN_TABLE_SAMPLES:
            raise InvalidParams(
                f"table needs at least {MIN_TABLE_SAMPLES} samples, got {R.size}"
            )
        if not (np.all(np.isfinite(R)) and np.all(np.isfinite(amp))):
            raise InvalidParams("table samples must be finite")
        if np.any(np.diff(R) <= 0):
            raise InvalidParams("table R values must be strictly increasing")
        if not np.any(amp):
            raise InvalidParams("table amplitude is identically zero")
        R.flags.writeable = False
        amp.flags.writeable = False
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "amplitude", amp)

    @classmethod
    def from_samples(cls, samples, source="samples"):
        """Build from `(R, amplitude)` pairs."""
        samples = list(samples)
        if not samples:
            raise InvalidParams("table has no samples")
        R, amp = zip(*samples, strict=True)
        return cls(np.asarray(R), np.asarray(amp), source=source)

    @classmethod
    def from_file(cls, path):
        """Read whitespace-separated `R re [im]` columns; `#` starts a comment."""
        path = Path(path)
        try:
            data = np.loadtxt(path, comments="#", ndmin=2)
        except (OSError, ValueError) as exc:
            raise InvalidParams(f"cannot read weight table {path}: {exc}") from exc
        if data.shape[1] not in {2, 3}:
            raise InvalidParams(
                f"weight table {path} needs 2 or 3 columns, got {data.shape[1]}"
            )
        amp = data[:, 1] + (1j * data[:, 2] if data.shape[1] == 3 else 0)
        logger.debug("read %d weight samples from %s", data.shape[0], path)
        return cls(data[:, 0], amp, source=str(path))

    @property
    def support(self):
        """First and last tabulated R."""
        return float(self.R[0]), float(self.R[-1])

    @property
    def is_real(self):
        """True when every sample has zero imaginary part."""
        return not np.any(self.amplitude.imag)


WeightFunction = ConstantBox | Gaussian | Tabulated


def weight_eval(w, R):
    """Evaluate F at `R` (scalar or array).

    Raises:
        OutOfRange: A tabulated weight evaluated outside its table.
        InvalidParams: `Gaussian(B=0)`, a delta weight without pointwise values.
    """
    R = np.asarray(R, dtype=float)
    if not np.all(np.isfinite(R)):
        raise InvalidParams("R must be finite")
    match w:
        case ConstantBox(V=V):
            values = np.where(np.abs(R) <= V / 2, 1.0, 0.0).astype(complex)
        case Gaussian(B=B):
            if B == 0:
                raise InvalidParams(
                    "Gaussian(B=0) is a delta weight without pointwise values",
                    invariant="B-positive",
                )
            norm = (B**2 * math.pi) ** -0.25
            values = (norm * np.exp(-(R**2) / (2 * B**2))).astype(complex)
        case Tabulated():
            lo, hi = w.support
            if np.any((lo > R) | (hi < R)):
                raise OutOfRange(f"R outside the table range [{lo}, {hi}]")
            values = np.interp(R, w.R, w.amplitude.real) + 1j * np.interp(
                R, w.R, w.amplitude.imag
            )
        case _:
            raise InvalidParams(f"unknown weight {w!r}")
    return values[()] if values.ndim == 0 else values


@dataclass(frozen=True)
class EffectiveVolumes:
    """Dimensionless delocalization of a weight.

    `v_eff` is `V/bs` for a box and `B/b` for a Gaussian; `v_c_eff = B/bs` is the
    semi-classical counterpart, defined for Gaussian and tabulated weights.
    """

    v_eff: float
    v_c_eff: float | None = None


def _semiclassical_volume(v, derived):
    return v * math.sqrt(derived.u2) if derived.bs is not None else None


def effective_volumes(params, w):
    """Effective volumes of `w` at `params`.

    A table has no printed effective volume; it gets the Gaussian-equivalent one,
    `sqrt(2)` times the standard deviation of `|F|^2` over `b`, which reduces to
    `B/b` for a tabulated Gaussian.
    """
    d = derive_params(params)
    match w:
        case ConstantBox(V=V):
            return EffectiveVolumes(V / d.require_bs("a box effective volume"))
        case Gaussian(B=B):
            v = B / params.b
            return EffectiveVolumes(v, _semiclassical_volume(v, d))
        case Tabulated():
            density = np.abs(w.amplitude) ** 2
            norm = np.trapezoid(density, w.R)
            mean = np.trapezoid(w.R * density, w.R) / norm
            var = np.trapezoid((w.R - mean) ** 2 * density, w.R) / norm
            v = math.sqrt(2 * max(var, 0.0)) / params.b
            return EffectiveVolumes(v, _semiclassical_volume(v, d))
    raise InvalidParams(f"unknown weight {w!r}")


def weight_from_veff(params, kind, v_eff, *, edges="bulk"):
    """The box or Gaussian weight whose effective volume is `v_eff`."""
    if not math.isfinite(v_eff) or v_eff < 0:
        raise InvalidParams(f"v_eff must be finite and >= 0, got {v_eff}")
    if kind == Gaussian.kind:
        return Gaussian(v_eff * params.b)
    if kind == ConstantBox.kind:
        bs = derive_params(params).require_bs("a box weight")
        return ConstantBox(v_eff * bs, edges=edges)
    raise InvalidParams(f"no effective-volume parametrization for weight kind {kind!r}")


def ho_potential_expression():
    """The harmonic potential that motivates the Gaussian forms, as printed.

    Only recorded for reference: nothing here solves dynamics in it, and the sign is
    kept as printed rather than corrected.
    """
    return "U_ho(mu, bs; r) = -hbar^2 r^2 / (2 mu bs^4)"
