"""Shared numerical infrastructure: grids, quadrature rules and the eigensolver.

Everything the physics modules integrate is a smooth, rapidly decaying Gaussian (or a
Gaussian cut by a box edge), so the default rule is the trapezoid rule, which converges
faster than any power for such integrands. Integrals over a hard-edged interval use
composite Gauss-Legendre panels instead, and unbounded Gaussian-weighted integrals can
use Gauss-Hermite nodes.

Refinement always doubles the resolution and compares consecutive results; the
accepted value is the finer one and the reported error is the difference, floored by
the rounding error of the sum.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg

from .errors import (
    InvalidParams,
    NoConvergence,
    NotSymmetric,
    QuadratureNotConverged,
)

logger = logging.getLogger(__name__)

SCHEMES = ("trapezoid", "gauss-hermite", "gauss-legendre")
MAX_REFINEMENTS = 20

# Gauss-Hermite nodes beyond this overflow exp(t^2) in double precision.
_HERMITE_MAX_NODES = 256
_LEGENDRE_ORDER = 8


@dataclass(frozen=True)
class Grid1D:
    """A uniform grid on [lo, hi].

    A closed grid includes both ends (spacing `(hi - lo)/(n - 1)`, trapezoid
    weights). A periodic grid samples one period `[lo, hi)` (spacing
    `(hi - lo)/n`, equal weights), which is exact for periodic integrands.
    """

    lo: float
    hi: float
    n: int
    periodic: bool = False

    def __post_init__(self):
        """Reject grids that are not strictly increasing."""
        if self.n < 2:
            raise InvalidParams(f"grid needs n >= 2, got {self.n}")
        if not self.hi > self.lo:
            raise InvalidParams(f"grid needs hi > lo, got [{self.lo}, {self.hi}]")

    @classmethod
    def symmetric(cls, half_width, n, *, periodic=False):
        """Grid on [-half_width, half_width]."""
        return cls(-half_width, half_width, n, periodic=periodic)

    @property
    def spacing(self):
        """Distance between neighbouring points."""
        intervals = self.n if self.periodic else self.n - 1
        return (self.hi - self.lo) / intervals

    @cached_property
    def points(self):
        """The grid points, strictly increasing."""
        return self.lo + self.spacing * np.arange(self.n)

    @cached_property
    def weights(self):
        """Quadrature weights: trapezoid on a closed grid, uniform on a periodic one."""
        w = np.full(self.n, self.spacing)
        if not self.periodic:
            w[0] = w[-1] = self.spacing / 2
        return w

    def refined(self):
        """The grid with every interval halved (the period kept for periodic grids)."""
        n = 2 * self.n if self.periodic else 2 * self.n - 1
        return Grid1D(self.lo, self.hi, n, periodic=self.periodic)


@dataclass(frozen=True)
class QuadratureSpec:
    """How `integrate_1d` samples and when it stops refining."""

    scheme: str = "trapezoid"
    abs_tol: float = 1e-12
    rel_tol: float = 1e-8
    max_refinements: int = 12
    initial_points: int = 33

    def __post_init__(self):
        """Validate the scheme name, the tolerances and the refinement cap."""
        if self.scheme not in SCHEMES:
            raise InvalidParams(f"unknown quadrature scheme {self.scheme!r}")
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise InvalidParams("quadrature tolerances must be positive")
        if not 0 < self.max_refinements <= MAX_REFINEMENTS:
            raise InvalidParams(
                f"max_refinements must be in 1..{MAX_REFINEMENTS}, "
                f"got {self.max_refinements}"
            )
        if self.initial_points < 3:
            raise InvalidParams("initial_points must be at least 3")

    def tolerance(self, scale):
        """Absolute tolerance for a result of magnitude `scale`."""
        return max(self.abs_tol, self.rel_tol * scale)


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class QuadratureResult:
    """A converged integral with its error estimate and the nodes it took."""

    value: float | complex
    error: float
    points: int


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted descending and the matching orthonormal eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray = field(repr=False)


def trapezoid_rule(lo, hi, n):
    """Nodes and weights of the n-point trapezoid rule on [lo, hi]."""
    grid = Grid1D(lo, hi, n)
    return grid.points, grid.weights


def gauss_legendre_panels(breaks, order=_LEGENDRE_ORDER):
    """Composite Gauss-Legendre nodes and weights over consecutive breakpoints."""
    breaks = np.asarray(breaks, dtype=float)
    t, w = np.polynomial.legendre.leggauss(order)
    half = np.diff(breaks)[:, None] / 2
    mid = (breaks[:-1] + breaks[1:])[:, None] / 2
    return (mid + half * t).ravel(), (half * w).ravel()


def subdivide(breaks, factor):
    """Split every interval between breakpoints into `factor` equal parts."""
    breaks = np.asarray(breaks, dtype=float)
    frac = np.arange(factor) / factor
    inner = breaks[:-1, None] + np.diff(breaks)[:, None] * frac
    return np.append(inner.ravel(), breaks[-1])


def gauss_hermite_rule(n, center=0.0, scale=1.0):
    """Nodes and weights integrating f(x) dx over the real line.

    The classical rule integrates g(t) exp(-t^2); folding exp(t^2) back into the
    weights turns it into a plain rule for integrands that decay like a Gaussian of
    width about `scale` around `center`.
    """
    t, w = np.polynomial.hermite.hermgauss(n)
    return center + scale * t, scale * w * np.exp(t**2)


def _rounding_floor(values, weights):
    """Rounding error of a weighted sum."""
    return 64 * np.finfo(float).eps * float(np.sum(np.abs(values) * weights))


def integrate_1d(f, lo=None, hi=None, spec=DEFAULT_SPEC, *, center=0.0, scale=1.0):
    """Integrate a vectorized function, refining until two passes agree.

    Args:
        f: Callable taking an array of abscissae and returning an array of values;
            called once per pass, possibly from several threads at once.
        lo: Lower limit (trapezoid and Gauss-Legendre schemes).
        hi: Upper limit (trapezoid and Gauss-Legendre schemes).
        spec: Scheme, tolerances and refinement cap.
        center: Centre of the integrand (Gauss-Hermite only).
        scale: Width of the integrand (Gauss-Hermite only).

    Returns:
        The finer of the two agreeing passes with its error estimate.

    Raises:
        QuadratureNotConverged: No two consecutive passes agreed within tolerance,
            or the Gauss-Hermite rule reached its largest node count first.
    """
    if spec.scheme == "gauss-hermite":

        def rule(level):
            n = min(16 * 2**level, _HERMITE_MAX_NODES)
            return gauss_hermite_rule(n, center, scale)

    else:
        if lo is None or hi is None or not hi > lo:
            raise InvalidParams(f"{spec.scheme} needs finite limits lo < hi")
        if spec.scheme == "trapezoid":

            def rule(level):
                return trapezoid_rule(lo, hi, (spec.initial_points - 1) * 2**level + 1)

        else:

            def rule(level):
                return gauss_legendre_panels(np.linspace(lo, hi, 2**level + 1))

    previous, points = None, 0
    for level in range(spec.max_refinements + 1):
        x, w = rule(level)
        if previous is not None and x.size == points:
            # The rule stopped growing; agreeing with itself proves nothing.
            raise QuadratureNotConverged(
                f"{spec.scheme} quadrature did not converge within "
                f"{points} points"
            )
        points = x.size
        values = np.asarray(f(x))
        value = np.sum(values * w)
        if previous is not None:
            diff = float(abs(value - previous))
            logger.debug(
                "%s pass %d: %d points, value %.12g, change %.3g",
                spec.scheme,
                level,
                x.size,
                abs(value),
                diff,
            )
            if diff <= spec.tolerance(abs(value)):
                error = max(diff, _rounding_floor(values, w))
                return QuadratureResult(value.item(), error, x.size)
        previous = value
    raise QuadratureNotConverged(
        f"{spec.scheme} quadrature did not converge within "
        f"{spec.max_refinements} refinements"
    )


def refine_until_converged(evaluate, spec=DEFAULT_SPEC, *, label="quadrature"):
    """Evaluate at increasing resolution levels until two consecutive arrays agree.

    `evaluate(level)` returns an array; agreement is the largest elementwise change
    relative to the largest magnitude. Returns `(values, level)` of the finer pass.
    """
    previous = evaluate(0)
    for level in range(1, spec.max_refinements + 1):
        current = evaluate(level)
        scale = float(np.max(np.abs(current)))
        change = float(np.max(np.abs(current - previous)))
        logger.debug(
            "%s level %d: change %.3g (scale %.3g)", label, level, change, scale
        )
        if change <= spec.tolerance(scale):
            return current, level
        previous = current
    raise QuadratureNotConverged(
        f"{label} did not converge within {spec.max_refinements} refinements"
    )


def check_symmetric(matrix, tol=1e-10):
    """Raise NotSymmetric unless the matrix equals its conjugate transpose."""
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {matrix.shape}")
    scale = max(1.0, float(np.max(np.abs(matrix), initial=0.0)))
    asym = float(np.max(np.abs(matrix - matrix.conj().T), initial=0.0))
    if asym > tol * scale:
        raise NotSymmetric(f"matrix asymmetry {asym:.3g} exceeds {tol * scale:.3g}")
    return matrix


def symmetric_eigs(matrix):
    """Eigen-decompose a real symmetric (or complex Hermitian) matrix.

    Returns:
        Eigenvalues sorted descending with orthonormal eigenvectors in the columns.

    Raises:
        NotSymmetric: The matrix is not symmetric within 1e-10 of its scale.
        NoConvergence: LAPACK failed to converge.
    """
    matrix = check_symmetric(matrix)
    try:
        values, vectors = scipy.linalg.eigh(matrix)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"eigendecomposition failed: {exc}") from exc
    return EigenDecomposition(values[::-1], vectors[:, ::-1])


def symmetric_eigvals(matrix):
    """Eigenvalues only, sorted descending; same contract as `symmetric_eigs`."""
    matrix = check_symmetric(matrix)
    try:
        values = scipy.linalg.eigvalsh(matrix)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(f"eigenvalue computation failed: {exc}") from exc
    return values[::-1]
