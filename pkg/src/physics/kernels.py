"""Position-space objects: one-body kernels, the cm wave function, density matrices.

Tracing particle b out of the two-body state leaves the one-body kernel

    rho(q, q') = Int dR dR' F(R) F*(R') g_b(q - R) g_b(q' - R') D(R - R'),
    D(d) = exp(-u d^2 / 4b^2)

with `g_b` the normalized Gaussian packet of width `b`; the decoherence factor `D`
is the overlap of particle b's packets and the only source of mixedness. The
semi-classical kernel keeps only the diagonal `|f(R)|^2` of the weight and widens the
packets to `bs`.

Three evaluation strategies sit behind one
[`KernelFunction`][physics.kernels.KernelFunction]:

- Gaussian weights have closed-form kernels
  `exp(-(q + q')^2 / 4s^2 - beta (q - q')^2) / sqrt(pi s^2)`;
- a box in bulk mode is a ring of circumference `V`, whose kernel is a periodic sum of
  images of `exp(-(q - q')^2 / 4bs^2) / V`;
- everything else is integrated over `R` (and `R'`) on quadrature nodes, refined until
  sample values agree to 1e-8 relative.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy.special import erf

from .errors import GridTooCoarse, InvalidParams
from .model import ConstantBox, Gaussian, Tabulated, derive_params, weight_eval
from .numerics import (
    Grid1D,
    QuadratureSpec,
    gauss_legendre_panels,
    integrate_1d,
    refine_until_converged,
    subdivide,
    symmetric_eigvals,
    trapezoid_rule,
)

logger = logging.getLogger(__name__)

DEFAULT_GRID_N = 1024
MIN_GRID_N = 64
METHODS = ("auto", "quadrature")

TRACE_TOL = 1e-6
TAIL_TOL = 1e-8
_MAX_EXTENSIONS = 8
_NODE_SPEC = QuadratureSpec(abs_tol=1e-14, rel_tol=1e-8, max_refinements=4)


def packet(x, center, width):
    """Normalized packet `(pi w^2)^(-1/4) exp(-(x - c)^2 / 2w^2)`, outer in x and c."""
    d = np.subtract.outer(np.asarray(x, dtype=float), np.asarray(center, dtype=float))
    return (math.pi * width**2) ** -0.25 * np.exp(-(d**2) / (2 * width**2))


@dataclass(frozen=True)
class GaussianShape:
    """The kernel `exp(-(x + x')^2 / 4 s2 - beta (x - x')^2) / sqrt(pi s2)`.

    `s2` sets the spread of the diagonal, `beta` the coherence length; the state is
    pure exactly when `beta = 1 / (4 s2)`.
    """

    s2: float
    beta: float

    def __call__(self, q, qp):
        """Kernel value, broadcasting `q` against `qp`."""
        q, qp = np.asarray(q, dtype=float), np.asarray(qp, dtype=float)
        return np.exp(-((q + qp) ** 2) / (4 * self.s2) - self.beta * (q - qp) ** 2) / (
            math.sqrt(math.pi * self.s2)
        )

    def diagonal(self, q):
        """`rho(q, q)`."""
        q = np.asarray(q, dtype=float)
        return np.exp(-(q**2) / self.s2) / math.sqrt(math.pi * self.s2)

    def wigner(self, q, p, hbar):
        """Wigner transform, normalized under dq dp / (2 pi hbar)."""
        q, p = np.asarray(q, dtype=float), np.asarray(p, dtype=float)
        peak = 1 / math.sqrt(self.s2 * self.beta)
        return peak * np.exp(-(q**2) / self.s2 - p**2 / (4 * self.beta * hbar**2))

    @property
    def purity(self):
        """Tr[rho^2]."""
        return 1 / (2 * math.sqrt(self.s2 * self.beta))


def gaussian_shape(params, B, *, semiclassical=False):
    """Closed-form kernel of a Gaussian weight of width `B` (`B = 0` included).

    The exact kernel follows from doing both R integrals: `s2 = b^2 + B^2` and
    `beta = (b^2 + u B^2) / (4 b^2 (b^2 + (1 + u) B^2))`. The semi-classical one
    convolves `|f|^2` with packets of width `bs`: `s2 = bs^2 + B^2`,
    `beta = 1 / (4 bs^2)`.
    """
    d = derive_params(params)
    b2, B2 = params.b**2, B**2
    if semiclassical:
        bs = d.require_bs("the semi-classical kernel")
        return GaussianShape(bs**2 + B2, 1 / (4 * bs**2))
    beta = (b2 + params.u * B2) / (4 * b2 * (b2 + (1 + params.u) * B2))
    return GaussianShape(b2 + B2, beta)


@dataclass(frozen=True)
class RingKernel:
    """A box of circumference `V` closed into a ring: translation invariant, periodic.

    `bs = None` (u = 0) is the fully coherent ring, `rho = 1/V` everywhere.
    """

    V: float
    bs: float | None

    def __call__(self, q, qp):
        """Kernel value, broadcasting `q` against `qp`."""
        d = np.asarray(q, dtype=float) - np.asarray(qp, dtype=float)
        if self.bs is None:
            return np.full(d.shape, 1 / self.V)
        images = math.ceil(12 * self.bs / self.V) + 1
        n = np.arange(-images, images + 1)
        shifted = d[..., None] + n * self.V
        return np.exp(-(shifted**2) / (4 * self.bs**2)).sum(axis=-1) / self.V

    def diagonal(self, q):
        """`rho(q, q)`, constant on the ring."""
        return self(q, q)

    def wigner(self, q, p, hbar):
        """Wigner transform of the ring state, uniform in q."""
        if self.bs is None:
            raise InvalidParams(
                "a coherent ring (u = 0) is a momentum eigenstate with no sampled "
                "Wigner function",
                invariant="u-positive",
            )
        q, p = np.broadcast_arrays(
            np.asarray(q, dtype=float), np.asarray(p, dtype=float)
        )
        peak = 2 * self.bs * math.sqrt(math.pi) / self.V
        return peak * np.exp(-(self.bs**2) * p**2 / hbar**2)


@dataclass(frozen=True, eq=False)
class RNodes:
    """Quadrature nodes over the generator coordinate with F sampled on them."""

    R: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    F: np.ndarray = field(repr=False)
    level: int = 0

    @property
    def weighted(self):
        """`w_k F(R_k)`."""
        return self.weights * self.F

    @property
    def density(self):
        """`w_k |F(R_k)|^2`, normalized to sum 1: `|f|^2` on the nodes."""
        mass = self.weights * np.abs(self.F) ** 2
        return mass / mass.sum()


def _panel_width(params, scale):
    """Largest panel that resolves packets of width `scale` and the decoherence."""
    width = scale
    if params.u > 0:
        width = min(width, 2 * params.b / math.sqrt(params.u))
    return width


def r_nodes(w, h0, level=0):
    """Quadrature nodes for `Int dR F(R) ...` at refinement `level`.

    Gaussians use the trapezoid rule on +-10B, boxes and tables composite
    Gauss-Legendre panels no wider than `h0 / 2^level`, aligned with the box edges and
    the table samples so F is smooth inside every panel.
    """
    match w:
        case Gaussian(B=B):
            if B == 0:
                raise InvalidParams("Gaussian(B=0) has no R quadrature")
            step = min(h0, B) / 2 ** (level + 1)
            n = 2 * math.ceil(10 * B / step) + 1
            R, weights = trapezoid_rule(-10 * B, 10 * B, n)
        case ConstantBox(V=V):
            panels = math.ceil(V / h0) * 2**level
            R, weights = gauss_legendre_panels(np.linspace(-V / 2, V / 2, panels + 1))
        case Tabulated():
            factor = max(1, math.ceil(float(np.max(np.diff(w.R))) / h0)) * 2**level
            R, weights = gauss_legendre_panels(subdivide(w.R, factor))
        case _:
            raise InvalidParams(f"unknown weight {w!r}")
    F = np.asarray(weight_eval(w, R))
    if np.all(F.imag == 0):
        F = F.real
    return RNodes(R, weights, F, level)


def _decoherence(R, params, factor):
    d = np.subtract.outer(R, R)
    return np.exp(-factor * d**2 / (4 * params.b**2))


@dataclass(frozen=True, eq=False)
class NodeKernel:
    """Kernel integrated over quadrature nodes; `rho = A M A^T / norm`."""

    params: object
    nodes: RNodes
    semiclassical: bool = False

    @cached_property
    def width(self):
        """Packet width in the kernel: `b` exact, `bs` semi-classical."""
        if self.semiclassical:
            return derive_params(self.params).require_bs("the semi-classical kernel")
        return self.params.b

    @cached_property
    def coupling(self):
        """`M_kl` with the two-body norm divided out."""
        f = self.nodes.weighted
        if self.semiclassical:
            return np.diag(self.nodes.density)
        pair = np.outer(f, np.conj(f))
        overlap = _decoherence(self.nodes.R, self.params, 1 + self.params.u)
        norm = float(np.real(np.sum(pair * overlap)))
        if norm <= 0:
            raise InvalidParams("weight has zero norm on its support")
        return pair * _decoherence(self.nodes.R, self.params, self.params.u) / norm

    def _packets(self, x):
        return packet(x, self.nodes.R, self.width)

    def __call__(self, q, qp):
        """Kernel value, broadcasting `q` against `qp`."""
        q, qp = np.broadcast_arrays(
            np.asarray(q, dtype=float), np.asarray(qp, dtype=float)
        )
        a, ap = self._packets(q.ravel()), self._packets(qp.ravel())
        values = np.sum((a @ self.coupling) * ap, axis=1)
        return values.reshape(q.shape)

    def diagonal(self, q):
        """`rho(q, q)`."""
        q = np.asarray(q, dtype=float)
        a = self._packets(q.ravel())
        return np.real(np.sum((a @ self.coupling) * a, axis=1)).reshape(q.shape)

    def matrix(self, points):
        """`rho(q_i, q_j)` on a grid."""
        a = self._packets(points)
        return a @ self.coupling @ a.T


def _sample_points(support, b):
    lo, hi = support
    q = np.linspace(lo, hi, 5)
    return np.concatenate([q, q]), np.concatenate([q, q + b])


@lru_cache(maxsize=64)
def _converged_node_kernel(params, w, semiclassical):
    """Refine the R quadrature until sampled kernel values agree to 1e-8."""
    width = derive_params(params).bs if semiclassical else params.b
    h0 = _panel_width(params, min(params.b, width))
    q, qp = _sample_points(w.support, params.b)
    kernels = {}

    def sampled(level):
        kernels[level] = NodeKernel(params, r_nodes(w, h0, level), semiclassical)
        return kernels[level](q, qp)

    _, level = refine_until_converged(
        sampled, _NODE_SPEC, label=f"R quadrature for {w!r}"
    )
    kernel = kernels[level]
    logger.debug("R quadrature for %r converged with %d nodes", w, kernel.nodes.R.size)
    return kernel


def default_half_width(params, w):
    """Half-width L of the default position grid for weight `w`."""
    d = derive_params(params)
    b = params.b
    match w:
        case Gaussian(B=B):
            return 6 * (b + B)
        case ConstantBox(V=V):
            return V / 2 + 6 * (d.bs if d.bs is not None else b)
        case Tabulated():
            lo, hi = w.support
            return max(abs(lo), abs(hi)) + 6 * max(b, d.b2 if d.b2 is not None else b)
    raise InvalidParams(f"unknown weight {w!r}")


@dataclass(frozen=True)
class KernelFunction:
    """Exact or semi-classical one-body kernel of a weight, with unit trace.

    Calling it evaluates `rho(q, q')` (broadcasting); `method="quadrature"` forces the
    R integration even where a closed form exists, for cross-checks.
    """

    params: object
    weight: object
    semiclassical: bool = False
    method: str = "auto"

    def __post_init__(self):
        """Validate the method and, for rho^cl, that bs exists."""
        if self.method not in METHODS:
            raise InvalidParams(
                f"kernel method must be one of {METHODS}, got {self.method!r}"
            )
        if self.semiclassical:
            derive_params(self.params).require_bs("the semi-classical kernel")

    @property
    def label(self):
        """Short description used in logs and reports."""
        name = "rho_cl" if self.semiclassical else "rho"
        return f"{name}[{self.weight!r}, u={self.params.u:g}]"

    @cached_property
    def impl(self):
        """The concrete evaluator: closed form, ring or quadrature nodes."""
        w = self.weight
        if isinstance(w, Gaussian) and (self.method == "auto" or w.B == 0):
            return gaussian_shape(self.params, w.B, semiclassical=self.semiclassical)
        if isinstance(w, ConstantBox) and w.edges == "bulk":
            return RingKernel(w.V, derive_params(self.params).bs)
        return _converged_node_kernel(self.params, w, self.semiclassical)

    @property
    def period(self):
        """Circumference of the ring for bulk boxes, else None."""
        return self.impl.V if isinstance(self.impl, RingKernel) else None

    @property
    def default_half_width(self):
        """Half-width of the default position grid."""
        return default_half_width(self.params, self.weight)

    def __call__(self, q, qp):
        """`rho(q, q')`."""
        return self.impl(q, qp)

    def diagonal(self, q):
        """`rho(q, q)`."""
        return self.impl.diagonal(q)

    def matrix(self, points):
        """`rho(q_i, q_j)` on the given points."""
        if isinstance(self.impl, NodeKernel):
            return self.impl.matrix(points)
        return self.impl(points[:, None], points[None, :])


def rho_kernel(params, w, q1, q1p, *, method="auto"):
    """Exact one-body kernel `rho(q1, q1')` of the normalized two-body state."""
    return KernelFunction(params, w, method=method)(q1, q1p)


def rho_cl_kernel(params, w, q1, q1p, *, method="auto"):
    """Semi-classical kernel `Int dR |f(R)|^2 g_bs(q1 - R) g_bs(q1' - R)`.

    Raises:
        InvalidParams: `u = 0`, where `bs` does not exist.
    """
    return KernelFunction(params, w, semiclassical=True, method=method)(q1, q1p)


@dataclass(frozen=True)
class GridSpec:
    """Point count and half-width of a position grid; `L=None` picks the default."""

    n: int = DEFAULT_GRID_N
    L: float | None = None

    def __post_init__(self):
        """Enforce the minimum resolution."""
        if self.n < MIN_GRID_N:
            raise InvalidParams(f"grid needs n >= {MIN_GRID_N}, got {self.n}")
        if self.L is not None and not self.L > 0:
            raise InvalidParams(f"grid half-width must be > 0, got {self.L}")

    def doubled(self):
        """Same extent, twice the points."""
        return GridSpec(2 * self.n, self.L)

    def halved(self):
        """Same extent, half the points (never below the minimum)."""
        return GridSpec(max(MIN_GRID_N, self.n // 2), self.L)


@dataclass(frozen=True)
class DensityMatrix:
    """A kernel sampled on a uniform grid, normalized so `spacing * Sum rho_ii = 1`.

    `raw_trace` is the trace before that renormalization, a discretization diagnostic
    that should be 1 up to truncation and rounding.
    """

    grid: Grid1D
    values: np.ndarray = field(repr=False)
    raw_trace: float
    label: str = ""

    @property
    def trace_weight(self):
        """Grid spacing, the weight of every diagonal element in the trace."""
        return self.grid.spacing

    @property
    def operator(self):
        """The matrix of the operator on the grid, `spacing * values`."""
        return self.trace_weight * self.values

    def trace(self):
        """Tr[rho]."""
        return float(np.real(np.trace(self.operator)))

    def purity(self):
        """Tr[rho^2]."""
        return float(np.sum(np.abs(self.operator) ** 2))

    @cached_property
    def eigenvalues(self):
        """Spectrum sorted descending."""
        return symmetric_eigvals(self.operator)

    @property
    def min_eigenvalue(self):
        """Smallest eigenvalue."""
        return float(self.eigenvalues[-1])


def _diagonal_mass(kernel, L, n):
    points, weights = trapezoid_rule(-L, L, n)
    return float(np.sum(weights * np.real(kernel.diagonal(points))))


def _extend_half_width(kernel, L, n):
    """Grow L (and n with it) until the diagonal mass outside [-L, L] is below 1e-8."""
    for _ in range(_MAX_EXTENSIONS):
        inside = _diagonal_mass(kernel, L, n)
        wider = _diagonal_mass(kernel, 1.5 * L, math.ceil(1.5 * n))
        if wider - inside <= TAIL_TOL * abs(wider):
            return L, n
        L, n = 1.5 * L, math.ceil(1.5 * n)
        logger.info(
            "extended grid for %s to L=%.4g, n=%d",
            getattr(kernel, "label", "kernel"),
            L,
            n,
        )
    raise GridTooCoarse(
        f"diagonal mass still outside [-{L:.4g}, {L:.4g}] after extending"
    )


def _raw_trace(kernel, grid):
    return grid.spacing * float(np.sum(np.real(kernel.diagonal(grid.points))))


def rho_matrix(kernel, grid_spec=None):
    """Sample a kernel on a grid and renormalize it to unit trace.

    Args:
        kernel: A [`KernelFunction`][physics.kernels.KernelFunction] or any callable
            `kernel(q, q')` that broadcasts (which then must also offer `diagonal`
            or be given an explicit `L`).
        grid_spec: Point count and half-width; the default half-width comes from the
            kernel and is extended until the diagonal tail mass is below 1e-8. A bulk
            box always uses a periodic grid over one circumference.

    Raises:
        GridTooCoarse: The raw trace moves by more than 1e-6 relative when the number
            of points doubles, or is not positive.
    """
    spec = grid_spec or GridSpec()
    if not hasattr(kernel, "diagonal"):
        kernel = _CallableKernel(kernel)
    period = getattr(kernel, "period", None)
    if period is not None:
        grid = Grid1D(-period / 2, period / 2, spec.n, periodic=True)
    else:
        L = spec.L
        if L is None:
            L = getattr(kernel, "default_half_width", None)
        if L is None:
            raise InvalidParams("a plain kernel callable needs a grid half-width")
        L, n = _extend_half_width(kernel, L, spec.n)
        grid = Grid1D.symmetric(L, n)
    raw = _raw_trace(kernel, grid)
    if period is None:
        finer = _raw_trace(kernel, grid.refined())
        if not raw > 0 or abs(raw - finer) > TRACE_TOL * abs(finer):
            raise GridTooCoarse(
                f"trace {raw:.10g} on {grid.n} points vs {finer:.10g} on "
                f"{grid.refined().n}: the grid does not resolve the kernel"
            )
    elif not raw > 0:
        raise GridTooCoarse(f"non-positive trace {raw:.3g} on the ring grid")
    if hasattr(kernel, "matrix"):
        values = kernel.matrix(grid.points)
    else:
        values = kernel(grid.points[:, None], grid.points[None, :])
    values = np.asarray(values)
    values = (values + values.conj().T) / 2
    if not np.any(values.imag):
        values = values.real
    logger.debug(
        "%s on %d points over [%.4g, %.4g]: raw trace %.12g",
        getattr(kernel, "label", "kernel"),
        grid.n,
        grid.lo,
        grid.hi,
        raw,
    )
    return DensityMatrix(grid, values / raw, raw, getattr(kernel, "label", ""))


@dataclass(frozen=True)
class _CallableKernel:
    """Adapter giving a bare `kernel(q, q')` callable a `diagonal`."""

    func: Callable

    label = "kernel"

    def __call__(self, q, qp):
        return self.func(q, qp)

    def diagonal(self, q):
        return self.func(q, q)


@dataclass(frozen=True, eq=False)
class PureState:
    """A normalized one-dimensional wave function.

    `width` is set for Gaussian states centred at the origin (their Wigner function is
    then closed-form); `extent` bounds the region holding the state and `scale` is its
    shortest length scale, which sets the momentum range of its Wigner function.
    """

    amplitude: Callable = field(repr=False)
    hbar: float
    extent: float
    scale: float
    width: float | None = None
    label: str = "state"

    def __call__(self, x):
        """Amplitude at `x`."""
        return self.amplitude(np.asarray(x, dtype=float))

    def norm(self):
        """Int |psi|^2 dx over +-extent."""
        return integrate_1d(
            lambda x: np.abs(self(x)) ** 2, -self.extent, self.extent
        ).value


@dataclass(frozen=True, eq=False)
class CmWaveFunction(PureState):
    """The centre-of-mass wave function `Phi_G` with the weight it came from."""

    weight: object = None
    bG: float = 0.0


def gaussian_state(width, hbar, label="state"):
    """The Gaussian `(pi w^2)^(-1/4) exp(-x^2 / 2w^2)`."""

    def amplitude(x):
        return packet(x, 0.0, width).reshape(np.shape(x))

    return PureState(amplitude, hbar, 10 * width, width, width, label)


def intrinsic_state(params):
    """Relative-motion wave function of the pair, a Gaussian of width `bs`."""
    bs = derive_params(params).require_bs("the intrinsic state")
    return gaussian_state(bs, params.hbar, "intrinsic")


@lru_cache(maxsize=64)
def cm_wavefunction(params, w):
    """`Phi_G(r) = Int dR F(R) g_bG(r - R)`, normalized.

    A Gaussian weight gives a Gaussian of width `beta = sqrt(B^2 + u1 b^2)`, a box the
    error-function plateau of height `1/sqrt(V)` (in either edge mode), a table a sum
    over its quadrature nodes.
    """
    d = derive_params(params)
    bG, hbar = d.bG, params.hbar
    match w:
        case Gaussian(B=B):
            beta = d.beta(B)
            state = gaussian_state(beta, hbar, "Phi_G")
            return CmWaveFunction(
                state.amplitude, hbar, state.extent, beta, beta, "Phi_G", w, bG
            )
        case ConstantBox(V=V):
            root2 = math.sqrt(2) * bG

            def plateau(x):
                return erf((x + V / 2) / root2) - erf((x - V / 2) / root2)

            extent, scale = V / 2 + 8 * bG, bG
            shape = plateau
        case Tabulated():
            nodes = r_nodes(w, bG, level=1)
            f = nodes.weighted

            def shape(x):
                return packet(np.ravel(x), nodes.R, bG) @ f

            lo, hi = w.support
            extent, scale = max(abs(lo), abs(hi)) + 8 * bG, bG
        case _:
            raise InvalidParams(f"unknown weight {w!r}")
    mass = integrate_1d(lambda x: np.abs(shape(x)) ** 2, -extent, extent).value
    norm = math.sqrt(mass)

    def amplitude(x):
        return np.reshape(shape(x), np.shape(x)) / norm

    logger.debug("Phi_G for %r: raw norm^2 %.10g", w, mass)
    return CmWaveFunction(amplitude, hbar, extent, scale, None, "Phi_G", w, bG)
