"""Wigner and hbar/2-Husimi functions, the two-body Wigner product and coarse graining.

Every Wigner function here is normalized under `dq dp / (2 pi hbar)`, so its
phase-space purity `Int W^2 dq dp / (2 pi hbar)` equals Tr[rho^2]. The hbar/2-Husimi
function lives on a phase space with Planck's constant halved and is normalized under
`dq dp / (2 pi (hbar/2))`.

Point operations (`wigner_one_body`, `coarse_grain`, ...) broadcast over array
arguments; the `*_field` builders sample the same functions on a (q, p) grid and
return a [`PhaseSpaceField`][physics.phase_space.PhaseSpaceField], which is what the
entropy functionals consume.
"""

import enum
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .errors import InvalidParams, NumericalError
from .kernels import (
    GaussianShape,
    KernelFunction,
    RingKernel,
    cm_wavefunction,
    default_half_width,
    intrinsic_state,
)
from .model import ConstantBox, derive_params
from .numerics import Grid1D, QuadratureSpec, integrate_1d

logger = logging.getLogger(__name__)

DEFAULT_PHASE_N = 256
MIN_PHASE_N = 33
# Samples per shortest length scale of a state in numerical pure-state transforms.
_SAMPLES_PER_SCALE = 8
_MAX_PURE_N = 2049
_IMAG_TOL = 1e-10
_PURE_SPEC = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-10, initial_points=129)


class Measure(enum.Enum):
    """Integration measure attached to a phase-space field."""

    WIGNER = "wigner"
    HUSIMI_HALF = "husimi-half"

    def cell(self, hbar):
        """Phase-space volume per state: `2 pi hbar`, or `2 pi (hbar/2)`."""
        return 2 * math.pi * (hbar if self is Measure.WIGNER else hbar / 2)


@dataclass(frozen=True)
class PhaseSpaceField:
    """A real function sampled on a (q, p) grid, `values[i, j] = f(q_i, p_j)`.

    `hbar` is the physical Planck constant; the measure decides whether a state
    occupies `2 pi hbar` or `2 pi (hbar/2)` of phase space.
    """

    q: Grid1D
    p: Grid1D
    values: np.ndarray = field(repr=False)
    measure: Measure
    hbar: float
    label: str = ""

    def __post_init__(self):
        """Check the value array matches the grids."""
        if np.shape(self.values) != (self.q.n, self.p.n):
            raise InvalidParams(
                f"field values have shape {np.shape(self.values)}, "
                f"grid is {self.q.n} x {self.p.n}"
            )

    @property
    def cell(self):
        """Phase-space volume per state under the field's measure."""
        return self.measure.cell(self.hbar)

    @cached_property
    def cell_weights(self):
        """Quadrature weights of every grid point, measure included."""
        return np.outer(self.q.weights, self.p.weights) / self.cell

    def integrate(self, values=None):
        """Integrate `values` (default: the field itself) under the field's measure."""
        values = self.values if values is None else values
        return float(np.sum(values * self.cell_weights))

    def normalization(self):
        """Integral of the field; 1 for a properly normalized distribution."""
        return self.integrate()

    def purity(self):
        """Integral of the squared field, the phase-space route to Tr[rho^2]."""
        return self.integrate(self.values**2)


def _scalar_or_array(values):
    values = np.asarray(values)
    return values[()] if values.ndim == 0 else values


def phase_grids(params, w, n=DEFAULT_PHASE_N):
    """Default (q, p) grids for the one-body functions of weight `w`.

    q spans the position grid of the kernel (one period for a bulk box), p spans
    `+-6 hbar / min(b, bs)`.
    """
    if n < MIN_PHASE_N:
        raise InvalidParams(f"phase-space grid needs n >= {MIN_PHASE_N}, got {n}")
    d = derive_params(params)
    if isinstance(w, ConstantBox) and w.edges == "bulk":
        q = Grid1D(-w.V / 2, w.V / 2, n, periodic=True)
    else:
        q = Grid1D.symmetric(default_half_width(params, w), n)
    shortest = min(params.b, d.bs) if d.bs is not None else params.b
    return q, Grid1D.symmetric(6 * params.hbar / shortest, n)


def _node_wigner(kernel, q, p):
    """Wigner transform of a quadrature-node kernel, one row per q value.

    With `m = (R_k + R_l)/2` and `d = R_k - R_l` the integral over the off-diagonal
    coordinate is Gaussian and done in closed form:

        W = 2 exp(-b^2 p^2/hbar^2) Sum_kl M_kl exp(-(q - m)^2/b^2) exp(-i p d/hbar)

    Semi-classically only `k = l` survives, with `bs` in place of `b`. For u > 0 only
    nodes within reach of q contribute, which keeps every row a small matrix product;
    a pure state (u = 0) couples every pair.
    """
    params, nodes = kernel.params, kernel.nodes
    b, hbar = kernel.width, params.hbar
    q = np.atleast_1d(np.asarray(q, dtype=float))
    p = np.atleast_1d(np.asarray(p, dtype=float))
    envelope = 2 * np.exp(-(b**2) * p**2 / hbar**2)
    if kernel.semiclassical:
        spatial = np.exp(-np.subtract.outer(q, nodes.R) ** 2 / b**2) @ nodes.density
        return np.outer(spatial, envelope)
    # Pairs matter while their midpoint is within 6b of q and the decoherence
    # factor exp(-u d^2/4b^2) has not cut them off; at u = 0 nothing is cut off.
    reach = 6 * b + 12 * b / math.sqrt(params.u) if params.u > 0 else math.inf
    out = np.zeros((q.size, p.size))
    residue = 0.0
    for i, qi in enumerate(q):
        near = np.flatnonzero(np.abs(nodes.R - qi) <= reach)
        if near.size == 0:
            continue
        R = nodes.R[near]
        mid = (R[:, None] + R[None, :]) / 2
        local = kernel.coupling[np.ix_(near, near)] * np.exp(-((qi - mid) ** 2) / b**2)
        phase = np.exp(-1j * np.outer(p, R) / hbar)
        row = np.sum((phase @ local) * phase.conj(), axis=1)
        residue = max(residue, float(np.max(np.abs(row.imag))))
        out[i] = envelope * row.real
    if residue > _IMAG_TOL * max(float(np.max(np.abs(out))), 1.0):
        raise NumericalError(
            f"Wigner transform left an imaginary residue of {residue:.3g}",
            invariant="real-wigner",
        )
    return out


def _kernel_wigner(kernel, q, p, *, grid):
    """Wigner function of a kernel, on the outer product of q and p or at pairs."""
    impl = kernel.impl
    hbar = kernel.params.hbar
    if grid:
        if isinstance(impl, GaussianShape | RingKernel):
            return impl.wigner(q[:, None], p[None, :], hbar)
        return _node_wigner(impl, q, p)
    q, p = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(p, dtype=float))
    if isinstance(impl, GaussianShape | RingKernel):
        return _scalar_or_array(impl.wigner(q, p, hbar))
    pairs = zip(q.ravel(), p.ravel(), strict=True)
    flat = [_node_wigner(impl, qi, pi)[0, 0] for qi, pi in pairs]
    return _scalar_or_array(np.reshape(flat, q.shape))


def wigner_one_body(params, w, q1, p1, *, method="auto"):
    """Wigner function of the one-body density matrix at `(q1, p1)`."""
    kernel = KernelFunction(params, w, method=method)
    return _kernel_wigner(kernel, q1, p1, grid=False)


def wigner_cl(params, w, q1, p1, *, method="auto"):
    """Semi-classical Wigner function at `(q1, p1)`.

    `Int dR |f(R)|^2 2 exp(-(q1 - R)^2/bs^2 - bs^2 p1^2/hbar^2)`, nonnegative by
    construction. Raises InvalidParams for `u = 0`.
    """
    kernel = KernelFunction(params, w, semiclassical=True, method=method)
    return _kernel_wigner(kernel, q1, p1, grid=False)


def wigner_field(params, w, q_grid=None, p_grid=None, *, semiclassical=False, n=None):
    """Sample the one-body (or semi-classical) Wigner function on a grid."""
    default_q, default_p = phase_grids(params, w, n or DEFAULT_PHASE_N)
    q_grid, p_grid = q_grid or default_q, p_grid or default_p
    kernel = KernelFunction(params, w, semiclassical=semiclassical)
    values = _kernel_wigner(kernel, q_grid.points, p_grid.points, grid=True)
    return PhaseSpaceField(
        q_grid, p_grid, np.asarray(values), Measure.WIGNER, params.hbar, kernel.label
    )


def _gaussian_pure_wigner(width, Q, P, hbar):
    return 2 * np.exp(-(Q**2) / width**2 - width**2 * P**2 / hbar**2)


def wigner_pure(state, Q, P, *, hbar=None):
    """Wigner transform of a pure state.

    `Int dy psi(Q + y/2) psi*(Q - y/2) exp(-i P y / hbar)`; `hbar` overrides the
    state's own. Gaussian states use the closed form
    `2 exp(-Q^2/w^2 - w^2 P^2/hbar^2)`, anything else is integrated over y until two
    refinements agree.

    Raises:
        QuadratureNotConverged: The y integral did not settle.
    """
    hbar = state.hbar if hbar is None else hbar
    Q, P = np.broadcast_arrays(np.asarray(Q, dtype=float), np.asarray(P, dtype=float))
    if state.width is not None:
        return _scalar_or_array(_gaussian_pure_wigner(state.width, Q, P, hbar))
    reach = 2 * state.extent
    flat = []
    for Qi, Pi in zip(Q.ravel(), P.ravel(), strict=True):

        def correlation(y, Qi=Qi, Pi=Pi):
            pair = state(Qi + y / 2) * np.conj(state(Qi - y / 2))
            return pair * np.exp(-1j * Pi * y / hbar)

        flat.append(np.real(integrate_1d(correlation, -reach, reach, _PURE_SPEC).value))
    return _scalar_or_array(np.reshape(flat, Q.shape))


def _pure_resolution(state):
    """Grid size that resolves the momentum structure of an extended state."""
    if state.width is not None:
        return DEFAULT_PHASE_N
    n = math.ceil(4 * state.extent / state.scale) * _SAMPLES_PER_SCALE
    return max(DEFAULT_PHASE_N, min(_MAX_PURE_N, n))


def pure_grids(state, n=None, *, half_hbar=False):
    """(Q, P) grids covering the Wigner function of a pure state."""
    n = n or _pure_resolution(state)
    hbar = state.hbar / 2 if half_hbar else state.hbar
    return (
        Grid1D.symmetric(state.extent, n),
        Grid1D.symmetric(8 * hbar / state.scale, n),
    )


def _sampled_pure_wigner(state, Q, P, hbar):
    """Wigner transform of a state on a grid, by the trapezoid rule over y."""
    ny = 2 * math.ceil(2 * state.extent * _SAMPLES_PER_SCALE / state.scale) + 1
    y = np.linspace(-2 * state.extent, 2 * state.extent, min(_MAX_PURE_N, ny))
    phase = np.exp(-1j * np.outer(P, y) / hbar) * (y[1] - y[0])
    out = np.empty((Q.size, P.size))
    for i, Qi in enumerate(Q):
        out[i] = np.real(phase @ (state(Qi + y / 2) * np.conj(state(Qi - y / 2))))
    return out


def wigner_pure_field(state, q_grid=None, p_grid=None, *, half_hbar=False, n=None):
    """Sample `wigner_pure` of a state on a grid.

    With `half_hbar` the transform uses `hbar/2` and the field carries the hbar/2
    measure.
    """
    hbar = state.hbar / 2 if half_hbar else state.hbar
    default_q, default_p = pure_grids(state, n, half_hbar=half_hbar)
    q_grid, p_grid = q_grid or default_q, p_grid or default_p
    if state.width is not None:
        Q, P = q_grid.points[:, None], p_grid.points[None, :]
        values = _gaussian_pure_wigner(state.width, Q, P, hbar)
    else:
        values = _sampled_pure_wigner(state, q_grid.points, p_grid.points, hbar)
    measure = Measure.HUSIMI_HALF if half_hbar else Measure.WIGNER
    return PhaseSpaceField(q_grid, p_grid, values, measure, state.hbar, state.label)


def cm_wigner_field(params, w, *, n=None):
    """Wigner field of the cm wave function `Phi_G`, the input of `coarse_grain`."""
    return wigner_pure_field(cm_wavefunction(params, w), n=n)


def two_body_coordinates(params, q1, p1, q2, p2):
    """cm and relative phase-space coordinates `(Q, P, q, p)` of the pair."""
    d = derive_params(params)
    q1, p1, q2, p2 = (np.asarray(x, dtype=float) for x in (q1, p1, q2, p2))
    return d.u1 * q1 + d.u2 * q2, p1 + p2, q1 - q2, d.u2 * p1 - d.u1 * p2


def wigner_two_body(params, w, q1, p1, q2, p2):
    """Two-body Wigner function, a product of the cm and intrinsic Wigner functions."""
    Q, P, q, p = two_body_coordinates(params, q1, p1, q2, p2)
    cm = wigner_pure(cm_wavefunction(params, w), Q, P)
    return cm * wigner_pure(intrinsic_state(params), q, p)


@dataclass(frozen=True)
class _Smear:
    """`norm Int dQ dP f(Q, P) exp(-(q - Q)^2/q_var - (p - p_scale P)^2/p_var)`."""

    q_var: float
    p_var: float
    p_scale: float
    norm: float

    def at(self, source, q, p):
        q, p = np.broadcast_arrays(
            np.asarray(q, dtype=float), np.asarray(p, dtype=float)
        )
        weighted = source.values * np.outer(source.q.weights, source.p.weights)
        kq = np.exp(-np.subtract.outer(q.ravel(), source.q.points) ** 2 / self.q_var)
        shifted = np.subtract.outer(p.ravel(), self.p_scale * source.p.points)
        kp = np.exp(-(shifted**2) / self.p_var)
        values = self.norm * np.sum((kq @ weighted) * kp, axis=1)
        return _scalar_or_array(values.reshape(q.shape))

    def on(self, source, q_grid, p_grid):
        kq = np.exp(
            -np.subtract.outer(q_grid.points, source.q.points) ** 2 / self.q_var
        )
        shifted = np.subtract.outer(p_grid.points, self.p_scale * source.p.points)
        kp = np.exp(-(shifted**2) / self.p_var)
        weighted = source.values * np.outer(source.q.weights, source.p.weights)
        return self.norm * (kq @ weighted @ kp.T)


def _coarse_smear(params):
    d = derive_params(params)
    bs = d.require_bs("coarse graining")
    return _Smear(
        q_var=(d.u2 * bs) ** 2,
        p_var=params.hbar**2 / bs**2,
        p_scale=d.u1,
        norm=1 / (d.u2 * math.pi * params.hbar),
    )


def coarse_grain(wigner_cm, params, q1, p1):
    """One-body Wigner function as a Gaussian smear of the cm Wigner function.

    `(1/u2) Int dQ dP/(pi hbar) W_cm(Q, P)
    exp(-(q1 - Q)^2/(u2 bs)^2 - bs^2 (p1 - u1 P)^2/hbar^2)`, where `1/u2` is the
    Jacobian of trading `q2` for `Q`. Equal to `wigner_one_body` when `wigner_cm` is
    the Wigner field of `Phi_G`.
    """
    return _coarse_smear(params).at(wigner_cm, q1, p1)


def coarse_grain_field(wigner_cm, params, q_grid, p_grid):
    """`coarse_grain` sampled on a grid."""
    values = _coarse_smear(params).on(wigner_cm, q_grid, p_grid)
    return PhaseSpaceField(
        q_grid, p_grid, values, Measure.WIGNER, params.hbar, "coarse-grained"
    )


def _husimi_smear(alpha, hbar):
    half = hbar / 2
    return _Smear(
        q_var=alpha, p_var=half**2 / alpha, p_scale=1.0, norm=1 / (math.pi * half)
    )


def _resolve_alpha(state, alpha):
    if alpha is None:
        alpha = getattr(state, "bG", 0.0) ** 2
    if not alpha > 0:
        raise InvalidParams(f"Husimi smearing alpha must be > 0, got {alpha}")
    return alpha


@lru_cache(maxsize=32)
def _half_hbar_wigner(state, n):
    return wigner_pure_field(state, half_hbar=True, n=n)


def husimi_half(state, alpha, q, p, *, n=None):
    """hbar/2-Husimi function of a pure state at (q, p).

    The Wigner function of the state with hbar/2 in place of hbar, smeared with
    `Int dQ dP/(pi hbar/2) exp(-(q - Q)^2/alpha - alpha (p - P)^2/(hbar/2)^2)`.
    `alpha=None` takes `bG^2` of a cm wave function.
    """
    alpha = _resolve_alpha(state, alpha)
    source = _half_hbar_wigner(state, n)
    return _husimi_smear(alpha, state.hbar).at(source, q, p)


def husimi_half_field(state, alpha=None, q_grid=None, p_grid=None, *, n=None):
    """`husimi_half` sampled on a grid, under the hbar/2 measure."""
    alpha = _resolve_alpha(state, alpha)
    source = _half_hbar_wigner(state, n)
    half = state.hbar / 2
    size = n or DEFAULT_PHASE_N
    if q_grid is None:
        q_grid = Grid1D.symmetric(source.q.hi + 6 * math.sqrt(alpha), size)
    if p_grid is None:
        p_grid = Grid1D.symmetric(source.p.hi + 6 * half / math.sqrt(alpha), size)
    values = _husimi_smear(alpha, state.hbar).on(source, q_grid, p_grid)
    return PhaseSpaceField(
        q_grid, p_grid, values, Measure.HUSIMI_HALF, state.hbar, "husimi-half"
    )


def clamp_nonnegative(field, error, tol=1e-8):
    """Values clamped at 0, or `error` raised if any dips below `-tol`."""
    low = float(np.min(field.values))
    if low < -tol:
        raise error(f"{field.label or 'field'} reaches {low:.3g} < -{tol:g}")
    return np.clip(field.values, 0.0, None)
