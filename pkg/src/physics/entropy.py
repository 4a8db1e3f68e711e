"""Entropy functionals of the one-body density matrix and its phase-space functions.

All entropies are in nats:

- Renyi-2 `-ln Tr[rho^2]`, from the matrix or from a field's purity;
- von Neumann `-Tr[rho ln rho]`, from the spectrum;
- Wigner-Shannon `-Int W ln W dq dp / (2 pi hbar)`, defined only while W >= 0;
- the hbar/2 Wehrl and Renyi-2-Wehrl entropies of the hbar/2-Husimi function.

[`entropy_report`][physics.entropy.entropy_report] bundles all of them for one
parameter point together with the semi-classical variants, the effective temperature
and discretization diagnostics.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .analytic import closed_form_gaussian
from .errors import (
    GridTooCoarse,
    InvalidParams,
    NegativeHusimi,
    NegativeWigner,
    NonPositivePurity,
    SpectrumError,
)
from .kernels import GridSpec, KernelFunction, cm_wavefunction, rho_matrix
from .model import ConstantBox, Gaussian, derive_params
from .phase_space import (
    DEFAULT_PHASE_N,
    Measure,
    clamp_nonnegative,
    husimi_half_field,
    wigner_field,
)

logger = logging.getLogger(__name__)

SPECTRUM_TOL = 1e-6
VN_TOL = 1e-4
MAX_VN_GRID_N = 8192


def _renyi2_from_purity(purity, what):
    if not purity > 0:
        raise NonPositivePurity(f"{what} purity is {purity:.3g}")
    return -math.log(purity)


def renyi2(dm):
    """`-ln Tr[rho^2]` of a density matrix.

    Raises:
        NonPositivePurity: Tr[rho^2] <= 0, which only a broken discretization gives.
    """
    return _renyi2_from_purity(dm.purity(), "matrix")


def renyi2_phase_space(field):
    """`-ln` of a field's purity under its own measure."""
    return _renyi2_from_purity(field.purity(), "phase-space")


def spectrum_entropy(eigenvalues):
    """`-Sum lambda ln lambda` with `0 ln 0 = 0`.

    Eigenvalues in `[-1e-6, 0)` are rounding noise and count as zero.

    Raises:
        SpectrumError: An eigenvalue below -1e-6.
    """
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    low = float(np.min(eigenvalues))
    if low < -SPECTRUM_TOL:
        raise SpectrumError(f"eigenvalue {low:.3g} below -{SPECTRUM_TOL:g}")
    positive = eigenvalues[eigenvalues > 0]
    return float(-np.sum(positive * np.log(positive)))


def von_neumann(dm):
    """`-Tr[rho ln rho]` from the spectrum of the discretized operator."""
    return spectrum_entropy(dm.eigenvalues)


@dataclass(frozen=True)
class ConvergedEntropy:
    """A von Neumann entropy accepted after comparing two resolutions."""

    value: float
    dm: object = field(repr=False)
    change: float


def von_neumann_converged(kernel, grid_spec=None, *, tol=VN_TOL):
    """Von Neumann entropy on N/2 and N points, doubling N until they agree.

    A grid already at the minimum size is compared with its doubling instead.

    Raises:
        GridTooCoarse: Still above `tol` with N at its cap.
    """
    spec = grid_spec or GridSpec()
    lower = spec.halved()
    if lower.n == spec.n:
        # At the minimum grid compare N with 2N instead.
        lower, spec = spec, spec.doubled()
    coarse = von_neumann(rho_matrix(kernel, lower))
    while True:
        dm = rho_matrix(kernel, spec)
        value = von_neumann(dm)
        change = abs(value - coarse)
        logger.debug(
            "S_vN of %s on %d points: %.10g (change %.3g)",
            getattr(kernel, "label", "kernel"),
            dm.grid.n,
            value,
            change,
        )
        if change < tol:
            return ConvergedEntropy(value, dm, change)
        if spec.n * 2 > MAX_VN_GRID_N:
            raise GridTooCoarse(
                f"von Neumann entropy still moves by {change:.3g} at {spec.n} points",
                invariant="von-neumann-converged",
            )
        spec, coarse = spec.doubled(), value


def _shannon(field, error):
    values = clamp_nonnegative(field, error)
    with np.errstate(divide="ignore", invalid="ignore"):
        integrand = np.where(values > 0, values * np.log(values), 0.0)
    return -field.integrate(integrand)


def wigner_shannon(field):
    """`-Int f ln f` under the field's measure, for a nonnegative Wigner function.

    Raises:
        NegativeWigner: A value below -1e-8; the entropy is undefined then.
    """
    return _shannon(field, NegativeWigner)


def _require_husimi(field):
    if field.measure is not Measure.HUSIMI_HALF:
        raise InvalidParams(
            f"Wehrl entropies need an hbar/2-Husimi field, got {field.measure.value}"
        )


def wehrl_half(field):
    """Shannon entropy of an hbar/2-Husimi field under `dq dp / (2 pi (hbar/2))`."""
    _require_husimi(field)
    return _shannon(field, NegativeHusimi)


def renyi2_wehrl_half(field):
    """`-ln` of the second moment of an hbar/2-Husimi field."""
    _require_husimi(field)
    clamp_nonnegative(field, NegativeHusimi)
    return renyi2_phase_space(field)


def _cl_kernel(params, w):
    derive_params(params).require_bs("semi-classical entropies")
    return KernelFunction(params, w, semiclassical=True)


def renyi2_cl(params, w, grid_spec=None, *, with_closed_form=False):
    """Renyi-2 entropy of rho^cl.

    With `with_closed_form`, Gaussian weights return `(numeric, 1/2 ln(1 + v_c^2))`.
    """
    value = renyi2(rho_matrix(_cl_kernel(params, w), grid_spec))
    if with_closed_form:
        if not isinstance(w, Gaussian):
            raise InvalidParams("closed forms exist for Gaussian weights only")
        return value, closed_form_gaussian(params, w.B).S_R2_cl
    return value


def wigner_shannon_cl(params, w, *, n=None):
    """Wigner-Shannon entropy of the semi-classical Wigner function."""
    _cl_kernel(params, w)
    return wigner_shannon(wigner_field(params, w, semiclassical=True, n=n))


def von_neumann_cl(params, w, grid_spec=None):
    """Von Neumann entropy of rho^cl, converged like the exact one."""
    return von_neumann_converged(_cl_kernel(params, w), grid_spec).value


def effective_temperature(params):
    """`kT = hbar^2 / (2 m bs^2)` of the thermal state the free composite mimics."""
    bs = derive_params(params).require_bs("the effective temperature")
    return params.hbar**2 / (2 * params.m * bs**2)


def momentum_offdiagonal(dm):
    """Largest off-diagonal element of the density matrix in a discrete momentum basis.

    Zero for a translation-invariant kernel on a periodic grid, the signature of a
    state diagonal in momentum like a thermal one.
    """
    op = dm.operator
    left = np.fft.fft(op, axis=0, norm="ortho")
    rotated = np.fft.fft(left.conj().T, axis=0, norm="ortho").conj().T
    off = rotated - np.diag(np.diag(rotated))
    return float(np.max(np.abs(off)))


@dataclass(frozen=True)
class Diagnostics:
    """How the numbers of a report were obtained."""

    grid_n: int
    grid_L: float
    phase_n: int
    raw_trace: float
    min_eigenvalue: float
    vn_change: float
    momentum_offdiagonal: float | None = None


@dataclass(frozen=True)
class EntropyReport:
    """All entropies of one parameter point, in nats; `None` where not computed."""

    S_R2: float
    S_vN: float
    S_WSh: float
    purity: float
    phase_purity: float
    diagnostics: Diagnostics
    S_R2_cl: float | None = None
    S_WSh_cl: float | None = None
    S_vN_cl: float | None = None
    S_Wehrl_half: float | None = None
    S_R2Wehrl_half: float | None = None
    kT: float | None = None

    ENTROPIES = (
        "S_R2",
        "S_vN",
        "S_WSh",
        "S_R2_cl",
        "S_WSh_cl",
        "S_vN_cl",
        "S_Wehrl_half",
        "S_R2Wehrl_half",
    )

    def exp(self, name):
        """`e^S` of the named entropy, or None when it was not computed."""
        value = getattr(self, name)
        return None if value is None else math.exp(value)

    def entropies(self):
        """Computed entropies by name."""
        return {
            name: getattr(self, name)
            for name in self.ENTROPIES
            if getattr(self, name) is not None
        }


def entropy_report(
    params,
    w,
    *,
    grid=None,
    phase_n=None,
    include_cl=True,
    include_wehrl=False,
    include_vn_cl=False,
):
    """Compute every entropy of the reduced density matrix of `w` at `params`.

    Args:
        params: Physical parameters.
        w: Weight function.
        grid: Position grid for the density matrices.
        phase_n: Points per phase-space axis.
        include_cl: Add the semi-classical entropies (skipped for `u = 0`).
        include_wehrl: Add the hbar/2 Wehrl entropies; only defined for `u = 1`.
        include_vn_cl: Add the converged von Neumann entropy of rho^cl as well.

    Raises:
        SpectrumError: Renyi-2 exceeds von Neumann, which no spectrum allows.
    """
    grid = grid or GridSpec()
    phase_n = phase_n or DEFAULT_PHASE_N
    kernel = KernelFunction(params, w)
    converged = von_neumann_converged(kernel, grid)
    dm = converged.dm
    S_R2 = renyi2(dm)
    if S_R2 > converged.value + SPECTRUM_TOL:
        raise SpectrumError(
            f"S_R2 = {S_R2:.8g} exceeds S_vN = {converged.value:.8g}",
            invariant="renyi2-below-von-neumann",
        )
    wigner = wigner_field(params, w, n=phase_n)
    extra = {}
    if params.u > 0:
        extra["kT"] = effective_temperature(params)
        if include_cl:
            extra["S_R2_cl"] = renyi2(rho_matrix(_cl_kernel(params, w), grid))
            extra["S_WSh_cl"] = wigner_shannon_cl(params, w, n=phase_n)
            if include_vn_cl:
                extra["S_vN_cl"] = von_neumann_cl(params, w, grid)
    elif include_cl:
        logger.info("u = 0: semi-classical entropies are undefined, skipped")
    if include_wehrl:
        if params.u == 1:
            husimi = husimi_half_field(cm_wavefunction(params, w), n=phase_n)
            extra["S_Wehrl_half"] = wehrl_half(husimi)
            extra["S_R2Wehrl_half"] = renyi2_wehrl_half(husimi)
        else:
            logger.warning(
                "hbar/2 Wehrl entropies relate to the one-body ones only for u = 1; "
                "skipped at u = %g",
                params.u,
            )
    offdiag = momentum_offdiagonal(dm) if isinstance(w, ConstantBox) else None
    diagnostics = Diagnostics(
        grid_n=dm.grid.n,
        grid_L=dm.grid.hi,
        phase_n=phase_n,
        raw_trace=dm.raw_trace,
        min_eigenvalue=dm.min_eigenvalue,
        vn_change=converged.change,
        momentum_offdiagonal=offdiag,
    )
    return EntropyReport(
        S_R2=S_R2,
        S_vN=converged.value,
        S_WSh=wigner_shannon(wigner),
        purity=dm.purity(),
        phase_purity=wigner.purity(),
        diagnostics=diagnostics,
        **extra,
    )
