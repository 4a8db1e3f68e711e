"""The self-check behind `composite-entropy check`.

Each check compares a numerical route against a closed form or against another
route, and returns the list of problems it found (empty when it passes). Checks
are registered in order with [`check`][core.checks.check]; a check that raises is
reported as failed with the error, never fatal to the run.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..physics.analytic import closed_form_constant, closed_form_gaussian
from ..physics.entropy import (
    effective_temperature,
    renyi2,
    renyi2_wehrl_half,
    von_neumann_converged,
    wehrl_half,
    wigner_shannon,
)
from ..physics.errors import CompositeEntropyError
from ..physics.kernels import KernelFunction, cm_wavefunction, rho_matrix
from ..physics.model import CompositeParams, Gaussian, weight_from_veff
from ..physics.phase_space import (
    cm_wigner_field,
    coarse_grain,
    husimi_half,
    husimi_half_field,
    phase_grids,
    wigner_field,
    wigner_one_body,
)
from .config import ConfigError
from .sweep import fig1_config, iter_rows

logger = logging.getLogger(__name__)

GAUSSIAN_U = (1.0, 8.0)
GAUSSIAN_VEFF = (0.0, 0.5, 1.0, 2.0, 4.0, 8.0)
SEMICLASSICAL_VEFF = (2.0, 3.0, 4.0, 6.0, 8.0)
BOX_VEFF = (20.0, 100.0)
FIG1_ROWS = 66
POINTWISE_N = 41
WIGNER_SHANNON_SHIFT = 1 - math.log(2)


@dataclass(frozen=True)
class Check:
    """A named check and the function that runs it."""

    name: str
    description: str
    run: object


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one check."""

    name: str
    problems: tuple

    @property
    def passed(self):
        """True when the check found nothing wrong."""
        return not self.problems


CHECKS = []


def check(name, description):
    """Register the decorated function as a check."""

    def register(func):
        CHECKS.append(Check(name, description, func))
        return func

    return register


def _off(label, value, expected, tol):
    """A problem line when `value` misses `expected` by more than `tol`, else None."""
    if abs(value - expected) <= tol:
        return None
    return f"{label}: {value:.8g}, expected {expected:.8g} +- {tol:g}"


@dataclass
class Case:
    """One `(u, weight)` point with its density matrix and Wigner field."""

    params: CompositeParams
    weight: object
    context: "CheckContext" = field(repr=False)

    @cached_property
    def kernel(self):
        """The exact one-body kernel."""
        return KernelFunction(self.params, self.weight)

    @cached_property
    def dm(self):
        """Density matrix on the configured grid."""
        return rho_matrix(self.kernel, self.context.config.grid_spec())

    @cached_property
    def S_R2(self):
        """Matrix-route Renyi-2 entropy."""
        return renyi2(self.dm)

    @cached_property
    def S_vN(self):
        """Converged von Neumann entropy."""
        return von_neumann_converged(self.kernel, self.context.config.grid_spec()).value

    @cached_property
    def wigner(self):
        """Wigner field on the default phase-space grid."""
        return wigner_field(self.params, self.weight, n=self.context.config.phase_n)

    @cached_property
    def S_WSh(self):
        """Wigner-Shannon entropy."""
        return wigner_shannon(self.wigner)

    @cached_property
    def S_R2_cl(self):
        """Renyi-2 entropy of rho^cl."""
        kernel = KernelFunction(self.params, self.weight, semiclassical=True)
        return renyi2(rho_matrix(kernel, self.context.config.grid_spec()))


@dataclass
class CheckContext:
    """Shares computed cases between the checks of one run."""

    config: object
    _cases: dict = field(default_factory=dict, repr=False)

    def case(self, u, kind, v_eff):
        """The case of weight `kind` at `v_eff`, computed on first use."""
        key = (u, kind, v_eff)
        if key not in self._cases:
            params = CompositeParams(u=u)
            w = weight_from_veff(params, kind, v_eff)
            self._cases[key] = Case(params, w, self)
        return self._cases[key]

    def gaussian_sweep(self):
        """Cases of the Gaussian sweep shared by several checks."""
        return [
            self.case(u, Gaussian.kind, v) for u in GAUSSIAN_U for v in GAUSSIAN_VEFF
        ]

    @cached_property
    def fig1_rows(self):
        """The canonical figure sweep, computed once."""
        return list(iter_rows(fig1_config(self.config)))


@check("renyi2-closed-form", "Gaussian S_R2 against 1/2 ln(1 + v^2) - 1/2 ln gamma")
def _renyi2_closed_form(ctx):
    problems = []
    for c in ctx.gaussian_sweep():
        expected = closed_form_gaussian(c.params, c.weight.B).S_R2
        label = f"S_R2(u={c.params.u:g}, B={c.weight.B:g})"
        problems.append(_off(label, c.S_R2, expected, 1e-4))
    return problems


@check("wigner-shannon-shift", "S_WSh - S_R2 = 1 - ln 2 for Gaussian weights")
def _wigner_shannon_shift(ctx):
    problems = []
    for c in ctx.gaussian_sweep():
        label = f"S_WSh - S_R2 (u={c.params.u:g}, B={c.weight.B:g})"
        problems.append(_off(label, c.S_WSh - c.S_R2, WIGNER_SHANNON_SHIFT, 1e-4))
    return problems


@check("constant-weight", "box S_R2, S_vN and S_WSh against their closed forms")
def _constant_weight(ctx):
    problems = []
    for v in BOX_VEFF:
        c = ctx.case(1.0, "constant", v)
        closed = closed_form_constant(c.params, c.weight.V)
        problems += [
            _off(f"S_R2(V_eff={v:g})", c.S_R2, closed.S_R2, 1e-3),
            _off(f"S_vN(V_eff={v:g})", c.S_vN, closed.S_vN, 1e-3),
            _off(f"S_WSh(V_eff={v:g})", c.S_WSh, closed.S_WSh, 1e-3),
        ]
    return problems


def _semiclassical_ratios(ctx, u):
    ratios = {}
    for v in SEMICLASSICAL_VEFF:
        c = ctx.case(u, Gaussian.kind, v)
        ratios[v] = abs(c.S_R2_cl - c.S_R2) / c.S_R2
    return ratios


@check("semiclassical-accuracy", "S_R2_cl within 10% of S_R2 at u = 1, closer at u = 8")
def _semiclassical_accuracy(ctx):
    light = _semiclassical_ratios(ctx, 1.0)
    heavy = _semiclassical_ratios(ctx, 8.0)
    problems = [
        f"u=1, v_eff={v:g}: relative deviation {ratio:.4g} >= 0.10"
        for v, ratio in light.items()
        if ratio >= 0.10
    ]
    if not max(heavy.values()) < max(light.values()):
        problems.append(
            f"u=8 worst deviation {max(heavy.values()):.4g} is not below "
            f"u=1 worst {max(light.values()):.4g}"
        )
    return problems


@check("reference-values", "S_R2, S_vN, S_WSh and kT at u = 1, v_eff = 2")
def _reference_values(ctx):
    c = ctx.case(1.0, Gaussian.kind, 2.0)
    return [
        _off("S_R2", c.S_R2, 0.51083, 1e-4),
        _off("S_vN", c.S_vN, 0.74978, 1e-3),
        _off("S_WSh", c.S_WSh, 0.81768, 1e-4),
        _off("kT", effective_temperature(c.params), 0.25, 1e-12),
    ]


@check("pure-states", "v_eff = 0 or u = 0 gives a pure state")
def _pure_states(ctx):
    problems = []
    for u, v in ((1.0, 0.0), (8.0, 0.0), (0.0, 2.0)):
        c = ctx.case(u, Gaussian.kind, v)
        problems += [
            _off(f"S_R2(u={u:g}, v_eff={v:g})", c.S_R2, 0.0, 1e-6),
            _off(f"S_vN(u={u:g}, v_eff={v:g})", c.S_vN, 0.0, 1e-6),
        ]
        if v == 0:
            problems.append(
                _off(f"S_WSh(u={u:g}, v_eff=0)", c.S_WSh, WIGNER_SHANNON_SHIFT, 1e-4)
            )
    return problems


@check("coarse-graining", "smeared cm Wigner function equals the one-body one")
def _coarse_graining(ctx):
    problems = []
    for u in (1.0, 4.0):
        params, w = CompositeParams(u=u), Gaussian(2.0)
        q, p = phase_grids(params, w, POINTWISE_N)
        Q, P = np.meshgrid(q.points, p.points, indexing="ij")
        smeared = coarse_grain(cm_wigner_field(params, w), params, Q, P)
        gap = float(np.max(np.abs(smeared - wigner_one_body(params, w, Q, P))))
        problems.append(_off(f"max gap (u={u:g}, B=2)", gap, 0.0, 1e-6))
    return problems


@check("husimi-half", "2 x hbar/2-Husimi = Wigner and the Wehrl relations at u = 1")
def _husimi_half(ctx):
    c = ctx.case(1.0, Gaussian.kind, 2.0)
    state = cm_wavefunction(c.params, c.weight)
    q, p = phase_grids(c.params, c.weight, POINTWISE_N)
    Q, P = np.meshgrid(q.points, p.points, indexing="ij")
    doubled = 2 * husimi_half(state, None, Q, P)
    gap = float(np.max(np.abs(doubled - wigner_one_body(c.params, c.weight, Q, P))))
    husimi = husimi_half_field(state, n=ctx.config.phase_n)
    return [
        _off("max |2 husimi - wigner|", gap, 0.0, 1e-6),
        _off("S_Wehrl - S_WSh", wehrl_half(husimi) - c.S_WSh, math.log(2), 1e-4),
        _off(
            "S_R2Wehrl - S_R2", renyi2_wehrl_half(husimi) - c.S_R2, math.log(2), 1e-4
        ),
    ]


def _nondecreasing(values):
    return all(b >= a - 1e-9 for a, b in zip(values, values[1:], strict=False))


@check("figure-curves", "shape of the canonical figure sweep")
def _figure_curves(ctx):
    problems = []
    if len(ctx.fig1_rows) != FIG1_ROWS:
        problems.append(f"{len(ctx.fig1_rows)} figure rows, expected {FIG1_ROWS}")
    by_u = {}
    for row in ctx.fig1_rows:
        by_u.setdefault(row.u, []).append(row)
    bound = {}
    for u, rows in by_u.items():
        for name in ("S_R2", "S_R2_cl", "S_vN", "S_WSh"):
            if not _nondecreasing([getattr(r.report, name) for r in rows]):
                problems.append(f"u={u:g}: e^{name} is not nondecreasing in v_eff")
        start = rows[0].report.exp("S_vN")
        problems.append(_off(f"u={u:g}: e^S_vN at v_eff=0", start, 1.0, 1e-6))
        gaps = [
            r.report.S_WSh - r.report.S_vN for r in rows if r.v_eff in (1, 2, 4, 8)
        ]
        if not all(b < a for a, b in zip(gaps, gaps[1:], strict=False)):
            problems.append(f"u={u:g}: S_WSh - S_vN does not close with v_eff")
        for r in rows:
            ratio = r.report.exp("S_WSh") / r.report.exp("S_R2")
            label = f"u={u:g}, v_eff={r.v_eff:g}: e^S_WSh / e^S_R2"
            problems.append(_off(label, ratio, math.e / 2, 1e-3))
        bound[u] = {
            r.v_eff: abs(r.report.S_R2 - r.large_u) for r in rows if r.v_eff >= 2
        }
    limit = 0.5 * math.log1p(1 / 8) + 1e-4
    for v, deviation in bound[8.0].items():
        if deviation > limit:
            problems.append(f"u=8, v_eff={v:g}: {deviation:.4g} off the large-u curve")
        if not bound[1.0][v] > deviation:
            problems.append(f"v_eff={v:g}: u=1 is not further from the large-u curve")
    return problems


@check("spectrum", "eigenvalues >= -1e-8, unit trace and S_R2 <= S_vN")
def _spectrum(ctx):
    problems = []
    cases = ctx.gaussian_sweep() + [ctx.case(1.0, "constant", v) for v in BOX_VEFF]
    for c in cases:
        label = f"u={c.params.u:g}, {c.weight!r}"
        eigenvalues = c.dm.eigenvalues
        if eigenvalues.min() < -1e-8:
            problems.append(f"{label}: eigenvalue {eigenvalues.min():.3g}")
        problems.append(_off(f"{label}: eigenvalue sum", eigenvalues.sum(), 1.0, 1e-6))
        if c.S_R2 > c.S_vN + 1e-6:
            problems.append(f"{label}: S_R2 {c.S_R2:.8g} > S_vN {c.S_vN:.8g}")
    return problems


@check("purity-bridge", "Tr[rho^2] equals Int W^2 dq dp / (2 pi hbar)")
def _purity_bridge(ctx):
    problems = []
    for c in ctx.gaussian_sweep():
        matrix, phase = c.dm.purity(), c.wigner.purity()
        label = f"relative purity gap (u={c.params.u:g}, B={c.weight.B:g})"
        problems.append(_off(label, abs(phase - matrix) / matrix, 0.0, 1e-4))
    return problems


def run_checks(config, names=None):
    """Run the registered checks (or only `names`) and log one line per check.

    Raises:
        ConfigError: An unknown check name.
    """
    registry = {c.name: c for c in CHECKS}
    unknown = sorted(set(names or ()) - set(registry))
    if unknown:
        raise ConfigError(
            f"unknown check(s): {', '.join(unknown)}", invariant="check-name"
        )
    selected = [registry[name] for name in names] if names else CHECKS
    ctx = CheckContext(config)
    results = []
    for entry in selected:
        try:
            problems = tuple(p for p in entry.run(ctx) if p is not None)
        except CompositeEntropyError as exc:
            problems = (f"{type(exc).__name__} [{exc.invariant}]: {exc}",)
        results.append(CheckResult(entry.name, problems))
        if problems:
            logger.warning("  ✗ %s: %s", entry.name, entry.description)
            for problem in problems:
                logger.warning("      %s", problem)
        else:
            logger.info("  ✓ %s", entry.name)
    return results


def cmd_check(config, names=None):
    """Run the self-check; exit code 0 when every check passes, else 1."""
    results = run_checks(config, names)
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.error(
            "%d of %d checks failed: %s", len(failed), len(results), ", ".join(failed)
        )
        return 1
    logger.info("all %d checks passed", len(results))
    return 0
