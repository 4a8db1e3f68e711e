"""Closed-form entropies and Wigner functions for constant and Gaussian weights.

Nothing here touches a grid: these are the reference values the numerical routes in
[`entropy`][physics.entropy] are checked against, and what `composite-entropy point`
prints next to its numerical results.
"""

import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParams, OutOfValidity
from .model import derive_params

# Below this V/bs the box results lose their boundary-free form.
MIN_BOX_VEFF = 10.0
CASES = ("constant", "gaussian", "gaussian-large-u")

_WIGNER_SHANNON_SHIFT = 1 - math.log(2)
_BOX_SHIFT = (1 - math.log(2)) / 2


@dataclass(frozen=True)
class ClosedFormReport:
    """Closed-form results for one weight; `None` where no closed form applies.

    `wigner` and `wigner_cl` take `(q, p)` (scalars or broadcastable arrays).
    """

    case: str
    v_eff: float
    S_R2: float
    S_WSh: float
    gamma: float | None = None
    v_c_eff: float | None = None
    S_vN: float | None = None
    S_vN_oracle: float | None = None
    S_R2_cl: float | None = None
    S_WSh_cl: float | None = None
    S_Wehrl_half: float | None = None
    S_R2Wehrl_half: float | None = None
    wigner: Callable | None = field(default=None, repr=False, compare=False)
    wigner_cl: Callable | None = field(default=None, repr=False, compare=False)


def gamma(u, v_eff):
    """`(1 + (u+1) v^2) / (1 + u v^2)`, at least 1 for `u, v >= 0`."""
    if u < 0 or v_eff < 0:
        raise InvalidParams(f"gamma needs u >= 0 and v_eff >= 0, got {u}, {v_eff}")
    v2 = v_eff**2
    return (1 + (u + 1) * v2) / (1 + u * v2)


def gaussian_spectrum_entropy(purity):
    """Von Neumann entropy of a Gaussian kernel with the given `Tr rho^2`.

    The spectrum is geometric, `(1 - z) z^n` with `z = (1 - P)/(1 + P)`.
    """
    if not 0 < purity <= 1:
        raise InvalidParams(f"purity must be in (0, 1], got {purity}")
    z = (1 - purity) / (1 + purity)
    if z == 0:
        return 0.0
    return -math.log(1 - z) - z * math.log(z) / (1 - z)


def large_v_offset(u):
    """Limit of `S_R2 - ln v_eff` for a Gaussian weight as `v_eff` grows."""
    if not u > 0:
        raise InvalidParams(
            f"large-v offset needs u > 0, got {u}", invariant="u-positive"
        )
    return -0.5 * math.log1p(1 / u)


def _wehrl(params, S_WSh, S_R2):
    # The hbar/2-Husimi of the cm state reproduces the one-body entropies only at u = 1.
    if params.u != 1:
        return {}
    return {"S_Wehrl_half": S_WSh + math.log(2), "S_R2Wehrl_half": S_R2 + math.log(2)}


def closed_form_constant(params, V):
    """Entropies of a box weight of length `V`, boundary ignored.

    Raises:
        OutOfValidity: `V/bs < 10`, where the boundary-free form does not hold.
        InvalidParams: `u = 0` (no smearing width).
    """
    bs = derive_params(params).require_bs("the constant-weight closed form")
    v_eff = V / bs
    if v_eff < MIN_BOX_VEFF:
        raise OutOfValidity(
            f"box closed form needs V_eff >= {MIN_BOX_VEFF:g}, got {v_eff:.4g}"
        )
    S_R2 = math.log(v_eff) - 0.5 * math.log(2 * math.pi)
    S_WSh = S_R2 + _BOX_SHIFT
    hbar = params.hbar
    height = 2 * bs * math.sqrt(math.pi) / V

    def wigner(q, p):
        q, p = np.broadcast_arrays(np.asarray(q, float), np.asarray(p, float))
        values = height * np.exp(-(bs**2) * p**2 / hbar**2)
        return values[()] if values.ndim == 0 else values

    return ClosedFormReport(
        case="constant",
        v_eff=v_eff,
        S_R2=S_R2,
        S_WSh=S_WSh,
        S_vN=S_WSh,
        S_R2_cl=S_R2,
        S_WSh_cl=S_WSh,
        wigner=wigner,
        wigner_cl=wigner,
        **_wehrl(params, S_WSh, S_R2),
    )


def _gaussian_wigner(height, q_var, p_var, hbar):
    def wigner(q, p):
        q, p = np.asarray(q, float), np.asarray(p, float)
        values = height * np.exp(-(q**2) / q_var - p_var * p**2 / hbar**2)
        return values[()] if values.ndim == 0 else values

    return wigner


def closed_form_gaussian(params, B):
    """Entropies and Wigner functions of the Gaussian weight of width `B`."""
    if not math.isfinite(B) or B < 0:
        raise InvalidParams(f"Gaussian width B must be finite and >= 0: {B}")
    d = derive_params(params)
    b, hbar = params.b, params.hbar
    v_eff = B / b
    g = gamma(params.u, v_eff)
    S_R2 = 0.5 * math.log1p(v_eff**2) - 0.5 * math.log(g)
    S_WSh = S_R2 + _WIGNER_SHANNON_SHIFT
    extra = _wehrl(params, S_WSh, S_R2)
    if d.bs is not None:
        v_c = B / d.bs
        S_R2_cl = 0.5 * math.log1p(v_c**2)
        extra |= {
            "v_c_eff": v_c,
            "S_R2_cl": S_R2_cl,
            "S_WSh_cl": S_R2_cl + _WIGNER_SHANNON_SHIFT,
            "wigner_cl": _gaussian_wigner(
                2 * d.bs / math.hypot(d.bs, B), d.bs**2 + B**2, d.bs**2, hbar
            ),
        }
    return ClosedFormReport(
        case="gaussian",
        v_eff=v_eff,
        S_R2=S_R2,
        S_WSh=S_WSh,
        gamma=g,
        S_vN_oracle=gaussian_spectrum_entropy(min(1.0, math.exp(-S_R2))),
        wigner=_gaussian_wigner(
            2 * math.sqrt(g) * b / math.hypot(b, B), b**2 + B**2, g * b**2, hbar
        ),
        **extra,
    )


def closed_form_gaussian_large_u(v_eff):
    """Renyi-2 entropy of a Gaussian weight in the `u -> infinity` limit."""
    if not math.isfinite(v_eff) or v_eff < 0:
        raise InvalidParams(f"v_eff must be finite and >= 0, got {v_eff}")
    return 0.5 * math.log1p(v_eff**2)
