"""Exponential orientation modification of the tracking reference.

The reference speed and heading are bent toward the target as a function
of the range error, so that a vehicle exactly tracking the modified pair
closes the range exponentially, while the modification fades out as the
range error vanishes.  The admissible gain region depends on a universal
constant obtained from a transcendental root, solved once and cached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional, Tuple

from .transforms import ErrorPolar, wrap_angle

_KAPPA_TOL = 1e-10


@lru_cache(maxsize=1)
def solve_kappa() -> Tuple[float, float]:
    """Solve for the worst-case range-speed coupling constant.

    The minimum over zeta >= 0 of zeta*cos(pi*exp(-zeta)) is attained where
    cos(z) = z*ln(z/pi)*sin(z) with z = pi*exp(-zeta); that equation has a
    unique root z* in (pi/2, pi).  Returns (z*, kappa) where -kappa is the
    minimum value.  Bisection: the bracket is sign-definite at both ends,
    so convergence to 1e-10 is guaranteed.
    """

    def g(z: float) -> float:
        return math.cos(z) - z * math.log(z / math.pi) * math.sin(z)

    lo, hi = math.pi / 2.0, math.pi
    g_lo = g(lo)
    while hi - lo > _KAPPA_TOL:
        mid = 0.5 * (lo + hi)
        g_mid = g(mid)
        if g_lo * g_mid <= 0.0:
            hi = mid
        else:
            lo, g_lo = mid, g_mid
    z_star = 0.5 * (lo + hi)
    kappa = math.log(z_star / math.pi) * math.cos(z_star)
    return z_star, kappa


def kappa_constant() -> float:
    return solve_kappa()[1]


@dataclass
class EmoParams:
    """Gains of the orientation modification.

    c_u scales the range-proportional speed correction, c_psi sets the
    decay rate of the heading bend, and u_m is the guaranteed floor of the
    reference speed.  Admissibility requires c_psi*u_m - 2*c_u*kappa > 0.
    """

    c_u: float = 0.2     # speed-correction gain [1/s]
    c_psi: float = 0.2   # orientation-decay gain [1/m]
    u_m: float = 1.4902  # reference-speed floor [m/s]
    kappa: Optional[float] = None

    def __post_init__(self):
        if self.kappa is None:
            self.kappa = kappa_constant()

    def validate(self) -> list[str]:
        problems = []
        for name in ("c_u", "c_psi", "u_m"):
            if getattr(self, name) <= 0.0:
                problems.append(f"emo.{name} must be > 0")
        if not problems and check_gain_condition(self) <= 0.0:
            problems.append(
                "emo gain condition violated: "
                f"c_psi*u_m - 2*c_u*kappa = {check_gain_condition(self):.6g} <= 0"
            )
        return problems

    @property
    def contraction_rate(self) -> float:
        """Guaranteed range contraction rate min(c_u, gain margin)."""
        return min(self.c_u, check_gain_condition(self))


def check_gain_condition(p: EmoParams) -> float:
    """Admissibility margin c_psi*u_m - 2*c_u*kappa; positive means admissible."""
    return p.c_psi * p.u_m - 2.0 * p.c_u * p.kappa


class EmoOutput(NamedTuple):
    u_ld_m: float    # modified reference speed [m/s]
    psi_ld_m: float  # modified reference heading [rad], anchored to psi_ld
    varphi: float    # scaled heading offset (psi_ld - psi_b)*exp(-c_psi*p_e), in [-pi, pi]
    c: float         # guaranteed contraction rate [1/s]


def emo_modify(u_ld: float, psi_ld: float, err: ErrorPolar, p: EmoParams) -> EmoOutput:
    """Modified reference (speed, heading) for the current range error.

    The heading offset to the azimuth is wrapped to [-pi, pi] before the
    exponential scaling; the returned heading is written relative to the
    incoming psi_ld so that it reduces to psi_ld exactly at zero range and
    stays continuous when psi_ld is an accumulated (unwrapped) angle.
    """
    delta = wrap_angle(psi_ld - err.psi_b)
    decay = math.exp(-p.c_psi * err.p_e)
    varphi = delta * decay
    return EmoOutput(
        u_ld_m=u_ld + p.c_u * err.p_e * math.cos(varphi),
        psi_ld_m=psi_ld + delta * (decay - 1.0),
        varphi=varphi,
        c=min(p.c_u, check_gain_condition(p)),
    )


def emo_heading_rate(
    emo: EmoOutput,
    err: ErrorPolar,
    psi_ld_dot: float,
    p_e_dot: float,
    psi_b_dot: float,
    p: EmoParams,
) -> float:
    """Exact rate of the modified heading from kinematic rates.

    Uses the guarded azimuth rate supplied by the caller; at zero range the
    caller takes the degenerate path and this function is not consulted.
    """
    decay = math.exp(-p.c_psi * err.p_e)
    delta_dot = psi_ld_dot - psi_b_dot
    return psi_ld_dot + delta_dot * (decay - 1.0) - p.c_psi * p_e_dot * emo.varphi


def contraction_margin(u_ld: float, psi_ld: float, err: ErrorPolar, p: EmoParams) -> float:
    """Partial derivative of the range rate with respect to the range.

    Evaluated analytically at the given point for a vehicle exactly
    tracking the modified reference.  Admissible gains keep this at or
    below -min(c_u, c_psi*u_m - 2*c_u*kappa) everywhere, which is the
    checkable content of the exponential-contraction claim.
    """
    delta = wrap_angle(psi_ld - err.psi_b)
    decay = math.exp(-p.c_psi * err.p_e)
    varphi = delta * decay
    cv = math.cos(varphi)
    sv = math.sin(varphi)
    return (
        -p.c_u * cv * cv
        - p.c_psi * u_ld * varphi * sv
        - 2.0 * p.c_u * p.c_psi * err.p_e * varphi * sv * cv
    )
