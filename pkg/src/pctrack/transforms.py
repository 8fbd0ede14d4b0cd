"""Polar coordinate transformations and angle utilities.

Two changes of variables take the planar tracking problem into polar form:
body velocities (u, v) become total speed and sideslip angle, and the
position error becomes range and azimuth.  Every place a polar angle can
degenerate (zero forward speed, zero range) is guarded in this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple

TWO_PI = 2.0 * math.pi

# Below this range [m] the azimuth rate is forced to zero and the control
# law switches to its degenerate zero-range path.
P_GUARD = 1e-6


class SingularSideslip(Exception):
    """Sideslip angle evaluated at non-positive surge speed."""


def wrap_angle(theta: float) -> float:
    """Wrap an angle to the half-open interval (-pi, pi]."""
    w = (theta + math.pi) % TWO_PI
    if w <= 0.0:
        w += TWO_PI
    return w - math.pi


class BodyPolar(NamedTuple):
    u_l: float    # total planar speed [m/s]
    psi_a: float  # sideslip angle [rad], in (-pi/2, pi/2)


class ErrorPolar(NamedTuple):
    p_e: float    # range to the target point [m]
    psi_b: float  # azimuth from vessel to target [rad], in (-pi, pi]


def body_polar(u: float, v: float) -> BodyPolar:
    """Polar form of the body-frame velocity.

    The sideslip angle arctan(v/u) is only meaningful while the vessel
    moves forward; u <= 0 raises :class:`SingularSideslip`.
    """
    if u <= 0.0:
        raise SingularSideslip(f"sideslip undefined at surge speed u={u!r} <= 0")
    return BodyPolar(math.hypot(u, v), math.atan(v / u))


def error_polar(target: Sequence[float], vessel: Sequence[float]) -> ErrorPolar:
    """Polar form of the position error from vessel to target.

    Uses the four-quadrant azimuth.  At coincidence the azimuth is set to
    zero by convention; every azimuth term of the control law vanishes
    there, so any value is safe.
    """
    x_e = target[0] - vessel[0]
    y_e = target[1] - vessel[1]
    p_e = math.hypot(x_e, y_e)
    if p_e == 0.0:
        return ErrorPolar(0.0, 0.0)
    return ErrorPolar(p_e, math.atan2(y_e, x_e))


def error_polar_rate(
    err: ErrorPolar,
    target_vel: Sequence[float],
    vessel_vel: Sequence[float],
) -> Tuple[float, float]:
    """Time derivatives (p_e_dot, psi_b_dot) of the error polar coordinates.

    The range rate is the projection of the relative velocity onto the
    line of sight.  The azimuth rate carries a 1/p_e factor and is forced
    to zero below ``P_GUARD``.
    """
    ex_dot = target_vel[0] - vessel_vel[0]
    ey_dot = target_vel[1] - vessel_vel[1]
    cb = math.cos(err.psi_b)
    sb = math.sin(err.psi_b)
    p_e_dot = cb * ex_dot + sb * ey_dot
    if err.p_e <= P_GUARD:
        return p_e_dot, 0.0
    psi_b_dot = (ey_dot * cb - ex_dot * sb) / err.p_e
    return p_e_dot, psi_b_dot


@dataclass
class ReducedModel:
    """Surge-speed/heading-rate form of the vessel dynamics.

    Collects everything the controller needs about the velocity polar
    coordinates: the transformed nominal dynamics, the transformed input
    gains, and the sideslip rate bookkeeping used to build them.
    """

    u_l: float        # total planar speed [m/s]
    psi_a: float      # sideslip angle [rad]
    psi_l: float      # navigation-frame yaw of the velocity vector [rad]
    r_l: float        # rate of psi_l [rad/s]
    f_ul: float       # nominal speed-channel dynamics [m/s^2]
    f_rl: float       # nominal heading-rate-channel dynamics [rad/s^2]
    b_ul: float       # speed-channel input gain
    eps_ra: float     # lift leakage of the yaw moment into the speed channel
    d_ulM: float      # bound on the speed-channel disturbance [m/s^2]
    psi_a_dot: float  # sideslip rate [rad/s]
    psi_a_ddot: float # sideslip acceleration estimate [rad/s^2]


def reduced_model(
    state,
    params,
    f_nominal: Sequence[float],
    nu_dot_est: Optional[Sequence[float]] = None,
    psi_a_dot_prev: Optional[float] = None,
    dt: float = 0.01,
) -> ReducedModel:
    """Build the reduced speed/heading-rate model at the current state.

    ``f_nominal`` is the (f_u, f_v, f_r) triple of nominal accelerations.
    ``nu_dot_est`` is the caller's best estimate of (u_dot, v_dot) used for
    the sideslip rate; it defaults to the nominal accelerations (the
    disturbance is unknown to the controller, so its contribution is
    absorbed into the dominated uncertainty).  The sideslip acceleration
    is a backward difference of the sideslip rate; on the first step
    (``psi_a_dot_prev`` is None) it is defined as zero.
    """
    f_u, f_v, f_r = f_nominal
    bp = body_polar(state.u, state.v)
    if nu_dot_est is None:
        u_dot, v_dot = f_u, f_v
    else:
        u_dot, v_dot = nu_dot_est

    ul_sq = bp.u_l * bp.u_l
    psi_a_dot = (v_dot * state.u - u_dot * state.v) / ul_sq
    if psi_a_dot_prev is None:
        psi_a_ddot = 0.0
    else:
        psi_a_ddot = (psi_a_dot - psi_a_dot_prev) / dt

    ca = math.cos(bp.psi_a)
    sa = math.sin(bp.psi_a)
    return ReducedModel(
        u_l=bp.u_l,
        psi_a=bp.psi_a,
        psi_l=wrap_angle(state.psi + bp.psi_a),
        r_l=state.r + psi_a_dot,
        f_ul=ca * f_u + sa * f_v,
        f_rl=f_r + psi_a_ddot,
        b_ul=ca * params.b_u,
        eps_ra=sa * params.eps_r,
        d_ulM=math.hypot(params.d_uM, params.d_vM),
        psi_a_dot=psi_a_dot,
        psi_a_ddot=psi_a_ddot,
    )
