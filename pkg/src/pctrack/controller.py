"""Backstepping tracking controller in the polar error coordinates.

The kinematic stage steers the heading of the velocity vector with a
stabilizing yaw-rate function; the dynamic stage inverts the reduced
two-channel model to realize it, adding smooth domination terms that
absorb the bounded disturbances.  The zero-range degenerate path and the
small-heading-error removable singularity are handled explicitly.

Derivatives of the modified reference speed and of the stabilizing
yaw-rate function are not available in closed form to the controller in
general (they contain jerk-level and disturbance-dependent information),
so by default they are estimated by backward differences held in
:class:`ControllerState`.  For noise-free validation an analytic mode
computes them exactly; it requires a minimum-phase model (eps_r = 0), in
which case the surge force can be computed first and the yaw-moment
channel closed afterwards without circularity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional, Tuple

from .emo import EmoOutput, EmoParams, emo_heading_rate
from .reference import ReferenceSample
from .transforms import P_GUARD, ErrorPolar, ReducedModel, wrap_angle
from .vessel import ControlInput, VesselParams

# Minimum value of cos(psi_a) before the speed-channel gain is considered
# singular; tripping it signals a violated forward-speed assumption rather
# than a condition to clamp silently.
COS_SIDESLIP_GUARD = 1e-3


class GainSingular(Exception):
    """Speed-channel input gain too close to zero to invert."""


@dataclass
class ControllerGains:
    """Error gains, Lyapunov weights and domination shape parameters."""

    k_psi: float = 40.0
    k_u: float = 800.0
    k_r: float = 100.0
    gamma_psi: float = 120.0
    gamma_u: float = 60.0
    gamma_r: float = 1.0
    eps_ul: float = 1.0   # domination slack, speed channel
    eps_rl: float = 1.0   # domination slack, yaw-rate channel
    sigma: float = 1.0    # smooth bound shape parameter

    def validate(self) -> list[str]:
        problems = []
        for name in ("k_psi", "k_u", "k_r", "gamma_psi", "gamma_u", "gamma_r",
                     "eps_ul", "eps_rl", "sigma"):
            if getattr(self, name) <= 0.0:
                problems.append(f"gains.{name} must be > 0")
        return problems

    @property
    def eps_total(self) -> float:
        return self.eps_ul + self.eps_rl


@dataclass
class ControllerState:
    """Backward-difference memory owned by one control loop."""

    prev_alpha_rl: float = 0.0
    prev_u_ld_m: float = 0.0
    prev_psi_a_dot: float = 0.0
    initialized: bool = False


@dataclass
class TrackingErrors:
    p_e: float     # range error [m]
    psi_le: float  # heading error of the velocity vector [rad], wrapped
    u_le: float    # speed error [m/s]
    e_rl: float    # yaw-rate error against the stabilizing function [rad/s]
    a_psi: float   # mean-heading offset from the azimuth [rad], wrapped


def make_tracking_errors(err: ErrorPolar, emo: EmoOutput, reduced: ReducedModel) -> TrackingErrors:
    """Assemble the tracking errors; the yaw-rate error is filled by the control law.

    The mean-heading offset is built from the wrapped heading error so that
    the two stay on the same branch: the product sin(a_psi)*sin(psi_le/2)
    is branch-invariant, but the half-angle division is not.
    """
    psi_le = wrap_angle(emo.psi_ld_m - reduced.psi_l)
    a_psi = wrap_angle(reduced.psi_l + 0.5 * psi_le - err.psi_b)
    return TrackingErrors(
        p_e=err.p_e,
        psi_le=psi_le,
        u_le=emo.u_ld_m - reduced.u_l,
        e_rl=0.0,
        a_psi=a_psi,
    )


def smooth_bound_fn(zeta: float, sigma: float, eps: float) -> float:
    """Odd smooth saturation tanh(sigma*zeta/eps) used by the domination terms.

    For sigma at or above the fixed point of s = exp(-(s+1)) it satisfies
    |zeta| <= zeta*phi(zeta) + eps for all zeta.
    """
    return math.tanh(sigma * zeta / eps)


@lru_cache(maxsize=1)
def fixed_point_sigma(tol: float = 1e-12, max_iter: int = 200) -> float:
    """Smallest admissible shape parameter, from iterating s = exp(-(s+1))."""
    s = 1.0
    for _ in range(max_iter):
        s_next = math.exp(-(s + 1.0))
        if abs(s_next - s) < tol:
            return s_next
        s = s_next
    return s


def sinc_half(psi_le: float) -> float:
    """sin(x/2)/(x/2) with the removable singularity filled at x = 0."""
    if abs(psi_le) < 1e-6:
        return 1.0 - psi_le * psi_le / 24.0
    h = 0.5 * psi_le
    return math.sin(h) / h


def sinc_half_prime(psi_le: float) -> float:
    """Derivative of :func:`sinc_half` with respect to the full angle."""
    if abs(psi_le) < 1e-6:
        return -psi_le / 12.0
    h = 0.5 * psi_le
    return (h * math.cos(h) - math.sin(h)) / (2.0 * h * h)


def stabilizing_yaw_rate(
    errs: TrackingErrors,
    u_l: float,
    psi_ld_m_dot: float,
    gains: ControllerGains,
) -> float:
    """Stabilizing function for the heading-rate virtual input.

    Feedforward of the modified-heading rate plus heading-error feedback,
    with a range-coupling term that cancels the cross contribution of the
    range error; the half-angle ratio keeps it smooth through zero heading
    error.  At zero range the coupling term vanishes and the feedback form
    remains.
    """
    coupling = errs.p_e * u_l * math.sin(errs.a_psi) * sinc_half(errs.psi_le)
    return psi_ld_m_dot + (gains.k_psi * errs.psi_le - coupling) / gains.gamma_psi


class LyapunovDiag(NamedTuple):
    V1: float        # kinematic-level value
    V2: float        # total value
    lam: float       # guaranteed decay rate
    envelope: float  # exponential bound at the current time


def decay_rate(emo_c: float, gains: ControllerGains) -> float:
    """Guaranteed decay rate of the total Lyapunov value."""
    return min(
        2.0 * emo_c,
        2.0 * gains.k_psi / gains.gamma_psi,
        2.0 * gains.k_u / gains.gamma_u,
        2.0 * gains.k_r / gains.gamma_r,
    )


def lyapunov_diag(
    errs: TrackingErrors,
    emo: EmoOutput,
    gains: ControllerGains,
    t: float = 0.0,
    V2_0: Optional[float] = None,
) -> LyapunovDiag:
    """Lyapunov values and the exponential envelope at time t.

    The envelope is floor + (V2(0) - floor)*exp(-lam*t) with floor equal to
    the total domination slack over the decay rate; with ``V2_0`` omitted
    the envelope equals the current value (the t = 0 convention).
    """
    V1 = 0.5 * (errs.p_e ** 2 + gains.gamma_psi * errs.psi_le ** 2)
    V2 = V1 + 0.5 * (gains.gamma_u * errs.u_le ** 2 + gains.gamma_r * errs.e_rl ** 2)
    lam = decay_rate(emo.c, gains)
    floor = gains.eps_total / lam
    v0 = V2 if V2_0 is None else V2_0
    envelope = floor + (v0 - floor) * math.exp(-lam * t)
    return LyapunovDiag(V1, V2, lam, envelope)


class ControlOutput(NamedTuple):
    tau_star: ControlInput
    alpha_rl: float
    psi_ld_m_dot: float
    u_ld_m_dot: float
    alpha_rl_dot: float
    cstate: ControllerState


def control_law(
    reduced: ReducedModel,
    errs: TrackingErrors,
    emo: EmoOutput,
    emo_params: EmoParams,
    ref: ReferenceSample,
    err: ErrorPolar,
    rates: Tuple[float, float],
    params: VesselParams,
    gains: ControllerGains,
    cstate: ControllerState,
    dt: float,
    mode: str = "backward",
) -> ControlOutput:
    """Assemble the two control inputs for the current step.

    ``rates`` is the guarded (p_e_dot, psi_b_dot) pair.  Fills
    ``errs.e_rl`` in place once the stabilizing yaw rate is known and
    returns fresh backward-difference memory.  Below the range guard the
    degenerate zero-range form is used, where every azimuth-dependent term
    drops out.

    In ``"analytic"`` mode the reference-derivative feedforwards are exact;
    this requires eps_r = 0 so the surge force can be resolved before the
    yaw channel.
    """
    if math.cos(reduced.psi_a) < COS_SIDESLIP_GUARD:
        raise GainSingular(
            f"speed-channel gain singular: cos(psi_a)={math.cos(reduced.psi_a):.3e}"
        )
    if mode not in ("backward", "analytic"):
        raise ValueError(f"unknown derivative mode {mode!r}")
    analytic = mode == "analytic"
    if analytic and reduced.eps_ra != 0.0:
        raise ValueError("analytic derivative mode requires eps_r = 0")

    p_e_dot, psi_b_dot = rates
    degenerate = errs.p_e <= P_GUARD

    # Rate of the modified heading, from measurable kinematics.
    if degenerate:
        psi_ld_m_dot = ref.psi_ld_dot
        phi_dot = 0.0
    else:
        psi_ld_m_dot = emo_heading_rate(emo, err, ref.psi_ld_dot, p_e_dot, psi_b_dot, emo_params)
        decay = math.exp(-emo_params.c_psi * err.p_e)
        phi_dot = (ref.psi_ld_dot - psi_b_dot) * decay - emo_params.c_psi * p_e_dot * emo.varphi

    alpha_rl = stabilizing_yaw_rate(errs, reduced.u_l, psi_ld_m_dot, gains)
    errs.e_rl = alpha_rl - reduced.r_l

    # Feedforward derivative of the modified reference speed.
    if analytic:
        if degenerate:
            u_ld_m_dot = ref.u_ld_dot
        else:
            cv = math.cos(emo.varphi)
            sv = math.sin(emo.varphi)
            u_ld_m_dot = ref.u_ld_dot + emo_params.c_u * (
                p_e_dot * cv - errs.p_e * sv * phi_dot
            )
    elif cstate.initialized:
        u_ld_m_dot = (emo.u_ld_m - cstate.prev_u_ld_m) / dt
    else:
        u_ld_m_dot = 0.0

    # Speed channel.
    range_coupling = 0.0 if degenerate else errs.p_e * math.cos(emo.varphi)
    w_u = (
        u_ld_m_dot
        - reduced.f_ul
        + (gains.k_u * errs.u_le + range_coupling) / gains.gamma_u
        + reduced.d_ulM * smooth_bound_fn(
            gains.gamma_u * errs.u_le * reduced.d_ulM, gains.sigma, gains.eps_ul)
    )

    # Derivative of the stabilizing yaw rate.
    if analytic:
        tau_u = w_u / reduced.b_ul
        alpha_rl_dot = _analytic_alpha_rl_dot(
            reduced, errs, emo, emo_params, ref, err, p_e_dot, psi_b_dot,
            psi_ld_m_dot, phi_dot, gains, tau_u, degenerate)
    elif cstate.initialized:
        alpha_rl_dot = (alpha_rl - cstate.prev_alpha_rl) / dt
    else:
        alpha_rl_dot = 0.0

    # Yaw-rate channel, then the triangular-inverse surge force.
    w_r = (
        alpha_rl_dot
        - reduced.f_rl
        + (gains.k_r * errs.e_rl + gains.gamma_psi * errs.psi_le) / gains.gamma_r
        + params.d_rM * smooth_bound_fn(
            gains.gamma_r * errs.e_rl * params.d_rM, gains.sigma, gains.eps_rl)
    )
    tau_r = w_r / params.b_r
    tau_u = (w_u - reduced.eps_ra * tau_r) / reduced.b_ul

    new_state = ControllerState(
        prev_alpha_rl=alpha_rl,
        prev_u_ld_m=emo.u_ld_m,
        prev_psi_a_dot=reduced.psi_a_dot,
        initialized=True,
    )
    return ControlOutput(
        tau_star=ControlInput(tau_u, tau_r),
        alpha_rl=alpha_rl,
        psi_ld_m_dot=psi_ld_m_dot,
        u_ld_m_dot=u_ld_m_dot,
        alpha_rl_dot=alpha_rl_dot,
        cstate=new_state,
    )


def _analytic_alpha_rl_dot(
    reduced: ReducedModel,
    errs: TrackingErrors,
    emo: EmoOutput,
    emo_params: EmoParams,
    ref: ReferenceSample,
    err: ErrorPolar,
    p_e_dot: float,
    psi_b_dot: float,
    psi_ld_m_dot: float,
    phi_dot: float,
    gains: ControllerGains,
    tau_u: float,
    degenerate: bool,
) -> float:
    """Exact time derivative of the stabilizing yaw rate (minimum phase).

    Second derivatives of the range and azimuth follow from the planar
    accelerations of vessel and target; the vessel speed derivative uses
    the surge force already fixed for this step.
    """
    if degenerate:
        psi_le_dot = ref.psi_ld_dot - reduced.r_l
        return ref.psi_ld_ddot + gains.k_psi * psi_le_dot / gains.gamma_psi

    p_e = err.p_e
    u_l = reduced.u_l
    psi_l = reduced.psi_l
    r_l = reduced.r_l
    u_l_dot = reduced.f_ul + reduced.b_ul * tau_u

    cl, sl = math.cos(psi_l), math.sin(psi_l)
    cd, sd = math.cos(ref.psi_ld), math.sin(ref.psi_ld)
    x_e = p_e * math.cos(err.psi_b)
    y_e = p_e * math.sin(err.psi_b)
    ex_dot = ref.u_ld * cd - u_l * cl
    ey_dot = ref.u_ld * sd - u_l * sl
    ex_ddot = (ref.u_ld_dot * cd - ref.u_ld * sd * ref.psi_ld_dot) \
        - (u_l_dot * cl - u_l * sl * r_l)
    ey_ddot = (ref.u_ld_dot * sd + ref.u_ld * cd * ref.psi_ld_dot) \
        - (u_l_dot * sl + u_l * cl * r_l)

    p_e_ddot = (ex_dot ** 2 + ey_dot ** 2 + x_e * ex_ddot + y_e * ey_ddot
                - p_e_dot ** 2) / p_e
    psi_b_ddot = (ey_ddot * x_e - ex_ddot * y_e) / (p_e * p_e) \
        - 2.0 * p_e_dot * psi_b_dot / p_e

    decay = math.exp(-emo_params.c_psi * p_e)
    delta_dot = ref.psi_ld_dot - psi_b_dot
    delta_ddot = ref.psi_ld_ddot - psi_b_ddot
    phi_ddot = (delta_ddot * decay
                - delta_dot * decay * emo_params.c_psi * p_e_dot
                - emo_params.c_psi * (p_e_ddot * emo.varphi + p_e_dot * phi_dot))
    psi_ld_m_ddot = psi_b_ddot + phi_ddot

    psi_le_dot = psi_ld_m_dot - r_l
    a_psi_dot = 0.5 * (psi_ld_m_dot + r_l) - psi_b_dot
    s = sinc_half(errs.psi_le)
    s_dot = sinc_half_prime(errs.psi_le) * psi_le_dot
    sa, ca = math.sin(errs.a_psi), math.cos(errs.a_psi)
    coupling_dot = (
        p_e_dot * u_l * sa * s
        + p_e * u_l_dot * sa * s
        + p_e * u_l * ca * a_psi_dot * s
        + p_e * u_l * sa * s_dot
    )
    return psi_ld_m_ddot + (gains.k_psi * psi_le_dot - coupling_dot) / gains.gamma_psi
