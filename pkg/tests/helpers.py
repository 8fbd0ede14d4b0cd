"""Shared builders for controller-level tests.

Fabricate consistent controller inputs without running a simulation, plus
an independently coded zero-range control law used as the degenerate-path
reference.
"""

import math

from pctrack.reference import ReferenceSample
from pctrack.transforms import ReducedModel


def make_reduced(params, u_l=10.0, psi_a=0.1, psi_l=0.5, r_l=0.02,
                 f_ul=-0.3, f_rl=0.01):
    return ReducedModel(
        u_l=u_l, psi_a=psi_a, psi_l=psi_l, r_l=r_l, f_ul=f_ul, f_rl=f_rl,
        b_ul=math.cos(psi_a) * params.b_u,
        eps_ra=math.sin(psi_a) * params.eps_r,
        d_ulM=math.hypot(params.d_uM, params.d_vM),
        psi_a_dot=0.0, psi_a_ddot=0.0)


def make_ref(u_ld=10.0, psi_ld=0.5, psi_ld_dot=0.0, u_ld_dot=0.0, psi_ld_ddot=0.0):
    return ReferenceSample(x_d=0.0, y_d=0.0, psi_ld=psi_ld, u_ld=u_ld,
                           psi_ld_dot=psi_ld_dot, u_ld_dot=u_ld_dot,
                           psi_ld_ddot=psi_ld_ddot)


def degenerate_law(reduced, errs, ref, params, gains, mode="analytic",
                   cstate=None, dt=0.01):
    """Independent coding of the zero-range control law.

    Feedforward of the raw reference derivatives, heading feedback through
    the stabilizing yaw rate without any azimuth terms, error feedback and
    domination, closed through the triangular input-matrix inverse.
    """
    alpha_rl = ref.psi_ld_dot + gains.k_psi * errs.psi_le / gains.gamma_psi
    e_rl = alpha_rl - reduced.r_l
    if mode == "analytic":
        u_ld_m_dot = ref.u_ld_dot
        alpha_rl_dot = ref.psi_ld_ddot + gains.k_psi * (ref.psi_ld_dot - reduced.r_l) / gains.gamma_psi
    elif cstate is not None and cstate.initialized:
        u_ld_m_dot = (ref.u_ld - cstate.prev_u_ld_m) / dt
        alpha_rl_dot = (alpha_rl - cstate.prev_alpha_rl) / dt
    else:
        u_ld_m_dot = 0.0
        alpha_rl_dot = 0.0
    dom_u = reduced.d_ulM * math.tanh(
        gains.sigma * (gains.gamma_u * errs.u_le * reduced.d_ulM) / gains.eps_ul)
    dom_r = params.d_rM * math.tanh(
        gains.sigma * (gains.gamma_r * e_rl * params.d_rM) / gains.eps_rl)
    w_u = u_ld_m_dot - reduced.f_ul + (gains.k_u * errs.u_le) / gains.gamma_u + dom_u
    w_r = alpha_rl_dot - reduced.f_rl \
        + (gains.k_r * e_rl + gains.gamma_psi * errs.psi_le) / gains.gamma_r + dom_r
    tau_r = w_r / params.b_r
    tau_u = (w_u - reduced.eps_ra * tau_r) / reduced.b_ul
    return tau_u, tau_r
