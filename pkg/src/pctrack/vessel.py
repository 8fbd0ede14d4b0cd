"""Three degree-of-freedom surface vessel model.

Kinematics rotate body velocities into the navigation frame; the dynamics
combine a concrete hydrodynamic model (inertia with added mass, linear,
quadratic and cubic damping, Coriolis coupling) with two control inputs
(surge force, yaw moment) and bounded body-frame disturbances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .transforms import wrap_angle

# Default supply-vessel coefficients.
M11_DEFAULT = 1.2e5     # surge inertia incl. added mass [kg]
M22_DEFAULT = 1.779e5   # sway inertia incl. added mass [kg]
M33_DEFAULT = 6.36e7    # yaw inertia incl. added mass [kg m^2]
CHI_U1_DEFAULT = 2.15e4
CHI_V1_DEFAULT = 1.47e5
CHI_R1_DEFAULT = 8.02e6
D_UM_DEFAULT = 22.0 / 11.0
D_VM_DEFAULT = 52.0 / 17.79
D_RM_DEFAULT = 190.0 / 63.6


@dataclass
class VesselState:
    x: float = 0.0    # north position [m]
    y: float = 0.0    # east position [m]
    psi: float = 0.0  # yaw angle [rad], wrapped to (-pi, pi]
    u: float = 0.0    # surge velocity [m/s]
    v: float = 0.0    # sway velocity [m/s]
    r: float = 0.0    # yaw rate [rad/s]

    def __post_init__(self):
        self.psi = wrap_angle(self.psi)


@dataclass
class VesselParams:
    """Inertia, damping, input gains and disturbance bounds.

    The input gains default to the inverse inertias (b_u = 1/m11,
    b_r = 1/m33).  eps_r is the lift effect of the yaw moment on sway; the
    default 0 makes the model minimum phase.
    """

    m11: float = M11_DEFAULT
    m22: float = M22_DEFAULT
    m33: float = M33_DEFAULT
    chi_u1: float = CHI_U1_DEFAULT
    chi_u2: float = 0.2 * CHI_U1_DEFAULT
    chi_u3: float = 0.1 * CHI_U1_DEFAULT
    chi_v1: float = CHI_V1_DEFAULT
    chi_v2: float = 0.2 * CHI_V1_DEFAULT
    chi_v3: float = 0.1 * CHI_V1_DEFAULT
    chi_r1: float = CHI_R1_DEFAULT
    chi_r2: float = 0.2 * CHI_R1_DEFAULT
    chi_r3: float = 0.1 * CHI_R1_DEFAULT
    b_u: Optional[float] = None
    b_r: Optional[float] = None
    eps_r: float = 0.0
    d_uM: float = D_UM_DEFAULT
    d_vM: float = D_VM_DEFAULT
    d_rM: float = D_RM_DEFAULT

    def __post_init__(self):
        if self.b_u is None:
            self.b_u = 1.0 / self.m11
        if self.b_r is None:
            self.b_r = 1.0 / self.m33

    def validate(self) -> list[str]:
        """Return a list of violated invariants (empty when valid)."""
        problems = []
        for name in ("m11", "m22", "m33"):
            if getattr(self, name) <= 0.0:
                problems.append(f"vessel.{name} must be > 0")
        for name in ("b_u", "b_r"):
            if getattr(self, name) <= 0.0:
                problems.append(f"vessel.{name} must be > 0")
        for name in ("d_uM", "d_vM", "d_rM"):
            if getattr(self, name) < 0.0:
                problems.append(f"vessel.{name} must be >= 0")
        return problems


class Disturbance(NamedTuple):
    d_u: float  # surge disturbance acceleration [m/s^2]
    d_v: float  # sway disturbance acceleration [m/s^2]
    d_r: float  # yaw disturbance acceleration [rad/s^2]


ZERO_DISTURBANCE = Disturbance(0.0, 0.0, 0.0)


class ControlInput(NamedTuple):
    tau_u: float  # surge force [N]
    tau_r: float  # yaw moment [N m]


ZERO_INPUT = ControlInput(0.0, 0.0)


class StateDerivative(NamedTuple):
    x_dot: float
    y_dot: float
    psi_dot: float
    u_dot: float
    v_dot: float
    r_dot: float


def eval_nominal_accel(state: VesselState, params: VesselParams):
    """Nominal body-frame accelerations (f_u, f_v, f_r).

    Polynomial in the velocities: Coriolis coupling plus linear, quadratic
    and cubic damping, normalized by the respective inertias.
    """
    u, v, r = state.u, state.v, state.r
    f_u = (params.m22 * v * r
           - params.chi_u1 * u
           - params.chi_u2 * abs(u) * u
           - params.chi_u3 * u ** 3) / params.m11
    # sway damping is dissipative like the other channels; the transient
    # sway reached in pursuit exceeds the level where anti-damped
    # quadratic/cubic terms would diverge
    f_v = -(params.m11 * u * r
            + params.chi_v1 * v
            + params.chi_v2 * abs(v) * v
            + params.chi_v3 * v ** 3) / params.m22
    f_r = ((params.m11 - params.m22) * u * r
           - params.chi_r1 * r
           - params.chi_r2 * abs(r) * r
           - params.chi_r3 * r ** 3) / params.m33
    return f_u, f_v, f_r


def state_derivative(
    state: VesselState,
    params: VesselParams,
    tau: ControlInput = ZERO_INPUT,
    d: Disturbance = ZERO_DISTURBANCE,
) -> StateDerivative:
    """Full state derivative: rotated kinematics plus forced dynamics."""
    c = math.cos(state.psi)
    s = math.sin(state.psi)
    f_u, f_v, f_r = eval_nominal_accel(state, params)
    return StateDerivative(
        x_dot=c * state.u - s * state.v,
        y_dot=s * state.u + c * state.v,
        psi_dot=state.r,
        u_dot=f_u + params.b_u * tau.tau_u + d.d_u,
        v_dot=f_v + params.eps_r * tau.tau_r + d.d_v,
        r_dot=f_r + params.b_r * tau.tau_r + d.d_r,
    )


def coriolis_accel(state: VesselState, params: VesselParams):
    """Velocity cross terms of the nominal accelerations.

    These are even under joint sign flip of (u, v, r) while the damping
    terms are odd; exposing them separately lets callers test the
    decomposition.
    """
    return (
        params.m22 * state.v * state.r / params.m11,
        -params.m11 * state.u * state.r / params.m22,
        (params.m11 - params.m22) * state.u * state.r / params.m33,
    )


def sample_disturbance(rng: np.random.Generator, params: VesselParams) -> Disturbance:
    """Draw one bounded disturbance, each component uniform on [-bound, +bound].

    Components are drawn in the order (surge, sway, yaw) so a fixed seed
    reproduces the exact sequence.  A draw of 0 maps to +bound and a draw
    of 1 to -bound.
    """
    return Disturbance(
        params.d_uM * (1.0 - 2.0 * rng.random()),
        params.d_vM * (1.0 - 2.0 * rng.random()),
        params.d_rM * (1.0 - 2.0 * rng.random()),
    )
