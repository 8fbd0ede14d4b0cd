"""Fixed-step closed-loop simulation engine.

One scenario is one isolated loop: it owns the random streams, the
controller memory and the reference accumulator, steps the vessel and the
reference pose on the same grid with a classical fourth-order integrator,
and records every signal of interest per step.  Runs are bit-for-bit
reproducible for a fixed configuration (seed included).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .cbf import CbfConfig, Method1Config, cbf_min_surge_force, filter_qp
from .controller import (ControlOutput, ControllerGains, ControllerState,
                         GainSingular, control_law, lyapunov_diag,
                         make_tracking_errors)
from .emo import EmoParams, emo_modify
from .reference import ReferenceSample, ReferenceSpec, standard_reference
from .transforms import (SingularSideslip, error_polar, error_polar_rate,
                         reduced_model, wrap_angle)
from .vessel import (ControlInput, VesselParams, VesselState,
                     ZERO_DISTURBANCE, eval_nominal_accel, sample_disturbance,
                     state_derivative)

FLAG_SURGE_REPLACEMENT = 1
FLAG_CBF_ACTIVE = 2
FLAG_SINGULAR = 4

_trapezoid = getattr(np, "trapezoid", np.trapz)

# Consecutive steps the settling-ball criteria must hold before the
# surge-replacement window is declared over.
TC_DWELL_STEPS = 10

TRACE_COLUMNS = [
    "t", "x", "y", "psi", "u", "v", "r",
    "x_d", "y_d", "psi_ld", "u_ld",
    "p_e", "psi_b", "psi_a", "u_l", "psi_l",
    "psi_le", "u_le", "e_rl",
    "u_ld_m", "psi_ld_m", "alpha_rl",
    "tau_u_star", "tau_r_star", "tau_u", "tau_r",
    "V1", "V2", "envelope", "h", "event_flags",
]


@dataclass
class ScenarioConfig:
    """Everything one simulation run depends on."""

    params: VesselParams = field(default_factory=VesselParams)
    gains: ControllerGains = field(default_factory=ControllerGains)
    emo: EmoParams = field(default_factory=EmoParams)
    cbf: CbfConfig = field(default_factory=CbfConfig)
    method1: Method1Config = field(default_factory=Method1Config)
    reference: ReferenceSpec = field(default_factory=standard_reference)
    method: str = "1"              # "1", "2" or "none"
    dt: float = 0.01
    t_final: float = 120.0
    seed: int = 0
    eta0: Tuple[float, float, float] = (50.0, 5.0, math.pi / 6.0)
    nu0: Tuple[float, float, float] = (1.0, 0.0, 0.0)
    delta_u: float = 0.05          # surge-replacement noise floor [m/s]
    disturbances_on: bool = True
    derivative_mode: str = "backward"   # "backward" or "analytic"
    control_period: Optional[float] = None
    scenario: str = "custom"


@dataclass
class SimTrace:
    """Uniform-grid record of one run plus run-level metadata."""

    data: Dict[str, np.ndarray]
    t_c_detected: Optional[float] = None
    config: Optional[ScenarioConfig] = None

    @property
    def t(self) -> np.ndarray:
        return self.data["t"]

    def __len__(self) -> int:
        return len(self.data["t"])

    def event_count(self, flag: int) -> int:
        return int((self.data["event_flags"].astype(int) & flag > 0).sum())


def rk4_step(f: Callable, t: float, y: Sequence[float], dt: float) -> List[float]:
    """One classical fourth-order step of y' = f(t, y) over [t, t + dt]."""
    k1 = f(t, y)
    y2 = [yi + 0.5 * dt * ki for yi, ki in zip(y, k1)]
    k2 = f(t + 0.5 * dt, y2)
    y3 = [yi + 0.5 * dt * ki for yi, ki in zip(y, k2)]
    k3 = f(t + 0.5 * dt, y3)
    y4 = [yi + dt * ki for yi, ki in zip(y, k3)]
    k4 = f(t + dt, y4)
    return [yi + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d)
            for yi, a, b, c, d in zip(y, k1, k2, k3, k4)]


def surge_guard(u: float, window_active: bool, rng: np.random.Generator,
                delta_u_max: float) -> Tuple[float, bool]:
    """Replace a non-positive measured surge speed inside the startup window.

    Returns the speed the controller should use and whether a replacement
    happened.  The replacement models the surge sensor noise floor: a
    random value in (0, delta_u_max].  Outside the window the speed passes
    through untouched and a non-positive value will surface as a sideslip
    singularity downstream.
    """
    if not window_active or u > 0.0:
        return u, False
    return delta_u_max * (1.0 - rng.random()), True


def run_scenario(cfg: ScenarioConfig) -> SimTrace:
    """Run one closed-loop scenario and record every step.

    Per step: read the state (with the startup surge replacement when the
    relaxed-condition method is active), build the polar transforms and
    the modified reference, evaluate the control law, apply the barrier
    filter when the barrier method is selected, then integrate vessel and
    reference together under a zero-order hold of input and disturbance.

    Raises the singularity exceptions with ``step_index``/``t_failed``
    attributes and the partial trace attached.
    """
    params, gains, emo_p = cfg.params, cfg.gains, cfg.emo
    n = int(round(cfg.t_final / cfg.dt))
    dt = cfg.dt

    seq = np.random.SeedSequence(cfg.seed)
    rng_d, rng_g = [np.random.default_rng(s) for s in seq.spawn(2)]

    cols = {name: np.empty(n + 1) for name in TRACE_COLUMNS}

    state = VesselState(cfg.eta0[0], cfg.eta0[1], cfg.eta0[2],
                        cfg.nu0[0], cfg.nu0[1], cfg.nu0[2])
    ref_pose = [cfg.reference.x0, cfg.reference.y0, cfg.reference.psi0]
    cstate = ControllerState()
    tau_prev = ControlInput(0.0, 0.0)
    V2_0: Optional[float] = None
    t_c: Optional[float] = None
    tc_streak = 0

    # settling balls of the relaxed-condition detector
    c_rate = emo_p.contraction_rate
    p_ball = cfg.method1.a_p * math.sqrt(gains.eps_total / c_rate)
    u_ball = cfg.method1.a_u * math.sqrt(gains.eps_total / gains.k_u)

    control_stride = 1
    if cfg.control_period is not None:
        control_stride = max(1, int(round(cfg.control_period / dt)))
    held: Optional[ControlOutput] = None

    def record(k, t, flags, ep, rm, emo_out, errs, out, tau, diag, ref):
        row = (t, state.x, state.y, state.psi, state.u, state.v, state.r,
               ref_pose[0], ref_pose[1], ref_pose[2], ref.u_ld,
               ep.p_e, ep.psi_b, rm.psi_a, rm.u_l, rm.psi_l,
               errs.psi_le, errs.u_le, errs.e_rl,
               emo_out.u_ld_m, emo_out.psi_ld_m, out.alpha_rl,
               out.tau_star.tau_u, out.tau_star.tau_r, tau.tau_u, tau.tau_r,
               diag.V1, diag.V2, diag.envelope, state.u - cfg.cbf.delta,
               float(flags))
        for name, value in zip(TRACE_COLUMNS, row):
            cols[name][k] = value

    def truncate(k) -> SimTrace:
        return SimTrace({name: col[:k] for name, col in cols.items()},
                        t_c_detected=t_c, config=cfg)

    for k in range(n + 1):
        t = k * dt
        flags = 0
        try:
            window_active = cfg.method == "1" and t_c is None
            u_eff, replaced = surge_guard(state.u, window_active, rng_g, cfg.delta_u)
            if replaced:
                flags |= FLAG_SURGE_REPLACEMENT
            state_eff = state if not replaced else VesselState(
                state.x, state.y, state.psi, u_eff, state.v, state.r)

            ref = ReferenceSample(
                x_d=ref_pose[0], y_d=ref_pose[1], psi_ld=ref_pose[2],
                u_ld=cfg.reference.u_ld(t),
                psi_ld_dot=cfg.reference.psi_ld_dot(t),
                u_ld_dot=0.0,
                psi_ld_ddot=cfg.reference.psi_ld_ddot(t),
            )

            f = eval_nominal_accel(state_eff, params)
            nu_dot_est = (f[0] + params.b_u * tau_prev.tau_u,
                          f[1] + params.eps_r * tau_prev.tau_r)
            rm = reduced_model(
                state_eff, params, f, nu_dot_est,
                cstate.prev_psi_a_dot if cstate.initialized else None, dt)

            ep = error_polar((ref.x_d, ref.y_d), (state.x, state.y))
            rates = error_polar_rate(
                ep,
                (ref.u_ld * math.cos(ref.psi_ld), ref.u_ld * math.sin(ref.psi_ld)),
                (rm.u_l * math.cos(rm.psi_l), rm.u_l * math.sin(rm.psi_l)))
            emo_out = emo_modify(ref.u_ld, ref.psi_ld, ep, emo_p)
            errs = make_tracking_errors(ep, emo_out, rm)

            if held is None or k % control_stride == 0:
                out = control_law(rm, errs, emo_out, emo_p, ref, ep, rates,
                                  params, gains, cstate, dt * control_stride,
                                  mode=cfg.derivative_mode)
                cstate = out.cstate
                held = out
            else:
                out = held
                errs.e_rl = out.alpha_rl - rm.r_l

            tau = out.tau_star
            if cfg.method == "2":
                tau_lower = cbf_min_surge_force(state.u, f[0], params, cfg.cbf)
                tau = filter_qp(out.tau_star, tau_lower)
                if tau.tau_u != out.tau_star.tau_u:
                    flags |= FLAG_CBF_ACTIVE

            diag = lyapunov_diag(errs, emo_out, gains, t, V2_0)
            if V2_0 is None:
                V2_0 = diag.V2

            if cfg.method == "1" and t_c is None:
                if ep.p_e <= p_ball and abs(errs.u_le) <= u_ball:
                    tc_streak += 1
                    if tc_streak >= TC_DWELL_STEPS:
                        t_c = t - (TC_DWELL_STEPS - 1) * dt
                else:
                    tc_streak = 0
        except (SingularSideslip, GainSingular) as exc:
            exc.step_index = k
            exc.t_failed = t
            exc.trace = truncate(k)
            raise

        record(k, t, flags, ep, rm, emo_out, errs, out, tau, diag, ref)

        if k == n:
            break

        d = sample_disturbance(rng_d, params) if cfg.disturbances_on else ZERO_DISTURBANCE

        def deriv(tt, yy):
            vs = VesselState(yy[0], yy[1], yy[2], yy[3], yy[4], yy[5])
            sd = state_derivative(vs, params, tau, d)
            u_ld, rate = cfg.reference.rates(tt)
            return (sd.x_dot, sd.y_dot, sd.psi_dot, sd.u_dot, sd.v_dot, sd.r_dot,
                    u_ld * math.cos(yy[8]), u_ld * math.sin(yy[8]), rate)

        y = [state.x, state.y, state.psi, state.u, state.v, state.r,
             ref_pose[0], ref_pose[1], ref_pose[2]]
        y = rk4_step(deriv, t, y, dt)
        state = VesselState(y[0], y[1], y[2], y[3], y[4], y[5])
        ref_pose = [y[6], y[7], y[8]]
        tau_prev = tau

    return SimTrace(dict(cols), t_c_detected=t_c, config=cfg)


def metrics(trace: SimTrace, settle_fraction: float = 0.5,
            tracked_threshold: float = 5.0) -> dict:
    """Summarize a run: final and settled errors, positivity and barrier
    diagnostics, event counts and control effort integrals.

    Settled statistics are maxima over the trailing ``settle_fraction`` of
    the run.  ``tracked`` reports whether the settled range error stayed
    below ``tracked_threshold``.
    """
    if len(trace) == 0:
        raise ValueError("empty trace")
    d = trace.data
    t = d["t"]
    settle_start = t[0] + settle_fraction * (t[-1] - t[0])
    sl = t >= settle_start

    u = d["u"]
    nonpos = np.nonzero(u <= 0.0)[0]
    t_c_estimate = 0.0 if len(nonpos) == 0 else float(t[min(nonpos[-1] + 1, len(t) - 1)])

    effort = {}
    for name in ("tau_u", "tau_r"):
        effort[f"{name}_abs_integral"] = float(_trapezoid(np.abs(d[name]), t))
    effort["norm_integral"] = float(_trapezoid(np.hypot(d["tau_u"], d["tau_r"]), t))

    flags = d["event_flags"].astype(int)
    settled_p_e = float(np.abs(d["p_e"][sl]).max())
    return {
        "final": {name: float(d[name][-1]) for name in ("p_e", "psi_le", "u_le", "e_rl")},
        "settled": {
            "window_start": float(settle_start),
            "p_e_max": settled_p_e,
            "psi_le_max": float(np.abs(d["psi_le"][sl]).max()),
            "u_le_max": float(np.abs(d["u_le"][sl]).max()),
            "e_rl_max": float(np.abs(d["e_rl"][sl]).max()),
        },
        "tracked": bool(settled_p_e <= tracked_threshold),
        "t_c_estimate": t_c_estimate,
        "t_c_detected": trace.t_c_detected,
        "min_h": float(d["h"].min()),
        "events": {
            "surge_replacement": trace.event_count(FLAG_SURGE_REPLACEMENT),
            "cbf_active": trace.event_count(FLAG_CBF_ACTIVE),
            "singular": trace.event_count(FLAG_SINGULAR),
        },
        "envelope_violation_fraction": float((d["V2"] > d["envelope"]).mean()),
        "effort": effort,
    }
