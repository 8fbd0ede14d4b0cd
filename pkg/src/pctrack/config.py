"""Scenario configuration: JSON schema, defaults, presets, validation.

Config documents are plain JSON with snake_case keys.  Static angles are
given in degrees (``*_deg`` keys) and converted to radians internally;
angular rates stay in rad/s; everything else is SI.  An empty document
resolves to the full benchmark default (the nominal cruise scenario), and
any run can be reproduced from its manifest alone.
"""

from __future__ import annotations

import copy
import json
import math
import os
from typing import Optional

import numpy as np

from .cbf import CbfConfig, Method1Config, method1_threshold
from .controller import ControllerGains
from .emo import EmoParams, check_gain_condition, solve_kappa
from .engine import ScenarioConfig, SimTrace, TRACE_COLUMNS
from .reference import ReferenceSpec, Segment
from .vessel import VesselParams


class ParseError(Exception):
    """Config document is not valid JSON or not an object."""


class ValidationError(Exception):
    """One or more config invariants are violated; lists all of them."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n" + "\n".join(
            f"  - {p}" for p in self.problems))


def default_config() -> dict:
    """Full default configuration document (the nominal cruise scenario)."""
    return {
        "scenario": "custom",
        "seed": 0,
        "dt": 0.01,
        "t_final": 120.0,
        "method": "1",
        "vessel": {
            "m11": 1.2e5, "m22": 1.779e5, "m33": 6.36e7,
            "chi_u1": 2.15e4, "chi_u2": 4.3e3, "chi_u3": 2.15e3,
            "chi_v1": 1.47e5, "chi_v2": 2.94e4, "chi_v3": 1.47e4,
            "chi_r1": 8.02e6, "chi_r2": 1.604e6, "chi_r3": 8.02e5,
            "b_u": None, "b_r": None,
            "eps_r": 0.0,
            "d_uM": 22.0 / 11.0, "d_vM": 52.0 / 17.79, "d_rM": 190.0 / 63.6,
        },
        "gains": {
            "k_psi": 40.0, "k_u": 800.0, "k_r": 100.0,
            "gamma_psi": 120.0, "gamma_u": 60.0, "gamma_r": 1.0,
            "eps_ul": 1.0, "eps_rl": 1.0, "sigma": 1.0,
        },
        "emo": {"c_u": 0.2, "c_psi": 0.2, "u_m": 1.4902},
        "cbf": {"delta": 0.6, "alpha_kind": "quadratic", "alpha_gain": 1.0},
        "method1": {"v_M": 0.8, "a_p": 1.0113, "a_u": 1.0113},
        "initial": {"x": 50.0, "y": 5.0, "psi_deg": 30.0,
                    "u": 1.0, "v": 0.0, "r": 0.0},
        "reference": {
            "x0": 100.0, "y0": 30.0, "psi0_deg": 90.0,
            "segments": [
                {"t_start": 0.0, "t_end": 60.0, "u_ld": 10.0,
                 "kind": "rate", "rate": 0.0},
                {"t_start": 60.0, "t_end": 75.0, "u_ld": 10.0,
                 "kind": "exp_blend", "rate": -0.05},
                {"t_start": 75.0, "t_end": None, "u_ld": 10.0,
                 "kind": "rate", "rate": -0.05},
            ],
        },
        "delta_u": 0.05,
        "disturbances_on": True,
        "derivative_mode": "backward",
        "control_period": None,
    }


def _with_cruise_speed(doc: dict, speed: float, u_m: float, name: str) -> dict:
    for seg in doc["reference"]["segments"]:
        seg["u_ld"] = speed
    doc["emo"]["u_m"] = u_m
    doc["scenario"] = name
    return doc


def preset(name: str) -> dict:
    """Named scenario document: nominal cruise, slow cruise, threshold cruise."""
    doc = default_config()
    if name == "fig2-nominal":
        return _with_cruise_speed(doc, 10.0, 1.4902, name)
    if name == "fig5-slow":
        return _with_cruise_speed(doc, 1.3, 1.3, name)
    if name == "fig6-threshold":
        return _with_cruise_speed(doc, 1.8, 1.8, name)
    raise KeyError(f"unknown preset {name!r}; have fig2-nominal, fig5-slow, fig6-threshold")


PRESETS = ("fig2-nominal", "fig5-slow", "fig6-threshold")


def _deep_merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def parse_config(doc: dict) -> ScenarioConfig:
    """Merge a (possibly partial) document over the defaults and validate.

    All violated invariants are collected and reported together.  The
    relaxed-condition threshold check is informative only: the condition
    is sufficient, not necessary, so a violation is recorded in the
    validation report rather than rejected.
    """
    if not isinstance(doc, dict):
        raise ParseError("config document must be a JSON object")
    # a manifest is accepted wherever a config is: use its snapshot
    if "config" in doc and isinstance(doc["config"], dict):
        doc = doc["config"]
    merged = _deep_merge(default_config(), doc)

    problems = []
    try:
        params = VesselParams(**merged["vessel"])
        gains = ControllerGains(**merged["gains"])
        emo = EmoParams(**merged["emo"])
        cbf = CbfConfig(**merged["cbf"])
        method1 = Method1Config(**merged["method1"])
        ref_doc = merged["reference"]
        reference = ReferenceSpec(
            x0=float(ref_doc["x0"]), y0=float(ref_doc["y0"]),
            psi0=math.radians(float(ref_doc["psi0_deg"])),
            segments=[Segment(
                t_start=float(s["t_start"]),
                t_end=None if s["t_end"] is None else float(s["t_end"]),
                u_ld=float(s["u_ld"]),
                kind=s.get("kind", "rate"),
                rate=float(s.get("rate", 0.0)),
            ) for s in ref_doc["segments"]],
        )
        init = merged["initial"]
        cfg = ScenarioConfig(
            params=params, gains=gains, emo=emo, cbf=cbf, method1=method1,
            reference=reference,
            method=str(merged["method"]),
            dt=float(merged["dt"]), t_final=float(merged["t_final"]),
            seed=int(merged["seed"]),
            eta0=(float(init["x"]), float(init["y"]),
                  math.radians(float(init["psi_deg"]))),
            nu0=(float(init["u"]), float(init["v"]), float(init["r"])),
            delta_u=float(merged["delta_u"]),
            disturbances_on=bool(merged["disturbances_on"]),
            derivative_mode=str(merged["derivative_mode"]),
            control_period=merged["control_period"],
            scenario=str(merged["scenario"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed config document: {exc}") from exc

    problems += params.validate()
    problems += gains.validate()
    problems += cbf.validate()
    problems += method1.validate()
    if emo.c_u <= 0 or emo.c_psi <= 0 or emo.u_m <= 0:
        problems += emo.validate()
    else:
        margin = check_gain_condition(emo)
        if margin <= 0.0:
            problems.append(
                f"emo gain condition violated: margin = {margin:.6g} <= 0 "
                f"(need c_psi*u_m > 2*c_u*kappa)")
    problems += reference.validate(u_m=emo.u_m)
    if cfg.dt <= 0.0:
        problems.append("dt must be > 0")
    if cfg.t_final <= 0.0:
        problems.append("t_final must be > 0")
    if not all(math.isfinite(v) for v in (*cfg.eta0, *cfg.nu0)):
        problems.append("initial state must be finite")
    if cfg.method not in ("1", "2", "none"):
        problems.append(f"method must be '1', '2' or 'none', got {cfg.method!r}")
    if cfg.delta_u <= 0.0:
        problems.append("delta_u must be > 0")
    if cfg.derivative_mode not in ("backward", "analytic"):
        problems.append("derivative_mode must be 'backward' or 'analytic'")
    if cfg.derivative_mode == "analytic" and params.eps_r != 0.0:
        problems.append("analytic derivative mode requires eps_r = 0")
    if cfg.control_period is not None and cfg.control_period < cfg.dt:
        problems.append("control_period must be >= dt")
    last = reference.segments[-1] if reference.segments else None
    if last is not None and last.t_end is not None and last.t_end < cfg.t_final:
        problems.append("reference segments must cover [0, t_final]")

    if problems:
        raise ValidationError(problems)
    return cfg


def load_config(path: str) -> ScenarioConfig:
    """Load, merge and validate a JSON config (or manifest) file."""
    with open(path, "r") as fh:
        text = fh.read()
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return parse_config(doc)


def validation_report(cfg: ScenarioConfig) -> dict:
    """Derived quantities worth recording with every run.

    Includes the solved transcendental constant, the gain-condition
    margin, and the relaxed-condition threshold with its warning when the
    configured floor does not clear it.
    """
    z_star, kappa = solve_kappa()
    margin = check_gain_condition(cfg.emo)
    report = {
        "kappa": kappa,
        "z_star": z_star,
        "gain_margin": margin,
        "contraction_rate": cfg.emo.contraction_rate,
        "method": cfg.method,
        "warnings": [],
    }
    try:
        rhs = method1_threshold(cfg.method1, cfg.emo, cfg.gains)
        report["method1_threshold_rhs"] = rhs
        report["method1_condition_met"] = bool(cfg.emo.u_m > rhs)
        if cfg.method == "1" and cfg.emo.u_m <= rhs:
            report["warnings"].append(
                f"relaxed surge-positivity condition not met: "
                f"u_m = {cfg.emo.u_m} <= threshold {rhs:.4f} "
                "(condition is sufficient, not necessary; run proceeds)")
    except ValueError:
        report["method1_threshold_rhs"] = None
        report["method1_condition_met"] = None
    return report


def config_to_document(cfg: ScenarioConfig) -> dict:
    """Serialize a ScenarioConfig back to the JSON document form."""
    return {
        "scenario": cfg.scenario,
        "seed": cfg.seed,
        "dt": cfg.dt,
        "t_final": cfg.t_final,
        "method": cfg.method,
        "vessel": {k: getattr(cfg.params, k) for k in (
            "m11", "m22", "m33", "chi_u1", "chi_u2", "chi_u3",
            "chi_v1", "chi_v2", "chi_v3", "chi_r1", "chi_r2", "chi_r3",
            "b_u", "b_r", "eps_r", "d_uM", "d_vM", "d_rM")},
        "gains": {k: getattr(cfg.gains, k) for k in (
            "k_psi", "k_u", "k_r", "gamma_psi", "gamma_u", "gamma_r",
            "eps_ul", "eps_rl", "sigma")},
        "emo": {"c_u": cfg.emo.c_u, "c_psi": cfg.emo.c_psi, "u_m": cfg.emo.u_m},
        "cbf": {"delta": cfg.cbf.delta, "alpha_kind": cfg.cbf.alpha_kind,
                "alpha_gain": cfg.cbf.alpha_gain},
        "method1": {"v_M": cfg.method1.v_M, "a_p": cfg.method1.a_p,
                    "a_u": cfg.method1.a_u},
        "initial": {"x": cfg.eta0[0], "y": cfg.eta0[1],
                    "psi_deg": math.degrees(cfg.eta0[2]),
                    "u": cfg.nu0[0], "v": cfg.nu0[1], "r": cfg.nu0[2]},
        "reference": {
            "x0": cfg.reference.x0, "y0": cfg.reference.y0,
            "psi0_deg": math.degrees(cfg.reference.psi0),
            "segments": [{
                "t_start": s.t_start, "t_end": s.t_end, "u_ld": s.u_ld,
                "kind": s.kind, "rate": s.rate,
            } for s in cfg.reference.segments],
        },
        "delta_u": cfg.delta_u,
        "disturbances_on": cfg.disturbances_on,
        "derivative_mode": cfg.derivative_mode,
        "control_period": cfg.control_period,
    }


def build_manifest(cfg: ScenarioConfig, out_dir: str, doc: Optional[dict] = None) -> dict:
    """Manifest for one run: complete config snapshot plus validation report.

    The snapshot alone is enough to reproduce the run bit for bit; the
    original merged document is preferred when available so that a
    round trip through the manifest stays byte-stable.
    """
    return {
        "scenario": cfg.scenario,
        "seed": cfg.seed,
        "outputs": {
            "trace": os.path.join(out_dir, "trace.csv"),
            "metrics": os.path.join(out_dir, "metrics.json"),
        },
        "validation": validation_report(cfg),
        "config": doc if doc is not None else config_to_document(cfg),
    }


def write_trace_csv(trace: SimTrace, path: str) -> None:
    """Write a trace as CSV: header row, full-precision decimal text."""
    data = trace.data
    n = len(trace)
    with open(path, "w") as fh:
        fh.write(",".join(TRACE_COLUMNS) + "\n")
        flags = data["event_flags"].astype(int)
        for i in range(n):
            fields = [repr(float(data[name][i])) for name in TRACE_COLUMNS[:-1]]
            fields.append(str(int(flags[i])))
            fh.write(",".join(fields) + "\n")


def read_trace_csv(path: str) -> SimTrace:
    """Read a trace CSV back into arrays keyed by column name."""
    with open(path, "r") as fh:
        header = fh.readline().strip().split(",")
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if raw.shape[1] != len(header):
        raise ValueError(f"{path}: column count mismatch")
    return SimTrace({name: raw[:, i] for i, name in enumerate(header)})
