"""Command-line front end: scenario runs, batch presets, trace comparison.

Exit codes: 0 clean completion, 2 configuration/validation problem,
3 runtime singularity guard trip, 4 I/O problem.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import config as cfgmod
from .controller import GainSingular
from .engine import metrics, run_scenario
from .transforms import SingularSideslip

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_GUARD = 3
EXIT_IO = 4

COMPARE_SIGNALS = ("x", "y", "psi", "u", "v", "r", "p_e", "psi_le",
                   "u_le", "e_rl", "tau_u", "tau_r")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pctrack",
        description="Trajectory-tracking simulations for an underactuated "
                    "surface vessel in polar error coordinates.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and write its artifacts")
    src = run.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=cfgmod.PRESETS,
                     help="named scenario (default: built-in nominal defaults)")
    src.add_argument("--config", help="path to a JSON config or manifest file")
    run.add_argument("--method", choices=["1", "2", "none"],
                     help="surge-positivity mechanism override")
    run.add_argument("--seed", type=int, help="random seed override")
    run.add_argument("--dt", type=float, help="integration step override [s]")
    run.add_argument("--t-final", type=float, help="run length override [s]")
    run.add_argument("--out", help="output directory (default runs/<name>)")

    cmp_p = sub.add_parser("compare", help="compare two run directories")
    cmp_p.add_argument("run_a")
    cmp_p.add_argument("run_b")
    return parser


class GridMismatch(Exception):
    """Compared traces do not share the time grid."""


def _load_document(args) -> dict:
    if args.preset:
        return cfgmod.preset(args.preset)
    if args.config:
        with open(args.config, "r") as fh:
            text = fh.read()
        try:
            doc = json.loads(text) if text.strip() else {}
        except json.JSONDecodeError as exc:
            raise cfgmod.ParseError(f"{args.config}: {exc}") from exc
        if not isinstance(doc, dict):
            raise cfgmod.ParseError("config document must be a JSON object")
        if "config" in doc and isinstance(doc["config"], dict):
            doc = doc["config"]
        return doc
    return {}


def _apply_overrides(doc: dict, args) -> dict:
    if args.method is not None:
        doc["method"] = args.method
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.dt is not None:
        doc["dt"] = args.dt
    if args.t_final is not None:
        doc["t_final"] = args.t_final
    return doc


def _cmd_run(args) -> int:
    doc = _apply_overrides(_load_document(args), args)
    cfg = cfgmod.parse_config(doc)

    name = cfg.scenario if cfg.scenario != "custom" else "run"
    out_dir = args.out or os.path.join("runs", f"{name}-m{cfg.method}-s{cfg.seed}")
    os.makedirs(out_dir, exist_ok=True)

    merged = cfgmod._deep_merge(cfgmod.default_config(), doc)
    manifest = cfgmod.build_manifest(cfg, out_dir, doc=merged)
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
    for warning in manifest["validation"]["warnings"]:
        print(f"warning: {warning}", file=sys.stderr)

    try:
        trace = run_scenario(cfg)
    except (SingularSideslip, GainSingular) as exc:
        partial = getattr(exc, "trace", None)
        if partial is not None and len(partial) > 0:
            cfgmod.write_trace_csv(partial, os.path.join(out_dir, "trace.csv"))
        print(f"error: {type(exc).__name__} at step {exc.step_index} "
              f"(t = {exc.t_failed:.3f} s): {exc}", file=sys.stderr)
        return EXIT_GUARD

    cfgmod.write_trace_csv(trace, os.path.join(out_dir, "trace.csv"))
    summary = metrics(trace)
    with open(os.path.join(out_dir, "metrics.json"), "w") as fh:
        json.dump(summary, fh, indent=2)

    print(f"{cfg.scenario}: method {cfg.method}, seed {cfg.seed}, "
          f"{len(trace)} rows -> {out_dir}")
    print(f"  settled p_e max = {summary['settled']['p_e_max']:.4g} m, "
          f"tracked = {summary['tracked']}, min h = {summary['min_h']:.4g}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    a = cfgmod.read_trace_csv(os.path.join(args.run_a, "trace.csv"))
    b = cfgmod.read_trace_csv(os.path.join(args.run_b, "trace.csv"))
    if len(a) != len(b) or not np.array_equal(a.t, b.t):
        raise GridMismatch("traces do not share the same time grid")

    print(f"{'signal':>8} {'rms delta':>14} {'max delta':>14}")
    table = {}
    for name in COMPARE_SIGNALS:
        delta = a.data[name] - b.data[name]
        rms = float(np.sqrt(np.mean(delta ** 2)))
        mx = float(np.abs(delta).max())
        table[name] = {"rms": rms, "max": mx}
        print(f"{name:>8} {rms:>14.6g} {mx:>14.6g}")

    pos_rms = float(np.sqrt(np.mean((a.data["x"] - b.data["x"]) ** 2
                                    + (a.data["y"] - b.data["y"]) ** 2)))
    trapezoid = getattr(np, "trapezoid", np.trapz)
    efforts = {}
    for label, tr in (("a", a), ("b", b)):
        efforts[label] = float(trapezoid(np.hypot(tr.data["tau_u"], tr.data["tau_r"]),
                                         tr.t))
    print(f"position rms delta: {pos_rms:.6g} m")
    print(f"control effort integral: a = {efforts['a']:.6g}, b = {efforts['b']:.6g}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_compare(args)
    except (cfgmod.ParseError, cfgmod.ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except GridMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
