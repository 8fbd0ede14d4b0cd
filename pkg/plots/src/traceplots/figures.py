"""The four figure kinds rendered from trace CSVs.

Every figure is deterministic: fixed size, fixed DPI, no timestamps or
software metadata in the output, so the same inputs produce identical
image bytes.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .reader import load_trace, require_columns

DPI = 120
_SAVE_KWARGS = {"dpi": DPI, "metadata": {"Software": None}}

TRAJECTORY_COLUMNS = ("x", "y", "x_d", "y_d")
ERRORS_COLUMNS = ("t", "p_e", "psi_le", "u_le", "e_rl", "V2", "envelope")
EFFORTS_COLUMNS = ("t", "tau_u", "tau_r")
COMPARISON_COLUMNS = ("t", "x", "y", "x_d", "y_d", "p_e")

FIGURE_KINDS = ("trajectory", "errors", "efforts", "comparison")


def _labels(paths):
    if len(paths) == 2:
        return ["method-1", "method-2"]
    return [os.path.splitext(os.path.basename(p))[0] for p in paths]


def render_trajectory(paths, out_path):
    """Planar path overlay: reference plus every run, equal axis scaling."""
    traces = [load_trace(p) for p in paths]
    for trace, path in zip(traces, paths):
        require_columns(trace, TRAJECTORY_COLUMNS, path)
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    ax.plot(traces[0]["y_d"], traces[0]["x_d"], "k--", linewidth=1.2,
            label="reference")
    for trace, label in zip(traces, _labels(paths)):
        ax.plot(trace["y"], trace["x"], linewidth=1.0, label=label)
    ax.set_xlabel("east [m]")
    ax.set_ylabel("north [m]")
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend(loc="best")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, **_SAVE_KWARGS)
    plt.close(fig)


def render_errors(paths, out_path):
    """Tracking errors over time plus the Lyapunov envelope check."""
    trace = load_trace(paths[0])
    require_columns(trace, ERRORS_COLUMNS, paths[0])
    fig, axes = plt.subplots(5, 1, figsize=(7.0, 9.0), sharex=True)
    t = trace["t"]
    for ax, name, unit in zip(axes[:4],
                              ("p_e", "psi_le", "u_le", "e_rl"),
                              ("[m]", "[rad]", "[m/s]", "[rad/s]")):
        ax.plot(t, trace[name], linewidth=0.8)
        ax.set_ylabel(f"{name} {unit}")
        ax.grid(True, alpha=0.3)
    axes[4].semilogy(t, trace["V2"], linewidth=0.8, label="V2")
    axes[4].semilogy(t, trace["envelope"], "k--", linewidth=1.0, label="envelope")
    axes[4].set_ylabel("V2")
    axes[4].set_xlabel("t [s]")
    axes[4].legend(loc="best")
    axes[4].grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, **_SAVE_KWARGS)
    plt.close(fig)


def render_efforts(paths, out_path):
    """Control inputs over time for one or more runs."""
    traces = [load_trace(p) for p in paths]
    for trace, path in zip(traces, paths):
        require_columns(trace, EFFORTS_COLUMNS, path)
    fig, axes = plt.subplots(2, 1, figsize=(7.0, 5.5), sharex=True)
    for trace, label in zip(traces, _labels(paths)):
        axes[0].plot(trace["t"], trace["tau_u"], linewidth=0.7, label=label)
        axes[1].plot(trace["t"], trace["tau_r"], linewidth=0.7, label=label)
    axes[0].set_ylabel("surge force [N]")
    axes[1].set_ylabel("yaw moment [N m]")
    axes[1].set_xlabel("t [s]")
    for ax in axes:
        ax.legend(loc="best")
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, **_SAVE_KWARGS)
    plt.close(fig)


def render_comparison(paths, out_path):
    """Side-by-side run comparison: planar paths and range errors."""
    traces = [load_trace(p) for p in paths]
    for trace, path in zip(traces, paths):
        require_columns(trace, COMPARISON_COLUMNS, path)
    fig, (ax_xy, ax_pe) = plt.subplots(1, 2, figsize=(11.0, 5.0))
    ax_xy.plot(traces[0]["y_d"], traces[0]["x_d"], "k--", linewidth=1.2,
               label="reference")
    for trace, label in zip(traces, _labels(paths)):
        ax_xy.plot(trace["y"], trace["x"], linewidth=1.0, label=label)
        ax_pe.plot(trace["t"], trace["p_e"], linewidth=0.9, label=label)
    ax_xy.set_xlabel("east [m]")
    ax_xy.set_ylabel("north [m]")
    ax_xy.set_aspect("equal", adjustable="datalim")
    ax_xy.legend(loc="best")
    ax_xy.grid(True, alpha=0.3)
    ax_pe.set_xlabel("t [s]")
    ax_pe.set_ylabel("p_e [m]")
    ax_pe.legend(loc="best")
    ax_pe.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, **_SAVE_KWARGS)
    plt.close(fig)


_RENDERERS = {
    "trajectory": render_trajectory,
    "errors": render_errors,
    "efforts": render_efforts,
    "comparison": render_comparison,
}


def render(kind: str, paths, out_path):
    """Render one figure kind from the given trace CSVs."""
    if kind not in _RENDERERS:
        raise ValueError(f"unknown figure kind {kind!r}; have {FIGURE_KINDS}")
    if not paths:
        raise ValueError("at least one input trace is required")
    _RENDERERS[kind](list(paths), out_path)
