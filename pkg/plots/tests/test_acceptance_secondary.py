"""Secondary acceptance: render every figure kind from real preset runs.

The preset traces are produced through the simulator's public command
line, which is the only interface this package depends on.
"""

import subprocess
import sys

import pytest

from traceplots.cli import main as cli_main

RUNS = [
    ("fig2-nominal", "1"),
    ("fig2-nominal", "2"),
    ("fig5-slow", "1"),
    ("fig5-slow", "2"),
]


@pytest.fixture(scope="session")
def preset_traces(tmp_path_factory):
    root = tmp_path_factory.mktemp("runs")
    traces = {}
    for name, method in RUNS:
        out = root / f"{name}-m{method}"
        cmd = [sys.executable, "-m", "pctrack.cli", "run",
               "--preset", name, "--method", method, "--seed", "7",
               "--out", str(out)]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        traces[(name, method)] = str(out / "trace.csv")
    return traces


def figure_jobs(traces):
    return {
        "trajectory": [traces[("fig2-nominal", "1")], traces[("fig2-nominal", "2")]],
        "errors": [traces[("fig2-nominal", "1")]],
        "efforts": [traces[("fig2-nominal", "1")], traces[("fig2-nominal", "2")]],
        "comparison": [traces[("fig5-slow", "1")], traces[("fig5-slow", "2")]],
    }


def test_secondary_all_kinds_render_deterministically(preset_traces, tmp_path):
    for kind, inputs in figure_jobs(preset_traces).items():
        out_a = tmp_path / f"{kind}-a.png"
        out_b = tmp_path / f"{kind}-b.png"
        assert cli_main(["--kind", kind, "--in", *inputs, "--out", str(out_a)]) == 0
        assert cli_main(["--kind", kind, "--in", *inputs, "--out", str(out_b)]) == 0
        assert out_a.stat().st_size > 1000
        assert out_a.read_bytes() == out_b.read_bytes(), kind
    print("PASS secondary: trajectory/errors/efforts/comparison rendered "
          "identically across repeat invocations")
