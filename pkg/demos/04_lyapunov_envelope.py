"""Noise-free validation of the exponential error envelope.

With the disturbance off and the analytic derivative mode enabled, the
total Lyapunov value must stay under its exponential envelope
floor + (V2(0) - floor)*exp(-lambda*t) at every step.
"""

from pctrack import parse_config, preset, run_scenario

doc = preset("fig2-nominal")
doc.update({
    "disturbances_on": False,
    "derivative_mode": "analytic",
    "dt": 1e-3,
    "t_final": 30.0,
})
trace = run_scenario(parse_config(doc))
d = trace.data

ratio = d["V2"] / d["envelope"]
print(f"max V2/envelope over the run: {ratio.max():.4f} (bound holds: {ratio.max() <= 1.05})")
print("\n   t [s]          V2      envelope   ratio")
for t_mark in (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 30.0):
    k = min(int(t_mark / 1e-3), len(trace) - 1)
    print(f"{d['t'][k]:8.1f} {d['V2'][k]:12.4f} {d['envelope'][k]:12.4f} "
          f"{ratio[k]:7.4f}")
