"""Contrast of the two surge-positivity mechanisms at low cruise speed.

At 1.3 m/s the relaxed-condition method still tracks even though its
sufficient feasibility threshold (about 1.49 m/s for the benchmark gains)
is violated, while the barrier filter forces the surge speed toward
delta + sqrt(d_uM) = 2.014 m/s and the vehicle can only weave around the
slower target.  The threshold itself and the validation warnings are
printed along the way.
"""

from pctrack import (ControllerGains, EmoParams, Method1Config, metrics,
                     method1_threshold, parse_config, preset, run_scenario,
                     validation_report)

rhs = method1_threshold(Method1Config(), EmoParams(u_m=1.4902), ControllerGains())
print(f"relaxed-condition feasibility threshold: u_m > {rhs:.4f} m/s")

for name in ("fig5-slow", "fig6-threshold"):
    print(f"\n== {name} ==")
    for method in ("1", "2"):
        doc = preset(name)
        doc["method"] = method
        doc["seed"] = 7
        cfg = parse_config(doc)
        report = validation_report(cfg)
        for warning in report["warnings"]:
            print(f"  (warning) {warning}")
        m = metrics(run_scenario(cfg))
        verdict = "tracks" if m["tracked"] else "fails to settle"
        print(f"  method {method}: settled p_e max = {m['settled']['p_e_max']:7.3f} m "
              f"-> {verdict};  effort = {m['effort']['norm_integral']:.3e}")
