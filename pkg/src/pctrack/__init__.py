"""Trajectory tracking for underactuated surface vessels in polar error coordinates.

A simulation engine and control library built around two polar coordinate
transformations, an exponentially contracting modification of the tracking
reference, a backstepping control law with smooth disturbance domination,
and two surge-speed positivity safeguards (a relaxed feasibility condition
and a barrier-based input filter).
"""

from .cbf import (CbfConfig, Method1Config, cbf_margin_trace,
                  cbf_min_surge_force, filter_qp, method1_threshold)
from .config import (ParseError, ValidationError, default_config, load_config,
                     parse_config, preset, read_trace_csv, validation_report,
                     write_trace_csv)
from .controller import (ControllerGains, ControllerState, GainSingular,
                         LyapunovDiag, TrackingErrors, control_law,
                         fixed_point_sigma, lyapunov_diag, make_tracking_errors,
                         sinc_half, smooth_bound_fn, stabilizing_yaw_rate)
from .emo import (EmoOutput, EmoParams, check_gain_condition,
                  contraction_margin, emo_modify, kappa_constant, solve_kappa)
from .engine import (ScenarioConfig, SimTrace, metrics, rk4_step, run_scenario,
                     surge_guard)
from .reference import (OutOfRange, ReferenceSample, ReferenceSpec, Segment,
                        standard_reference)
from .transforms import (BodyPolar, ErrorPolar, ReducedModel, SingularSideslip,
                         body_polar, error_polar, error_polar_rate,
                         reduced_model, wrap_angle)
from .vessel import (ControlInput, Disturbance, StateDerivative, VesselParams,
                     VesselState, eval_nominal_accel, sample_disturbance,
                     state_derivative)

__version__ = "0.1.0"
