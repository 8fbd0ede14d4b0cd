import math

import numpy as np
import pytest

from helpers import degenerate_law, make_reduced, make_ref
from oracles import central_difference
from pctrack.controller import (ControllerGains, ControllerState, GainSingular,
                                control_law, fixed_point_sigma, lyapunov_diag,
                                make_tracking_errors, sinc_half, sinc_half_prime,
                                smooth_bound_fn, stabilizing_yaw_rate)
from pctrack.emo import EmoParams, emo_modify
from pctrack.transforms import ErrorPolar, error_polar_rate, wrap_angle
from pctrack.vessel import VesselParams


class TestSmoothBound:
    def test_zero_at_zero(self):
        assert smooth_bound_fn(0.0, 1.0, 1.0) == 0.0

    def test_saturation(self):
        assert smooth_bound_fn(1e6, 1.0, 1.0) == pytest.approx(1.0)
        assert smooth_bound_fn(-1e6, 1.0, 1.0) == pytest.approx(-1.0)

    def test_odd(self):
        for z in (0.1, 0.7, 3.0, 42.0):
            assert smooth_bound_fn(-z, 1.0, 1.0) == -smooth_bound_fn(z, 1.0, 1.0)

    @pytest.mark.parametrize("sigma", [1.0, None])
    def test_absolute_value_bound_on_dense_grid(self, sigma):
        # |z| <= z*phi(z) + eps over a dense grid, for the default shape
        # parameter and for the fixed-point one
        if sigma is None:
            sigma = fixed_point_sigma()
        eps = 1.0
        grid = np.linspace(-100.0, 100.0, 2_000_001)
        phi = np.tanh(sigma * grid / eps)
        slack = np.abs(grid) - grid * phi
        assert slack.max() <= eps + 1e-9

    def test_fixed_point_sigma(self):
        s = fixed_point_sigma()
        assert s == pytest.approx(math.exp(-(s + 1.0)), abs=1e-12)
        assert s == pytest.approx(0.2785, abs=1e-4)

    def test_domination_slack_bound(self):
        # the disturbance contribution to the Lyapunov rate, minus what the
        # domination term cancels, never exceeds the configured slack
        gains = ControllerGains()
        d_ulM = math.hypot(VesselParams().d_uM, VesselParams().d_vM)
        for u_le in np.linspace(-5.0, 5.0, 20001):
            zeta = gains.gamma_u * u_le * d_ulM
            worst = abs(zeta)  # adversarial disturbance at the bound
            cancelled = zeta * smooth_bound_fn(zeta, gains.sigma, gains.eps_ul)
            assert worst - cancelled <= gains.eps_ul + 1e-9


class TestSincHalf:
    def test_removable_singularity(self):
        assert sinc_half(0.0) == 1.0

    def test_at_pi(self):
        assert sinc_half(math.pi) == pytest.approx(2.0 / math.pi)

    def test_tiny_argument_taylor(self):
        assert abs(sinc_half(1e-8) - 1.0) < 1e-15

    def test_branches_agree_at_crossover(self):
        lo, hi = 0.999e-6, 1.001e-6
        assert sinc_half(lo) == pytest.approx(sinc_half(hi), abs=1e-15)

    def test_derivative_matches_finite_difference(self):
        for x in (-2.0, -0.5, -1e-5, 1e-7, 0.3, 2.5):
            fd = central_difference(sinc_half, x, h=1e-6)
            assert sinc_half_prime(x) == pytest.approx(fd, abs=1e-8)


class TestStabilizingYawRate:
    def setup_method(self):
        self.gains = ControllerGains()

    def errs(self, p_e=0.0, psi_le=0.0, a_psi=0.0, u_le=0.0):
        from pctrack.controller import TrackingErrors
        return TrackingErrors(p_e=p_e, psi_le=psi_le, u_le=u_le, e_rl=0.0, a_psi=a_psi)

    def test_pure_feedforward(self):
        assert stabilizing_yaw_rate(self.errs(), 5.0, 0.33, self.gains) == 0.33

    def test_zero_range_feedback_form(self):
        a = stabilizing_yaw_rate(self.errs(psi_le=0.2), 5.0, 0.1, self.gains)
        assert a == pytest.approx(0.1 + 40.0 * 0.2 / 120.0)

    def test_range_coupling_term(self):
        # psi_le = 0, p_e = 1, u_l = 2, a_psi = pi/2: coupling is -2/120
        a = stabilizing_yaw_rate(self.errs(p_e=1.0, a_psi=math.pi / 2), 2.0,
                                 0.7, self.gains)
        assert a == pytest.approx(0.7 - 2.0 / 120.0)

    def test_smooth_in_heading_error_across_zero(self):
        def alpha_of(psi_le):
            return stabilizing_yaw_rate(
                self.errs(p_e=3.0, psi_le=psi_le, a_psi=0.4), 5.0, 0.0, self.gains)

        left = central_difference(alpha_of, -1e-4)
        right = central_difference(alpha_of, 1e-4)
        assert left == pytest.approx(right, abs=1e-6)


class TestTrackingErrors:
    def test_wrapping(self):
        params = VesselParams()
        reduced = make_reduced(params, psi_l=3.0)
        emo = emo_modify(10.0, -3.0, ErrorPolar(1.0, 0.5), EmoParams())
        errs = make_tracking_errors(ErrorPolar(1.0, 0.5), emo, reduced)
        assert -math.pi < errs.psi_le <= math.pi
        assert -math.pi < errs.a_psi <= math.pi

    def test_branch_consistent_half_angle(self):
        # the cosine-difference identity must hold with the wrapped pair
        params = VesselParams()
        for psi_l, psi_ld_m, psi_b in [(3.0, -3.1, 0.4), (-2.9, 3.0, -1.0),
                                       (0.3, 0.9, 2.0)]:
            reduced = make_reduced(params, psi_l=psi_l)
            from pctrack.emo import EmoOutput
            emo = EmoOutput(u_ld_m=10.0, psi_ld_m=psi_ld_m, varphi=0.0, c=0.2)
            errs = make_tracking_errors(ErrorPolar(1.0, psi_b), emo, reduced)
            lhs = math.cos(psi_ld_m - psi_b) - math.cos(psi_l - psi_b)
            rhs = -2.0 * math.sin(errs.a_psi) * math.sin(errs.psi_le / 2.0)
            assert lhs == pytest.approx(rhs, abs=1e-12)


class TestControlLaw:
    def setup_method(self):
        self.params = VesselParams()
        self.gains = ControllerGains()
        self.emo_p = EmoParams()

    def call(self, reduced, errs, emo, ref, err, rates=(0.0, 0.0),
             cstate=None, mode="backward", params=None, dt=0.01):
        return control_law(reduced, errs, emo, self.emo_p, ref, err, rates,
                           params or self.params, self.gains,
                           cstate or ControllerState(), dt, mode=mode)

    def perfect_tracking_inputs(self, params, f_ul=-0.4, f_rl=0.02):
        reduced = make_reduced(params, u_l=10.0, psi_a=0.2, psi_l=1.0,
                               r_l=0.0, f_ul=f_ul, f_rl=f_rl)
        err = ErrorPolar(0.0, 0.0)
        emo = emo_modify(10.0, 1.0, err, self.emo_p)
        errs = make_tracking_errors(err, emo, reduced)
        ref = make_ref(u_ld=10.0, psi_ld=1.0)
        return reduced, errs, emo, ref, err

    def test_perfect_tracking_is_feedback_linearization(self):
        # all errors zero, derivative estimates zero, disturbance bounds
        # zero: the law reduces to cancelling the nominal dynamics
        params = VesselParams(d_uM=0.0, d_vM=0.0, d_rM=0.0)
        reduced, errs, emo, ref, err = self.perfect_tracking_inputs(params)
        assert errs.psi_le == 0.0 and errs.u_le == 0.0
        out = self.call(reduced, errs, emo, ref, err, params=params)
        assert out.tau_star.tau_r == pytest.approx(-reduced.f_rl / params.b_r)
        assert out.tau_star.tau_u == pytest.approx(-reduced.f_ul / reduced.b_ul)

    def test_perfect_tracking_with_lift(self):
        params = VesselParams(eps_r=0.3, d_uM=0.0, d_vM=0.0, d_rM=0.0)
        reduced, errs, emo, ref, err = self.perfect_tracking_inputs(params)
        out = self.call(reduced, errs, emo, ref, err, params=params)
        tau_r = -reduced.f_rl / params.b_r
        assert out.tau_star.tau_r == pytest.approx(tau_r)
        assert out.tau_star.tau_u == pytest.approx(
            (-reduced.f_ul - reduced.eps_ra * tau_r) / reduced.b_ul)

    def test_yaw_channel_decoupled_when_minimum_phase(self):
        # with zero lift the yaw moment must not see the surge-channel
        # assembly (nominal surge dynamics, speed-error domination)
        err = ErrorPolar(2.0, 0.3)
        emo = emo_modify(10.0, 0.8, err, self.emo_p)
        ref = make_ref(u_ld=10.0, psi_ld=0.8)
        outs = []
        for f_ul, d_uM in [(-0.4, 2.0), (-1.5, 0.3)]:
            params = VesselParams(d_uM=d_uM)
            reduced = make_reduced(params, u_l=9.0, f_ul=f_ul)
            errs = make_tracking_errors(err, emo, reduced)
            outs.append(self.call(reduced, errs, emo, ref, err, params=params))
        assert outs[0].tau_star.tau_r == outs[1].tau_star.tau_r
        assert outs[0].tau_star.tau_u != outs[1].tau_star.tau_u

    def test_gain_singular_guard(self):
        reduced = make_reduced(self.params, psi_a=math.pi / 2 - 1e-5)
        err = ErrorPolar(1.0, 0.0)
        emo = emo_modify(10.0, 0.5, err, self.emo_p)
        errs = make_tracking_errors(err, emo, reduced)
        with pytest.raises(GainSingular):
            self.call(reduced, errs, emo, make_ref(), err)

    def test_memory_update(self):
        reduced, errs, emo, ref, err = self.perfect_tracking_inputs(self.params)
        out = self.call(reduced, errs, emo, ref, err)
        assert out.cstate.initialized
        assert out.cstate.prev_u_ld_m == emo.u_ld_m
        assert out.cstate.prev_alpha_rl == out.alpha_rl

    def test_backward_difference_feedforward(self):
        reduced, errs, emo, ref, err = self.perfect_tracking_inputs(self.params)
        prev = ControllerState(prev_alpha_rl=0.1, prev_u_ld_m=9.0,
                               prev_psi_a_dot=0.0, initialized=True)
        out = self.call(reduced, errs, emo, ref, err, cstate=prev, dt=0.5)
        assert out.u_ld_m_dot == pytest.approx((emo.u_ld_m - 9.0) / 0.5)
        assert out.alpha_rl_dot == pytest.approx((out.alpha_rl - 0.1) / 0.5)

    @pytest.mark.parametrize("mode", ["analytic", "backward"])
    def test_zero_range_equals_degenerate_law_exactly(self, mode):
        # at zero range the full law must coincide with the independently
        # coded degenerate form, bit for bit
        for psi_le_target, u_le_target, r_l in [(0.0, 0.0, 0.0),
                                                (0.35, -2.0, 0.1),
                                                (-1.2, 4.0, -0.3)]:
            err = ErrorPolar(0.0, 0.0)
            psi_ld = 0.9
            reduced = make_reduced(self.params, u_l=10.0 - u_le_target,
                                   psi_l=psi_ld - psi_le_target, r_l=r_l,
                                   f_ul=-0.7, f_rl=0.05)
            emo = emo_modify(10.0, psi_ld, err, self.emo_p)
            errs = make_tracking_errors(err, emo, reduced)
            assert errs.psi_le == pytest.approx(psi_le_target)
            ref = make_ref(u_ld=10.0, psi_ld=psi_ld, psi_ld_dot=0.04,
                           u_ld_dot=0.3, psi_ld_ddot=-0.02)
            out = self.call(reduced, errs, emo, ref, err, mode=mode)
            tau_u, tau_r = degenerate_law(reduced, errs, ref, self.params,
                                          self.gains, mode=mode)
            assert out.tau_star.tau_u == tau_u
            assert out.tau_star.tau_r == tau_r

    @pytest.mark.parametrize("mode", ["analytic", "backward"])
    def test_continuity_toward_zero_range(self, mode):
        # approach zero range on the converged manifold (velocity matched
        # to the modified reference) from every azimuth direction; the law
        # must approach the degenerate form, measured in acceleration units
        u_ld, psi_ld, psi_ld_dot = 10.0, 0.9, 0.04
        psi_a, r_l = 0.2, 0.05
        target = (3.0, -2.0)
        target_vel = (u_ld * math.cos(psi_ld), u_ld * math.sin(psi_ld))
        ref = make_ref(u_ld=u_ld, psi_ld=psi_ld, psi_ld_dot=psi_ld_dot,
                       u_ld_dot=0.1, psi_ld_ddot=0.01)

        err0 = ErrorPolar(0.0, 0.0)
        reduced0 = make_reduced(self.params, u_l=u_ld, psi_a=psi_a,
                                psi_l=psi_ld, r_l=r_l, f_ul=-0.7, f_rl=0.05)
        emo0 = emo_modify(u_ld, psi_ld, err0, self.emo_p)
        errs0 = make_tracking_errors(err0, emo0, reduced0)
        out0 = self.call(reduced0, errs0, emo0, ref, err0, mode=mode)
        base = (reduced0.b_ul * out0.tau_star.tau_u,
                self.params.b_r * out0.tau_star.tau_r)

        for psi_b in np.linspace(-math.pi, math.pi, 9):
            for p_e in (1e-7, 1e-9, 1e-11):
                err = ErrorPolar(p_e, psi_b)
                emo = emo_modify(u_ld, psi_ld, err, self.emo_p)
                reduced = make_reduced(self.params, u_l=emo.u_ld_m, psi_a=psi_a,
                                       psi_l=wrap_angle(emo.psi_ld_m), r_l=r_l,
                                       f_ul=-0.7, f_rl=0.05)
                errs = make_tracking_errors(err, emo, reduced)
                vessel_vel = (reduced.u_l * math.cos(reduced.psi_l),
                              reduced.u_l * math.sin(reduced.psi_l))
                rates = error_polar_rate(err, target_vel, vessel_vel)
                out = self.call(reduced, errs, emo, ref, err, rates=rates, mode=mode)
                accel = (reduced.b_ul * out.tau_star.tau_u,
                         self.params.b_r * out.tau_star.tau_r)
                assert accel[0] == pytest.approx(base[0], abs=1e-6)
                assert accel[1] == pytest.approx(base[1], abs=1e-6)

    def test_analytic_mode_requires_minimum_phase(self):
        params = VesselParams(eps_r=0.2)
        reduced, errs, emo, ref, err = self.perfect_tracking_inputs(params)
        with pytest.raises(ValueError):
            self.call(reduced, errs, emo, ref, err, mode="analytic", params=params)

    def test_analytic_feedforward_matches_backward_difference_limit(self):
        # drive the same synthetic motion twice; the backward difference
        # over a shrinking step approaches the analytic derivative
        u_ld, psi_ld0, psi_ld_dot = 10.0, 0.9, 0.04
        target0 = (3.0, -2.0)
        target_vel = (u_ld * math.cos(psi_ld0), u_ld * math.sin(psi_ld0))
        vessel0 = (target0[0] - 6.0 * math.cos(0.4),
                   target0[1] - 6.0 * math.sin(0.4))
        psi_l, u_l = 0.7, 9.0
        vessel_vel = (u_l * math.cos(psi_l), u_l * math.sin(psi_l))

        def u_ld_m_at(dt_offset):
            tpos = (target0[0] + target_vel[0] * dt_offset,
                    target0[1] + target_vel[1] * dt_offset)
            vpos = (vessel0[0] + vessel_vel[0] * dt_offset,
                    vessel0[1] + vessel_vel[1] * dt_offset)
            from pctrack.transforms import error_polar
            err = error_polar(tpos, vpos)
            return emo_modify(u_ld, psi_ld0 + psi_ld_dot * dt_offset, err,
                              self.emo_p).u_ld_m

        from pctrack.transforms import error_polar
        err = error_polar(target0, vessel0)
        emo = emo_modify(u_ld, psi_ld0, err, self.emo_p)
        reduced = make_reduced(self.params, u_l=u_l, psi_a=0.1, psi_l=psi_l,
                               r_l=0.0, f_ul=-0.7, f_rl=0.05)
        errs = make_tracking_errors(err, emo, reduced)
        rates = error_polar_rate(err, target_vel, vessel_vel)
        ref = make_ref(u_ld=u_ld, psi_ld=psi_ld0, psi_ld_dot=psi_ld_dot)
        out = self.call(reduced, errs, emo, ref, err, rates=rates, mode="analytic")
        fd = central_difference(u_ld_m_at, 0.0, h=1e-6)
        assert out.u_ld_m_dot == pytest.approx(fd, abs=1e-7)


class TestLyapunovDiag:
    def setup_method(self):
        self.gains = ControllerGains()
        self.emo = emo_modify(10.0, 0.0, ErrorPolar(0.0, 0.0), EmoParams())

    def errs(self, p_e=0.0, psi_le=0.0, u_le=0.0, e_rl=0.0):
        from pctrack.controller import TrackingErrors
        return TrackingErrors(p_e=p_e, psi_le=psi_le, u_le=u_le, e_rl=e_rl, a_psi=0.0)

    def test_zero_errors(self):
        diag = lyapunov_diag(self.errs(), self.emo, self.gains)
        assert diag.V1 == 0.0 and diag.V2 == 0.0

    def test_range_only(self):
        diag = lyapunov_diag(self.errs(p_e=1.0), self.emo, self.gains)
        assert diag.V2 == pytest.approx(0.5)

    def test_weighted_sum(self):
        diag = lyapunov_diag(self.errs(p_e=1.0, psi_le=0.1, u_le=0.2, e_rl=0.3),
                             self.emo, self.gains)
        V1 = 0.5 * (1.0 + 120.0 * 0.01)
        assert diag.V1 == pytest.approx(V1)
        assert diag.V2 == pytest.approx(V1 + 0.5 * (60.0 * 0.04 + 1.0 * 0.09))

    def test_decay_rate_is_binding_minimum(self):
        diag = lyapunov_diag(self.errs(), self.emo, self.gains)
        expected = min(2 * self.emo.c, 2 * 40 / 120, 2 * 800 / 60, 2 * 100 / 1)
        assert diag.lam == pytest.approx(expected)

    def test_envelope_at_start_equals_initial_value(self):
        diag = lyapunov_diag(self.errs(p_e=2.0), self.emo, self.gains, t=0.0,
                             V2_0=None)
        assert diag.envelope == pytest.approx(diag.V2)

    def test_envelope_decays_to_floor(self):
        diag = lyapunov_diag(self.errs(), self.emo, self.gains, t=1e9, V2_0=100.0)
        floor = self.gains.eps_total / diag.lam
        assert diag.envelope == pytest.approx(floor)
