"""Control synthesis, breakdown, clipping, singularities, and ramp schedules."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cohtrack.bloch import BlochChannel, CoherenceVector, GKSMatrix, gks_to_channel
from cohtrack.dynamics import propagate_bloch
from cohtrack.errors import (
    DomainError,
    PastBreakdownError,
    ScheduleInfeasibleError,
    SingularPointError,
)
from cohtrack.tracking import (
    TrackingSolution,
    breakdown_time,
    classify_singularity,
    clip_time,
    coherence_ramp_schedule,
    detect_breakdown,
    omega_magnitude_sq,
    simulate_tracked,
    tracked_waveform,
    tracking_fields_dephasing,
    tracking_fields_general,
    tracking_rhs,
    vz_tracked,
)
from cohtrack.waveform import ControlWaveform

GAMMA = 0.1
OMEGA0 = 4.0
V0 = CoherenceVector(math.sqrt(0.15), math.sqrt(0.15), math.sqrt(0.5))
T_B = 25.0 / 3.0
DEPHASING = BlochChannel.dephasing(GAMMA)


class TestBreakdownTime:
    def test_reference_value(self):
        assert abs(breakdown_time(V0, GAMMA) - T_B) <= 1e-12

    def test_infinite_when_no_dephasing_or_no_coherence(self):
        assert breakdown_time(V0, 0.0) == math.inf
        pole = CoherenceVector(0.0, 0.0, 0.9)
        assert breakdown_time(pole, GAMMA) == math.inf

    def test_zero_on_equator(self):
        eq = CoherenceVector(0.5, 0.5, 0.0)
        assert breakdown_time(eq, GAMMA) == 0.0

    def test_negative_rate_rejected(self):
        with pytest.raises(DomainError):
            breakdown_time(V0, -0.1)

    def test_sign_symmetric_in_vz(self):
        down = CoherenceVector(V0.vx, V0.vy, -V0.vz)
        assert breakdown_time(down, GAMMA) == breakdown_time(V0, GAMMA)


class TestTrackedSolution:
    def test_vz_closed_form(self):
        for t in np.linspace(0.0, T_B, 20):
            expected = math.sqrt(max(0.0, 0.5 - 0.06 * float(t)))
            assert abs(vz_tracked(V0, GAMMA, float(t)) - expected) <= 1e-12

    def test_vz_negative_branch(self):
        down = CoherenceVector(V0.vx, V0.vy, -V0.vz)
        assert vz_tracked(down, GAMMA, 1.0) < 0

    def test_vz_past_breakdown_rejected(self):
        with pytest.raises(PastBreakdownError):
            vz_tracked(V0, GAMMA, T_B + 0.1)

    def test_solution_object_consistency(self):
        sol = TrackingSolution(V0, GAMMA, OMEGA0)
        assert sol.sign == 1
        assert abs(sol.t_b - T_B) <= 1e-12
        assert sol.vz(2.0) == vz_tracked(V0, GAMMA, 2.0)
        assert sol.fields(2.0) == tracking_fields_dephasing(V0, GAMMA, OMEGA0, 2.0)

    def test_equator_start_rejected_with_diagnostic(self):
        eq = CoherenceVector(0.5, 0.5, 0.0)
        with pytest.raises(DomainError, match="no control is possible"):
            TrackingSolution(eq, GAMMA, OMEGA0)


class TestFieldSynthesis:
    def test_initial_values(self):
        w1, w2 = tracking_fields_dephasing(V0, GAMMA, OMEGA0, 0.0)
        assert abs(w1 - 3.9 * math.sqrt(0.3)) <= 1e-12
        assert abs(w2 + 4.1 * math.sqrt(0.3)) <= 1e-12

    def test_fields_diverge_toward_breakdown(self):
        w1_a, _ = tracking_fields_dephasing(V0, GAMMA, OMEGA0, 0.9 * T_B)
        w1_b, _ = tracking_fields_dephasing(V0, GAMMA, OMEGA0, 0.999 * T_B)
        assert abs(w1_b) > 9 * abs(w1_a)   # (t_b - t)^(-1/2) growth

    def test_guard_refuses_times_at_breakdown(self):
        with pytest.raises(PastBreakdownError):
            tracking_fields_dephasing(V0, GAMMA, OMEGA0, T_B * (1 - 1e-7))

    def test_magnitude_identity(self):
        for t in np.linspace(0.0, 0.95 * T_B, 25):
            w1, w2 = tracking_fields_dephasing(V0, GAMMA, OMEGA0, float(t))
            closed = omega_magnitude_sq(V0, GAMMA, OMEGA0, float(t))
            assert abs(closed - (OMEGA0**2 + w1**2 + w2**2)) <= 1e-12

    def test_magnitude_reference_value(self):
        assert abs(omega_magnitude_sq(V0, GAMMA, OMEGA0, 0.0) - 25.606) <= 1e-9

    @given(st.floats(0.05, 0.6), st.floats(-0.6, 0.6), st.floats(-0.6, 0.6),
           st.floats(0.0, 0.5), st.floats(-4.0, 4.0))
    @settings(max_examples=100)
    def test_general_formula_reduces_to_dephasing(self, vz, vx, vy, gamma, omega0):
        # Denominators are 2 v_y v_z and 2 v_x v_z: keep all three components
        # bounded away from the genuinely singular states.
        if abs(vx) < 1e-2 or abs(vy) < 1e-2 or vx**2 + vy**2 + vz**2 > 1.0:
            return
        v = CoherenceVector(vx, vy, vz)
        ch = BlochChannel.dephasing(gamma)
        got1, got2 = tracking_fields_general(ch, v, omega0)
        # Closed form evaluated at t = 0 with v as the initial state.
        want1 = (omega0 * vx - gamma * vy) / vz
        want2 = (-gamma * vx - omega0 * vy) / vz
        scale = max(1.0, abs(want1), abs(want2))
        assert abs(got1 - want1) <= 1e-10 * scale
        assert abs(got2 - want2) <= 1e-10 * scale

    def test_general_formula_singular_state_raises_with_report(self):
        eq = CoherenceVector(0.5, 0.5, 0.0)
        with pytest.raises(SingularPointError) as exc:
            tracking_fields_general(DEPHASING, eq, OMEGA0)
        report = exc.value.report
        assert report is not None
        assert report.classification in ("nontrivial-a", "nontrivial-b")

    def test_tracking_rhs_matches_closed_form_rate(self):
        # dv_z/dt = -gamma c / v_z for pure dephasing.
        got = tracking_rhs(DEPHASING, V0)
        want = -GAMMA * 0.3 / V0.vz
        assert abs(got - want) <= 1e-12

    def test_tracking_rhs_rejects_singular_vz(self):
        with pytest.raises(SingularPointError):
            tracking_rhs(DEPHASING, CoherenceVector(0.5, 0.5, 0.0))


class TestSimulateTracked:
    def test_holds_in_plane_components(self):
        traj = simulate_tracked(DEPHASING, V0, OMEGA0, t_max=10.0, n_samples=501)
        mask = traj.t <= 0.99 * T_B
        assert np.max(np.abs(traj.v[mask, 0] - V0.vx)) <= 1e-6
        assert np.max(np.abs(traj.v[mask, 1] - V0.vy)) <= 1e-6
        assert traj.termination.kind == "breakdown"
        assert abs(traj.termination.time - T_B) <= 1e-9

    def test_horizon_before_breakdown(self):
        traj = simulate_tracked(DEPHASING, V0, OMEGA0, t_max=2.0)
        assert traj.termination.kind == "horizon"
        assert traj.t[-1] == 2.0

    def test_gamma_zero_runs_to_horizon(self):
        ch = BlochChannel.dephasing(0.0)
        traj = simulate_tracked(ch, V0, OMEGA0, t_max=5.0)
        assert traj.termination.kind == "horizon"
        assert np.max(np.abs(traj.c - traj.c[0])) <= 1e-8

    def test_equator_start_rejected(self):
        eq = CoherenceVector(0.5, 0.5, 0.0)
        with pytest.raises(DomainError, match="no control is possible"):
            simulate_tracked(DEPHASING, eq, OMEGA0, t_max=1.0)

    def test_general_channel_uses_state_feedback(self):
        # A slightly anisotropic unital channel is not pure-dephasing form,
        # but near-dephasing states should still be tracked accurately.
        a = GKSMatrix(np.diag([0.001, 0.0, GAMMA / 2.0]).astype(complex))
        _, ch = gks_to_channel(a)
        traj = simulate_tracked(ch, V0, OMEGA0, t_max=2.0, n_samples=101)
        assert traj.termination.kind == "horizon"
        assert np.max(np.abs(traj.v[:, 0] - V0.vx)) <= 1e-6
        assert np.max(np.abs(traj.v[:, 1] - V0.vy)) <= 1e-6

    def test_detect_breakdown_matches_closed_form(self):
        detected = detect_breakdown(DEPHASING, V0, OMEGA0, t_cap=12.0)
        assert abs(detected - T_B) / T_B <= 0.01


class TestClipping:
    def test_clip_time_closed_form(self):
        omega_max = 5.0
        t_clip = clip_time(V0, GAMMA, OMEGA0, omega_max)
        # The first field to reach the level defines the clip time.
        w1, w2 = tracking_fields_dephasing(V0, GAMMA, OMEGA0, t_clip)
        assert math.isclose(max(abs(w1), abs(w2)), omega_max, rel_tol=1e-9)

    def test_clip_never_reached_for_large_level(self):
        assert clip_time(V0, 0.0, 1.0, 1e6) == math.inf

    def test_clipped_run_terminates_with_clip_metadata(self):
        omega_max = 5.0
        t_clip = clip_time(V0, GAMMA, OMEGA0, omega_max)
        traj = simulate_tracked(DEPHASING, V0, OMEGA0, t_max=10.0,
                                omega_max=omega_max)
        assert traj.termination.kind == "clipped"
        assert math.isclose(traj.termination.time, t_clip, rel_tol=1e-9)
        assert np.max(np.abs(traj.omega[:, 1:])) <= omega_max + 1e-12

    def test_clipped_fields_saturate(self):
        w = tracked_waveform(V0, GAMMA, OMEGA0, omega_max=3.0)
        late = w(0.9999 * T_B)
        assert abs(late[1]) == 3.0
        assert abs(late[2]) == 3.0

    def test_unclipped_horizon_before_clip(self):
        omega_max = 5.0
        t_clip = clip_time(V0, GAMMA, OMEGA0, omega_max)
        traj = simulate_tracked(DEPHASING, V0, OMEGA0, t_max=0.5 * t_clip,
                                omega_max=omega_max)
        assert traj.termination.kind == "horizon"


class TestSingularityClassification:
    def test_tracked_run_is_nontrivial_a_at_breakdown(self):
        traj = simulate_tracked(DEPHASING, V0, OMEGA0, t_max=10.0)
        report = classify_singularity(traj, DEPHASING)
        assert report.classification == "nontrivial-a"
        assert abs(report.t - T_B) <= 1e-9
        assert max(abs(report.n1), abs(report.n2)) > 1e-8

    def test_equator_free_run_is_trivial(self):
        eq = CoherenceVector(0.5, 0.5, 0.0)
        traj = propagate_bloch(DEPHASING, ControlWaveform.zero(), eq, 1.0,
                               n_samples=51)
        report = classify_singularity(traj, DEPHASING)
        assert report.classification == "trivial"
        assert report.t == 0.0
        assert report.note == "no control possible"

    def test_gamma_zero_has_no_singularity(self):
        ch = BlochChannel.dephasing(0.0)
        traj = simulate_tracked(ch, V0, OMEGA0, t_max=5.0)
        assert classify_singularity(traj, ch).classification == "none"

    def test_comment_line_format(self):
        traj = simulate_tracked(DEPHASING, V0, OMEGA0, t_max=10.0)
        line = classify_singularity(traj, DEPHASING).comment_line()
        assert line.startswith("# singularity=nontrivial-a t=")
        for tag in ("D1=", "D2=", "N1=", "N2="):
            assert tag in line


class TestRampSchedule:
    def test_single_segment_matches_plain_tracking(self):
        w = coherence_ramp_schedule(V0, GAMMA, [(0.0, 0.3)], omega0=OMEGA0)
        for t in (0.0, 1.0, 4.0):
            plain = tracking_fields_dephasing(V0, GAMMA, OMEGA0, t)
            stepped = w(t)
            assert abs(stepped[1] - plain[0]) <= 1e-12
            assert abs(stepped[2] - plain[1]) <= 1e-12

    def test_stepping_target_down_reduces_peak_fields(self):
        # Re-aiming to a lower coherence at 0.8 t_b keeps the fields finite
        # and below the single-objective peak over the same horizon.
        horizon = 0.95 * T_B
        stepped = coherence_ramp_schedule(V0, GAMMA,
                                          [(0.0, 0.3), (0.8 * T_B, 0.15)])
        single = coherence_ramp_schedule(V0, GAMMA, [(0.0, 0.3)])
        grid = np.linspace(0.0, horizon, 400)
        peak_stepped = max(np.max(np.abs(stepped(float(t)))) for t in grid)
        peak_single = max(np.max(np.abs(single(float(t)))) for t in grid)
        assert math.isfinite(peak_stepped)
        assert peak_stepped < peak_single

    def test_stepping_down_extends_lifetime(self):
        schedule = [(0.0, 0.3), (5.0, 0.1)]
        w = coherence_ramp_schedule(V0, GAMMA, schedule)
        assert w.t_end > breakdown_time(V0, GAMMA)

    def test_infeasible_segment_raises(self):
        with pytest.raises(ScheduleInfeasibleError) as exc:
            coherence_ramp_schedule(V0, GAMMA, [(0.0, 0.3), (9.0, 0.2)])
        assert exc.value.segment_index == 0

    def test_first_entry_must_match_initial_coherence(self):
        with pytest.raises(DomainError):
            coherence_ramp_schedule(V0, GAMMA, [(0.0, 0.25)])

    def test_targets_must_decrease(self):
        with pytest.raises(DomainError):
            coherence_ramp_schedule(V0, GAMMA, [(0.0, 0.3), (2.0, 0.35)])
