import math

import numpy as np
import pytest

from tolsim.airframe import AircraftParams, FlightState, stall_speed
from tolsim.errors import ConfigError
from tolsim.guidance import (
    Maneuver,
    PhaseTag,
    PitchProfileParams,
    RampSpec,
    SpeedProfile,
    advance_phase,
    desired_pitch,
    landing_schedule,
    reference_speed,
    setpoint,
    takeoff_schedule,
)

PITCH_TO = PitchProfileParams(theta_lim=0.22, c=2.0, d=15.0)


def test_takeoff_schedule_values():
    s = takeoff_schedule(4.39)
    assert s.speeds == pytest.approx((0.0, 2.195, 4.829, 5.049, 5.268), abs=1e-3)


def test_landing_schedule_values():
    s = landing_schedule(4.39)
    assert s.speeds == pytest.approx((5.707, 4.829, 0.0), abs=1e-3)


def test_schedules_ordered_for_any_stall_speed():
    for vs in (0.1, 1.0, 4.39, 30.0):
        to = takeoff_schedule(vs).speeds
        assert all(b > a for a, b in zip(to, to[1:]))
        ld = landing_schedule(vs).speeds
        assert all(b < a for a, b in zip(ld, ld[1:]))


def test_touchdown_speed_equals_rotation_speed():
    vs = 4.39
    assert landing_schedule(vs).v_td == takeoff_schedule(vs).v_r


def test_unit_stall_speed_schedules():
    assert takeoff_schedule(1.0).speeds == pytest.approx((0.0, 0.5, 1.1, 1.15, 1.2), rel=1e-12)
    assert landing_schedule(1.0).speeds == pytest.approx((1.3, 1.1, 0.0), rel=1e-12)


def test_desired_pitch_peak_and_zero_amplitude():
    assert desired_pitch(2.0, PITCH_TO) == pytest.approx(0.22, rel=1e-15)
    flat = PitchProfileParams(theta_lim=0.0, c=2.0, d=15.0)
    for v in (0.0, 3.0, 10.0):
        assert desired_pitch(v, flat) == 0.0


def test_desired_pitch_reference_value():
    assert desired_pitch(4.39, PITCH_TO) == pytest.approx(0.21722506692084978, rel=1e-12)


def test_desired_pitch_bounded_by_limit():
    for v in np.linspace(-5, 20, 200):
        assert abs(desired_pitch(float(v), PITCH_TO)) <= 0.22
    # take-off profile stays below 15 deg
    assert 0.22 < math.radians(15)


def test_reference_speed_endpoints():
    sched = takeoff_schedule(4.39)
    ramp = RampSpec.default_takeoff()
    assert reference_speed(0.0, sched, ramp) == (0.0, 0.0)
    v, dv = reference_speed(12.0, sched, ramp)
    assert v == pytest.approx(sched.v2, rel=1e-12)
    assert dv == 0.0
    v, dv = reference_speed(100.0, sched, ramp)
    assert (v, dv) == (sched.v2, 0.0)


def test_reference_speed_cubic_midpoint():
    sched = takeoff_schedule(4.39)
    ramp = RampSpec((3.0, 3.0, 3.0, 3.0))
    v, dv = reference_speed(1.5, sched, ramp)
    assert v == pytest.approx(sched.v1 / 2, rel=1e-12)
    assert dv == pytest.approx(1.5 * sched.v1 / 3.0, rel=1e-12)


def test_reference_speed_c1_at_segment_boundaries():
    prof = SpeedProfile(takeoff_schedule(4.39), RampSpec.default_takeoff())
    for t_b in prof.seg_end:
        # analytic one-sided slopes: end of one ease, start of the next
        _, dv_left, _ = prof.speed(math.nextafter(t_b, -math.inf))
        _, dv_right, _ = prof.speed(t_b)
        assert abs(dv_left - dv_right) < 1e-9


def test_ramp_validation():
    with pytest.raises(ConfigError):
        RampSpec((3.0, 0.0, 3.0, 3.0))
    with pytest.raises(ConfigError):
        RampSpec(())
    with pytest.raises(ConfigError):
        SpeedProfile(takeoff_schedule(4.39), RampSpec((3.0, 3.0)))


def test_setpoint_stationary_speed_gives_zero_pitch_rate():
    sched = takeoff_schedule(4.39)
    ramp = RampSpec.default_takeoff()
    sp = setpoint(0.0, sched, PITCH_TO, ramp)  # dV = 0 at a target
    assert sp.q_d == 0.0
    sp = setpoint(50.0, sched, PITCH_TO, ramp)  # terminal hold
    assert sp.q_d == 0.0 and sp.dq_d == 0.0


def test_setpoint_zero_pitch_rate_at_gaussian_peak():
    # pick the profile time where the reference speed crosses the peak c
    prof = SpeedProfile(takeoff_schedule(4.39), RampSpec.default_takeoff())
    pitch = PitchProfileParams(theta_lim=0.22, c=prof.speed(1.5)[0], d=15.0)
    sp = prof.setpoint(1.5, pitch)
    assert sp.u_d == pitch.c
    assert sp.q_d == 0.0  # Gaussian derivative vanishes at its center


def test_pitch_rate_integrates_back_to_pitch():
    prof = SpeedProfile(takeoff_schedule(stall_speed(AircraftParams())),
                        RampSpec.default_takeoff())
    grid = np.arange(0.0, 14.0, 1e-3)
    sps = [prof.setpoint(float(t), PITCH_TO) for t in grid]
    q_d = np.array([sp.q_d for sp in sps])
    integral = float(np.sum((q_d[1:] + q_d[:-1]) * np.diff(grid)) / 2.0)
    assert abs(integral - (sps[-1].theta_d - sps[0].theta_d)) < 1e-4


def test_advance_phase_takeoff_thresholds():
    sched = takeoff_schedule(4.39)
    taxi = PhaseTag.TAXI
    assert advance_phase(taxi, FlightState(u=2.20), sched, N=-29.0) is PhaseTag.ACCELERATION
    assert advance_phase(taxi, FlightState(u=2.19), sched, N=-29.0) is PhaseTag.TAXI
    # rotation -> climb needs the wheels unloaded
    rot = PhaseTag.ROTATION
    assert advance_phase(rot, FlightState(u=5.1), sched, N=-1.0) is PhaseTag.ROTATION
    assert advance_phase(rot, FlightState(u=5.1), sched, N=0.0) is PhaseTag.CLIMB


def test_advance_phase_terminal_absorbs():
    sched = takeoff_schedule(4.39)
    assert advance_phase(PhaseTag.CLIMB, FlightState(u=0.0), sched, N=-29.0) is PhaseTag.CLIMB
    lsched = landing_schedule(4.39)
    assert advance_phase(PhaseTag.GROUND, FlightState(u=9.0, h=0.0), lsched, N=-29.0) is PhaseTag.GROUND


def test_advance_phase_landing_contact_and_chain():
    lsched = landing_schedule(4.39)
    flare = PhaseTag.FLARE
    # fast touchdown stays in Touchdown until u drops below V_TD
    assert advance_phase(flare, FlightState(u=5.0, h=0.0), lsched, N=-20.0) is PhaseTag.TOUCHDOWN
    # slow touchdown chains straight to Ground in one call
    assert advance_phase(flare, FlightState(u=1.0, h=0.0), lsched, N=-20.0) is PhaseTag.GROUND


def test_advance_phase_never_regresses():
    sched = takeoff_schedule(4.39)
    rng = np.random.default_rng(3)
    phase = PhaseTag.TAXI
    seen = [phase]
    for _ in range(300):
        st = FlightState(u=float(rng.uniform(0, 7)), h=float(rng.uniform(-1, 0)))
        phase = advance_phase(phase, st, sched, N=float(rng.uniform(-30, 5)))
        seen.append(phase)
    orders = [p.order for p in seen]
    assert all(b >= a for a, b in zip(orders, orders[1:]))


def test_advance_phase_maneuver_mismatch():
    with pytest.raises(ConfigError):
        advance_phase(PhaseTag.FLARE, FlightState(), takeoff_schedule(4.39), N=0.0)


def test_schedule_maneuvers():
    assert takeoff_schedule(4.39).maneuver is Maneuver.TAKEOFF
    assert landing_schedule(4.39).maneuver is Maneuver.LANDING
