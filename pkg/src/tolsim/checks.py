"""Runtime implementation of the acceptance criteria and data invariants.

Each check returns a :class:`CheckResult`; the CLI ``check`` subcommand
prints one line per check and the acceptance test module asserts them.
Tolerances are fixed here, not configurable.
"""

import math
import random
from dataclasses import dataclass

import numpy as np

from .airframe import AircraftParams, FlightState, airspeed, angle_of_attack, lift_drag, stall_speed
from .control import ControlGains, SaturationParams, saturate, thrust_command, torque_command
from .dynamics import ControlCommand, GroundContactMode, derivatives, normal_force
from .errors import SimulationError
from .guidance import (
    Maneuver,
    PhaseTag,
    PitchProfileParams,
    RampSpec,
    SpeedProfile,
    landing_schedule,
    takeoff_schedule,
)
from .simulator import (
    EventKind,
    detect_events,
    landing_config,
    rk4_step,
    run_scenario,
    takeoff_config,
)

__all__ = ["CheckResult", "run_all"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _result(name, conditions, detail):
    return CheckResult(name=name, passed=all(ok for ok, _ in conditions),
                       detail=detail + "".join(f"; FAILED: {msg}" for ok, msg in conditions if not ok))


def check_stall_speed() -> CheckResult:
    v = stall_speed(AircraftParams())
    err = abs(v - 4.39)
    return CheckResult(
        "stall speed", err <= 0.01,
        f"V_stall = {v:.4f} m/s (reference 4.39 +- 0.01)",
    )


def check_speed_ladders() -> CheckResult:
    to = takeoff_schedule(4.39).speeds
    ld = landing_schedule(4.39).speeds
    to_ref = (0.0, 2.195, 4.829, 5.049, 5.268)
    ld_ref = (5.707, 4.829, 0.0)
    to_err = max(abs(a - b) for a, b in zip(to, to_ref))
    ld_err = max(abs(a - b) for a, b in zip(ld, ld_ref))
    ok = to_err <= 1e-3 and ld_err <= 1e-3
    return CheckResult(
        "speed ladders", ok,
        f"take-off max dev {to_err:.2e}, landing max dev {ld_err:.2e} (tol 1e-3)",
    )


def check_takeoff_reproduction(records=None) -> CheckResult:
    if records is None:
        records = run_scenario(takeoff_config())
    last = records[-1]
    events = dict(detect_events(records))
    liftoff = events.get(EventKind.LIFTOFF)
    conds = [
        (last.phase is PhaseTag.CLIMB, f"terminal phase {last.phase.label}, expected Climb"),
        (liftoff is not None, "no liftoff event"),
        (abs(last.errors.e1) < 0.1, f"|e1|={abs(last.errors.e1):.3g} >= 0.1"),
        (abs(last.errors.e2) < 0.02, f"|e2|={abs(last.errors.e2):.3g} >= 0.02"),
        (abs(last.errors.e3) < 0.02, f"|e3|={abs(last.errors.e3):.3g} >= 0.02"),
        (-last.state.h > 0.0, f"final altitude {-last.state.h:.3f} <= 0"),
    ]
    detail = (f"liftoff at {liftoff:.3f} s, final altitude {-last.state.h:.2f} m, "
              f"terminal |e1|={abs(last.errors.e1):.2g}" if liftoff is not None else "no liftoff")
    if liftoff is not None:
        chatter = [r for r in records if r.t >= liftoff and r.F_mu > 0.0]
        n_chatter = len(chatter)
        worst_N = min((r.N for r in chatter), default=0.0)
        conds.append((
            n_chatter == 0,
            f"F_mu > 0 at {n_chatter} post-liftoff steps (switching chatter at the "
            f"steady-flight force-balance boundary N = 0; min N = {worst_N:.3g} N, "
            f"max friction force {max((abs(r.F_mu * r.N) for r in chatter), default=0.0):.3g} N)",
        ))
    return _result("take-off reproduction", conds, detail)


def check_landing_reproduction(records=None) -> CheckResult:
    cfg = landing_config()
    if records is None:
        records = run_scenario(cfg)
    last = records[-1]
    events = dict(detect_events(records))
    touchdown = events.get(EventKind.TOUCHDOWN)
    v_td = landing_schedule(stall_speed(cfg.params)).v_td
    conds = [(touchdown is not None, "no touchdown event")]
    if touchdown is not None:
        h_td = next(r.state.h for r in records if r.t == touchdown)
        conds.append((abs(h_td) <= 0.1, f"|h|={abs(h_td):.3g} > 0.1 m at touchdown"))
    conds.append((last.state.u <= v_td, f"terminal u={last.state.u:.3f} > V_TD={v_td:.3f}"))
    conds.append((any(r.phase is PhaseTag.GROUND for r in records), "never reached Ground phase"))
    detail = (f"touchdown at {touchdown:.3f} s, terminal u = {last.state.u:.3g} m/s"
              if touchdown is not None else "no touchdown")
    return _result("landing reproduction", conds, detail)


def check_feedback_linearization() -> CheckResult:
    rng = random.Random(20250809)
    p = AircraftParams()
    gains = ControlGains()
    satp = SaturationParams()
    a = 1.0 / p.m
    from .guidance import Setpoint

    worst1 = worst3 = 0.0
    n_fric = 0
    for i in range(1000):
        if i % 2 == 0:
            st = FlightState(u=rng.uniform(0.0, 5.0), w=rng.uniform(-0.5, 0.5),
                             theta=rng.uniform(-0.2, 0.25), q=rng.uniform(-0.5, 0.5), h=0.0)
        else:
            st = FlightState(u=rng.uniform(3.0, 9.0), w=rng.uniform(-2.0, 2.0),
                             theta=rng.uniform(-0.3, 0.3), q=rng.uniform(-0.5, 0.5),
                             h=rng.uniform(-60.0, -1.0))
        sp = Setpoint(u_d=st.u - rng.uniform(-4.0, 4.0), du_d=rng.uniform(-2.0, 2.0),
                      theta_d=st.theta - rng.uniform(-0.3, 0.3),
                      q_d=st.q - rng.uniform(-0.5, 0.5), dq_d=rng.uniform(-1.0, 1.0))
        T = thrust_command(st, sp, p, gains, satp)
        tau = torque_command(st, sp, gains)
        d = derivatives(p, st, ControlCommand(T=T, tau=tau))
        target1 = -a * gains.k_T * saturate(st.u - sp.u_d, satp)
        target3 = -gains.k_theta * (st.theta - sp.theta_d) - gains.k_q * (st.q - sp.q_d)
        worst1 = max(worst1, abs((d.du - sp.du_d) - target1) / max(abs(target1), 1e-300))
        worst3 = max(worst3, abs((d.dq - sp.dq_d) - target3) / max(abs(target3), 1e-300))
        alpha = angle_of_attack(st)
        L, D = lift_drag(p, airspeed(st), alpha)
        if normal_force(p, st, T, L, D, alpha) < 0.0:
            n_fric += 1
    ok = worst1 <= 1e-9 and worst3 <= 1e-9 and 0 < n_fric < 1000
    return CheckResult(
        "feedback linearization oracle", ok,
        f"1000 samples ({n_fric} friction-active): max rel err "
        f"e1-law {worst1:.2e}, e3-law {worst3:.2e} (tol 1e-9)",
    )


def check_lyapunov_monitor(takeoff_records=None, landing_records=None) -> CheckResult:
    if takeoff_records is None:
        takeoff_records = run_scenario(takeoff_config(thrust_clamp=False))
    if landing_records is None:
        landing_records = run_scenario(landing_config())
    conds = []
    rms_report = []
    for label, records, dt in (("take-off", takeoff_records, 1e-3),
                               ("landing", landing_records, 1e-3)):
        V = np.array([r.lyap.Vlyap for r in records])
        A = np.array([r.lyap.Vdot_total for r in records])
        fd = (V[2:] - V[:-2]) / (2.0 * dt)
        rel_rms = float(np.sqrt(np.mean((fd - A[1:-1]) ** 2)) / np.sqrt(np.mean(A[1:-1] ** 2)))
        rms_report.append(f"{label} {rel_rms:.3%}")
        conds.append((rel_rms <= 0.02, f"{label} Vdot RMS mismatch {rel_rms:.3%} > 2%"))
        n_bad1 = sum(1 for r in records if r.lyap.Vdot1 > 0.0)
        n_bad2 = sum(1 for r in records if r.lyap.Vdot2 > 0.0)
        conds.append((n_bad1 == 0, f"{label}: Vdot1 > 0 at {n_bad1} steps"))
        conds.append((n_bad2 == 0, f"{label}: Vdot2 > 0 at {n_bad2} steps"))
        pos = [r for r in records if r.lyap.Vdot_total > 0.0]
        bad_sign = [r for r in pos if not (r.errors.e2 * r.errors.e3 < 0.0)]
        rms_report.append(f"{len(pos)} transient Vdot>0 steps")
        conds.append((not bad_sign,
                      f"{label}: {len(bad_sign)} Vdot_total > 0 steps without e2*e3 < 0"))
    return _result("stability monitor", conds, ", ".join(rms_report) + " (tol 2% RMS)")


def check_saturation_properties() -> CheckResult:
    satp = SaturationParams(L_sat=0.9, M_sat=1.0)
    grid = np.linspace(-5.0, 5.0, 10000)
    vals = [saturate(float(s), satp) for s in grid]
    conds = [
        (all(s * v > 0.0 for s, v in zip(grid, vals) if s != 0.0), "s*sigma(s) <= 0 somewhere"),
        (all(v == float(s) for s, v in zip(grid, vals) if abs(s) <= 0.9), "not identity on [-L, L]"),
        (all(abs(v) <= 1.0 for v in vals), "|sigma| exceeds M"),
        (all(b >= a for a, b in zip(vals, vals[1:])), "not monotone non-decreasing"),
    ]
    for edge in (0.9, -0.9):
        lo = saturate(edge - 1e-13, satp)
        hi = saturate(edge + 1e-13, satp)
        conds.append((abs(hi - lo) <= 1e-12, f"discontinuity at {edge:+.1f}"))
    return _result("saturation properties", conds, "10000 samples on [-5, 5], L=0.9, M=1")


def check_trajectory_gradients() -> CheckResult:
    vs = stall_speed(AircraftParams())
    prof = SpeedProfile(takeoff_schedule(vs), RampSpec.default_takeoff())
    pitch = PitchProfileParams(0.22, 2.0, 15.0)
    dtau = 1e-4
    bounds = list(prof.seg_t0) + [prof.t_final]
    qa, qf, dqa, dqf = [], [], [], []
    t = 2.0 * dtau
    while t < prof.t_final + 2.0:
        if min(abs(t - b) for b in bounds) > 2.0 * dtau:
            sp0 = prof.setpoint(t, pitch)
            spm = prof.setpoint(t - dtau, pitch)
            spp = prof.setpoint(t + dtau, pitch)
            qa.append(sp0.q_d)
            qf.append((spp.theta_d - spm.theta_d) / (2.0 * dtau))
            dqa.append(sp0.dq_d)
            dqf.append((spp.q_d - spm.q_d) / (2.0 * dtau))
        t += 0.003
    qa, qf, dqa, dqf = map(np.array, (qa, qf, dqa, dqf))
    conds = []
    report = []
    for label, ana, fd in (("q_d", qa, qf), ("dq_d", dqa, dqf)):
        scale = float(np.max(np.abs(fd)))
        # Pointwise relative error where the derivative is appreciable, and
        # error relative to the signal scale everywhere (the second
        # derivative crosses zero, where a pointwise ratio is undefined).
        mask = np.abs(fd) > 0.01 * scale
        rel = float(np.max(np.abs(ana[mask] - fd[mask]) / np.abs(fd[mask])))
        rel_scale = float(np.max(np.abs(ana - fd)) / scale)
        report.append(f"{label} rel {rel:.2e}")
        conds.append((rel < 1e-5, f"{label} pointwise rel err {rel:.2e} >= 1e-5"))
        conds.append((rel_scale < 1e-5, f"{label} scale-rel err {rel_scale:.2e} >= 1e-5"))
    return _result("trajectory gradients", conds,
                   ", ".join(report) + f" over {len(qa)} samples (tol 1e-5)")


def check_rk4_order() -> CheckResult:
    p = AircraftParams()
    s0 = FlightState(u=6.0, w=0.4, theta=0.1, q=0.0, h=-30.0)
    cmd = ControlCommand(T=5.0, tau=0.0)

    def final(dt):
        s = s0
        for _ in range(round(1.0 / dt)):
            s = rk4_step(p, s, cmd, GroundContactMode.SIGNED_NORMAL, dt)
        return np.array([s.u, s.w, s.theta, s.q, s.h])

    ref = final(1e-3)
    e_coarse = float(np.linalg.norm(final(1e-2) - ref))
    e_fine = float(np.linalg.norm(final(5e-3) - ref))
    ratio = e_coarse / e_fine
    return CheckResult(
        "integrator order", 12.0 <= ratio <= 20.0,
        f"error ratio dt=1e-2 vs 5e-3: {ratio:.2f} (expected in [12, 20], nominal 16)",
    )


def check_friction_switch(run_sets) -> CheckResult:
    n = 0
    bad = 0
    for records in run_sets:
        for r in records:
            n += 1
            if (r.F_mu > 0.0) is not (r.N < 0.0):
                bad += 1
    return CheckResult(
        "friction switch invariant", bad == 0,
        f"(F_mu > 0) <=> (N < 0) on {n} records, {bad} violations",
    )


def run_all(engine: str | None = None) -> list[CheckResult]:
    """Execute every check, sharing the three reference runs."""
    takeoff = run_scenario(takeoff_config(), engine=engine)
    takeoff_unclamped = run_scenario(takeoff_config(thrust_clamp=False), engine=engine)
    landing = run_scenario(landing_config(), engine=engine)
    return [
        check_stall_speed(),
        check_speed_ladders(),
        check_takeoff_reproduction(takeoff),
        check_landing_reproduction(landing),
        check_feedback_linearization(),
        check_lyapunov_monitor(takeoff_unclamped, landing),
        check_saturation_properties(),
        check_trajectory_gradients(),
        check_rk4_order(),
        check_friction_switch([takeoff, takeoff_unclamped, landing]),
    ]
