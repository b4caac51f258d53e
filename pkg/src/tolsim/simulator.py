"""Closed-loop fixed-step simulation of take-off and landing scenarios.

Each step evaluates the reference trajectory, the controller, and the
stability monitor at the current state, then advances the dynamics with a
classical Runge-Kutta step holding the command constant. Runway contact
is handled kinematically: while the wheels carry load (h >= 0 with
negative normal force) the vertical degree of freedom is pinned, so h
stays at 0 and w tracks u tan(theta); the constraint releases the moment
the normal force turns non-negative.

Two interchangeable stepping engines exist: a compiled extension
(:mod:`tolsim._engine`, built from Cython) and a pure-Python loop that
composes the public library functions. The compiled engine is selected at
import when available; set ``TOLSIM_ENGINE=python`` or ``compiled`` to
force one, or pass ``engine=`` to :func:`run_scenario`.
"""

import enum
import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from .airframe import AircraftParams, FlightState, airspeed, angle_of_attack, lift_drag, stall_speed
from .control import (
    ControlGains,
    E1RateScale,
    ErrorVector,
    LyapunovSample,
    SaturationParams,
    lyapunov_sample,
    thrust_command,
    torque_command,
)
from .dynamics import ControlCommand, GroundContactMode, derivatives, effective_friction, normal_force
from .errors import ConfigError, SimulationError
from .guidance import (
    AIRBORNE_PHASES,
    GROUNDED_PHASES,
    LANDING_PHASES,
    TAKEOFF_PHASES,
    LandingSchedule,
    Maneuver,
    PhaseTag,
    PitchProfileParams,
    RampSpec,
    Setpoint,
    SpeedProfile,
    TakeoffSchedule,
    advance_phase,
    landing_schedule,
    takeoff_schedule,
)

__all__ = [
    "ScenarioConfig",
    "SimRecord",
    "EventKind",
    "STOP_SPEED",
    "rk4_step",
    "run_scenario",
    "detect_events",
    "takeoff_config",
    "landing_config",
    "engine_name",
    "available_engines",
]

# Speed below which a landing rollout counts as stopped [m/s]; the friction
# model never produces an exact zero.
STOP_SPEED = 0.05

_MAX_STEPS = 20_000_000

# Column layout of the raw per-step arrays produced by both engines.
COLUMNS = (
    "t", "u", "w", "theta", "q", "h", "V",
    "u_d", "du_d", "theta_d", "q_d", "dq_d",
    "e1", "e2", "e3", "T", "tau", "N", "F_mu",
    "Vlyap", "Vdot1", "Vdot2", "Vdot3", "Vdot_total",
)

_STATUS_HORIZON = 0
_STATUS_STOPPED = 1
_STATUS_BLOWUP = 2


class EventKind(enum.Enum):
    LIFTOFF = "liftoff"
    TOUCHDOWN = "touchdown"
    STOP = "stop"


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one closed-loop run needs.

    ``thrust_clamp`` limits the commanded thrust to non-negative values
    (propellers do not push backward); disable it to let the controller
    apply braking force, which the landing rollout requires.
    """

    maneuver: Maneuver
    params: AircraftParams = field(default_factory=AircraftParams)
    gains: ControlGains = field(default_factory=ControlGains)
    satp: SaturationParams = field(default_factory=SaturationParams)
    pitch: PitchProfileParams = field(default_factory=lambda: PitchProfileParams(0.22, 2.0, 15.0))
    ramp: RampSpec = field(default_factory=RampSpec.default_takeoff)
    initial: FlightState = field(default_factory=FlightState)
    dt: float = 1e-3
    t_max: float = 30.0
    contact_mode: GroundContactMode = GroundContactMode.SIGNED_NORMAL
    thrust_clamp: bool = True
    e1_scale: E1RateScale = E1RateScale.PER_MASS

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not (math.isfinite(self.t_max) and self.t_max > self.dt):
            raise ConfigError(f"t_max must exceed dt, got t_max={self.t_max} dt={self.dt}")
        n_seg = 4 if self.maneuver is Maneuver.TAKEOFF else 2
        if len(self.ramp.durations) != n_seg:
            raise ConfigError(
                f"{self.maneuver.value} needs {n_seg} ramp durations, got {len(self.ramp.durations)}"
            )


@dataclass(frozen=True)
class SimRecord:
    """One step of a run: state, references, errors, command, monitor."""

    t: float
    state: FlightState
    setpoint: Setpoint
    errors: ErrorVector
    cmd: ControlCommand
    phase: PhaseTag
    N: float
    F_mu: float
    lyap: LyapunovSample
    V: float


def takeoff_config(**overrides) -> ScenarioConfig:
    """Default take-off scenario: standstill on the runway, 30 s horizon."""
    base = dict(
        maneuver=Maneuver.TAKEOFF,
        pitch=PitchProfileParams(theta_lim=0.22, c=2.0, d=15.0),
        ramp=RampSpec.default_takeoff(),
        initial=FlightState(u=0.0, w=0.0, theta=0.0, q=0.0, h=0.0, t=0.0),
        dt=1e-3,
        t_max=30.0,
        thrust_clamp=True,
    )
    base.update(overrides)
    return ScenarioConfig(**base)


def landing_config(**overrides) -> ScenarioConfig:
    """Default landing scenario: 50 m above the runway at 5.16 m/s.

    Ships with the thrust clamp disabled: the reference decelerates
    through a nose-down descent, which needs braking force that a
    non-negative thrust cannot supply.
    """
    base = dict(
        maneuver=Maneuver.LANDING,
        pitch=PitchProfileParams(theta_lim=-0.15, c=1.5, d=11.0),
        ramp=RampSpec.default_landing(),
        initial=FlightState(u=5.16, w=0.0, theta=0.0, q=0.0, h=-50.0, t=0.0),
        dt=1e-3,
        t_max=40.0,
        thrust_clamp=False,
    )
    base.update(overrides)
    return ScenarioConfig(**base)


def rk4_step(
    params: AircraftParams,
    state: FlightState,
    cmd: ControlCommand,
    mode: GroundContactMode = GroundContactMode.SIGNED_NORMAL,
    dt: float = 1e-3,
) -> FlightState:
    """Advance one step with the command held constant (zero-order hold).

    Classical 4-stage Runge-Kutta. While the wheels carry load (h >= 0
    and N < 0 at the step start) the runway constraint is active: only
    (u, theta, q) integrate, with w = u tan(theta) and h = 0 enforced at
    every stage. A free step that ends at or below the runway is clamped
    back to h = 0 with w projected onto the rolling direction.
    """
    if not (math.isfinite(dt) and dt > 0.0):
        raise ConfigError(f"dt must be positive, got {dt}")
    alpha = angle_of_attack(state)
    V = airspeed(state)
    L, D = lift_drag(params, V, alpha)
    N = normal_force(params, state, cmd.T, L, D, alpha)
    t_new = state.t + dt

    try:
        if state.h >= 0.0 and N < 0.0:
            u, th, q = state.u, state.theta, state.q

            def f(u_, th_, q_):
                st = FlightState(u=u_, w=u_ * math.tan(th_), theta=th_, q=q_, h=0.0, t=state.t)
                d = derivatives(params, st, cmd, mode)
                return d.du, d.dtheta, d.dq

            k1u, k1t, k1q = f(u, th, q)
            k2u, k2t, k2q = f(u + 0.5 * dt * k1u, th + 0.5 * dt * k1t, q + 0.5 * dt * k1q)
            k3u, k3t, k3q = f(u + 0.5 * dt * k2u, th + 0.5 * dt * k2t, q + 0.5 * dt * k2q)
            k4u, k4t, k4q = f(u + dt * k3u, th + dt * k3t, q + dt * k3q)
            u_n = u + dt * (k1u + 2.0 * k2u + 2.0 * k3u + k4u) / 6.0
            th_n = th + dt * (k1t + 2.0 * k2t + 2.0 * k3t + k4t) / 6.0
            q_n = q + dt * (k1q + 2.0 * k2q + 2.0 * k3q + k4q) / 6.0
            return FlightState(u=u_n, w=u_n * math.tan(th_n), theta=th_n, q=q_n, h=0.0, t=t_new)

        u, w, th, q, h = state.u, state.w, state.theta, state.q, state.h

        def g(u_, w_, th_, q_, h_):
            st = FlightState(u=u_, w=w_, theta=th_, q=q_, h=h_, t=state.t)
            d = derivatives(params, st, cmd, mode)
            return d.du, d.dw, d.dtheta, d.dq, d.dh

        k1 = g(u, w, th, q, h)
        k2 = g(u + 0.5 * dt * k1[0], w + 0.5 * dt * k1[1], th + 0.5 * dt * k1[2],
               q + 0.5 * dt * k1[3], h + 0.5 * dt * k1[4])
        k3 = g(u + 0.5 * dt * k2[0], w + 0.5 * dt * k2[1], th + 0.5 * dt * k2[2],
               q + 0.5 * dt * k2[3], h + 0.5 * dt * k2[4])
        k4 = g(u + dt * k3[0], w + dt * k3[1], th + dt * k3[2], q + dt * k3[3], h + dt * k3[4])
        u_n = u + dt * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) / 6.0
        w_n = w + dt * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) / 6.0
        th_n = th + dt * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]) / 6.0
        q_n = q + dt * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3]) / 6.0
        h_n = h + dt * (k1[4] + 2.0 * k2[4] + 2.0 * k3[4] + k4[4]) / 6.0
        if h_n >= 0.0:
            # Touched the runway during the step: land on it, absorb the
            # vertical velocity into the rolling direction.
            h_n = 0.0
            w_n = u_n * math.tan(th_n)
        return FlightState(u=u_n, w=w_n, theta=th_n, q=q_n, h=h_n, t=t_new)
    except (ValueError, OverflowError) as exc:
        # Non-finite stage values surface as math-domain or state-validation
        # errors; report them uniformly as integration failure.
        raise ArithmeticError(f"integration produced a non-finite state: {exc}") from exc


def _count_steps(dt: float, t_max: float) -> int:
    n = 0
    while n * dt < t_max:
        n += 1
        if n > _MAX_STEPS:
            raise ConfigError(f"step count exceeds {_MAX_STEPS}; increase dt or reduce t_max")
    return n


def _build_schedule(cfg: ScenarioConfig):
    v_s = stall_speed(cfg.params)
    if cfg.maneuver is Maneuver.TAKEOFF:
        return takeoff_schedule(v_s)
    return landing_schedule(v_s)


def _run_python(cfg: ScenarioConfig, profile: SpeedProfile, schedule, n_steps: int):
    """Reference engine: the library functions composed step by step."""
    p = cfg.params
    gains = cfg.gains
    satp = cfg.satp
    mode = cfg.contact_mode
    clamp = cfg.thrust_clamp
    landing = cfg.maneuver is Maneuver.LANDING
    e1_rate = (1.0 / p.m) if cfg.e1_scale is E1RateScale.PER_MASS else 1.0
    dt = cfg.dt

    data = np.empty((n_steps, len(COLUMNS)))
    phase_idx = np.empty(n_steps, dtype=np.int64)
    u, w, th, q, h = (cfg.initial.u, cfg.initial.w, cfg.initial.theta,
                      cfg.initial.q, cfg.initial.h)
    phase = PhaseTag.APPROACH if landing else PhaseTag.TAXI
    status = _STATUS_HORIZON
    n_rec = 0

    for k in range(n_steps):
        t = k * dt
        state = FlightState(u=u, w=w, theta=th, q=q, h=h, t=t)
        sp = profile.setpoint(t, cfg.pitch)
        T_raw = thrust_command(state, sp, p, gains, satp, mode, cfg.e1_scale)
        T = 0.0 if (clamp and T_raw < 0.0) else T_raw
        tau = torque_command(state, sp, gains)
        cmd = ControlCommand(T=T, tau=tau)

        alpha = angle_of_attack(state)
        V = airspeed(state)
        L, D = lift_drag(p, V, alpha)
        N = normal_force(p, state, T, L, D, alpha)
        F_mu = effective_friction(N, p.mu)
        e1 = u - sp.u_d
        e2 = th - sp.theta_d
        e3 = q - sp.q_d
        lyap = lyapunov_sample(ErrorVector(e1, e2, e3), gains, satp, e1_rate)
        phase = advance_phase(phase, state, schedule, N)

        data[k] = (
            t, u, w, th, q, h, V,
            sp.u_d, sp.du_d, sp.theta_d, sp.q_d, sp.dq_d,
            e1, e2, e3, T, tau, N, F_mu,
            lyap.Vlyap, lyap.Vdot1, lyap.Vdot2, lyap.Vdot3, lyap.Vdot_total,
        )
        phase_idx[k] = phase.order
        n_rec = k + 1

        if landing and phase is PhaseTag.GROUND and u <= STOP_SPEED:
            status = _STATUS_STOPPED
            break
        try:
            new = rk4_step(p, state, cmd, mode, dt)
        except ArithmeticError:
            status = _STATUS_BLOWUP
            break
        u, w, th, q, h = new.u, new.w, new.theta, new.q, new.h
        if not (math.isfinite(u) and math.isfinite(w) and math.isfinite(th)
                and math.isfinite(q) and math.isfinite(h)):
            status = _STATUS_BLOWUP
            break

    return data[:n_rec], phase_idx[:n_rec], status


def _plan_for_compiled(cfg: ScenarioConfig, profile: SpeedProfile, schedule, n_steps: int) -> dict:
    p = cfg.params
    landing = cfg.maneuver is Maneuver.LANDING
    if landing:
        thr = (schedule.v_ref, schedule.v_td, 0.0)
    else:
        thr = (schedule.v1, schedule.v_r, schedule.v_lof)
    return dict(
        m=p.m, S=p.S, rho=p.rho, C_L_max=p.C_L_max, mu=p.mu, g=p.g,
        C_L0=p.aero.C_L0, C_L_alpha=p.aero.C_L_alpha,
        C_D0=p.aero.C_D0, k_induced=p.aero.k_induced,
        k_T=cfg.gains.k_T, k_theta=cfg.gains.k_theta, k_q=cfg.gains.k_q,
        sat_L=cfg.satp.L_sat, sat_M=cfg.satp.M_sat,
        th_lim=cfg.pitch.theta_lim, pc=cfg.pitch.c, pd=cfg.pitch.d,
        e1_sfac=1.0 if cfg.e1_scale is E1RateScale.PER_MASS else p.m,
        e1_rate=(1.0 / p.m) if cfg.e1_scale is E1RateScale.PER_MASS else 1.0,
        dt=cfg.dt,
        u0=cfg.initial.u, w0=cfg.initial.w, th0=cfg.initial.theta,
        q0=cfg.initial.q, h0=cfg.initial.h,
        opposing=cfg.contact_mode is GroundContactMode.OPPOSING_MOTION,
        clamp=cfg.thrust_clamp,
        landing=landing,
        stop_speed=STOP_SPEED,
        n_steps=n_steps,
        thr_a=thr[0], thr_b=thr[1], thr_c=thr[2],
        seg_t0=np.asarray(profile.seg_t0, dtype=np.float64),
        seg_end=np.asarray(profile.seg_end, dtype=np.float64),
        seg_dur=np.asarray(profile.seg_dur, dtype=np.float64),
        seg_v0=np.asarray(profile.seg_v0, dtype=np.float64),
        seg_v1=np.asarray(profile.seg_v1, dtype=np.float64),
    )


def _records_from_arrays(maneuver: Maneuver, data, phase_idx) -> list[SimRecord]:
    phases = LANDING_PHASES if maneuver is Maneuver.LANDING else TAKEOFF_PHASES
    col = {name: i for i, name in enumerate(COLUMNS)}
    records = []
    for row, pidx in zip(data, phase_idx):
        v = row.tolist()
        state = FlightState(u=v[col["u"]], w=v[col["w"]], theta=v[col["theta"]],
                            q=v[col["q"]], h=v[col["h"]], t=v[col["t"]])
        sp = Setpoint(u_d=v[col["u_d"]], du_d=v[col["du_d"]], theta_d=v[col["theta_d"]],
                      q_d=v[col["q_d"]], dq_d=v[col["dq_d"]])
        err = ErrorVector(e1=v[col["e1"]], e2=v[col["e2"]], e3=v[col["e3"]])
        lyap = LyapunovSample(Vlyap=v[col["Vlyap"]], Vdot1=v[col["Vdot1"]],
                              Vdot2=v[col["Vdot2"]], Vdot3=v[col["Vdot3"]],
                              Vdot_total=v[col["Vdot_total"]])
        records.append(SimRecord(
            t=v[col["t"]],
            state=state,
            setpoint=sp,
            errors=err,
            cmd=ControlCommand(T=v[col["T"]], tau=v[col["tau"]]),
            phase=phases[int(pidx)],
            N=v[col["N"]],
            F_mu=v[col["F_mu"]],
            lyap=lyap,
            V=v[col["V"]],
        ))
    return records


# Engine selection at import: compiled extension when present, pure Python
# otherwise; TOLSIM_ENGINE=python|compiled forces the choice.
try:
    from . import _engine as _compiled

    if getattr(_compiled, "COLUMNS", None) != COLUMNS:
        raise ImportError("tolsim._engine column layout does not match this version")
except ImportError:
    _compiled = None

_env = os.environ.get("TOLSIM_ENGINE", "auto").strip().lower() or "auto"
if _env not in ("auto", "python", "compiled"):
    warnings.warn(f"unknown TOLSIM_ENGINE={_env!r}, using auto", stacklevel=1)
    _env = "auto"
if _env == "compiled" and _compiled is None:
    raise ImportError("TOLSIM_ENGINE=compiled but the tolsim._engine extension is not built")
_DEFAULT_ENGINE = "python" if _env == "python" else ("compiled" if _compiled is not None else "python")


def engine_name() -> str:
    """Name of the engine used by default ('compiled' or 'python')."""
    return _DEFAULT_ENGINE


def available_engines() -> tuple[str, ...]:
    return ("python", "compiled") if _compiled is not None else ("python",)


def run_scenario(cfg: ScenarioConfig, engine: str | None = None) -> list[SimRecord]:
    """Run one closed-loop scenario and return its per-step records.

    Terminates at the horizon, at the landing stop condition (phase
    Ground with u <= 0.05 m/s), or on integration blow-up, which raises
    :class:`SimulationError` carrying the partial records.
    """
    schedule = _build_schedule(cfg)
    profile = SpeedProfile(schedule, cfg.ramp)
    n_steps = _count_steps(cfg.dt, cfg.t_max)

    if engine is None:
        engine = _DEFAULT_ENGINE
    if engine == "compiled":
        if _compiled is None:
            raise ConfigError("compiled engine requested but tolsim._engine is not built")
        plan = _plan_for_compiled(cfg, profile, schedule, n_steps)
        data, phase_idx, status = _compiled.run_closed_loop(plan)
    elif engine == "python":
        data, phase_idx, status = _run_python(cfg, profile, schedule, n_steps)
    else:
        raise ConfigError(f"unknown engine {engine!r}, expected 'python' or 'compiled'")

    records = _records_from_arrays(cfg.maneuver, data, phase_idx)
    if status == _STATUS_BLOWUP:
        t_last = records[-1].t if records else 0.0
        raise SimulationError(
            f"integration diverged at step {len(records)} (t={t_last:.6g} s); "
            "check gains and step size",
            records=records,
        )
    return records


def detect_events(records: list[SimRecord]) -> list[tuple[EventKind, float]]:
    """Liftoff, touchdown and stop times found in a record stream.

    Liftoff: first record in a grounded phase whose normal force is
    non-negative. Touchdown: first downward crossing of the runway while
    in an airborne phase. Stop: first record at or below the stop speed
    in the Ground phase.
    """
    if not records:
        raise ConfigError("detect_events needs a non-empty record stream")
    liftoff = touchdown = stop = None
    prev = None
    for r in records:
        if liftoff is None and r.phase in GROUNDED_PHASES and r.N >= 0.0:
            liftoff = r.t
        if (touchdown is None and prev is not None
                and prev.state.h < 0.0 <= r.state.h and prev.phase in AIRBORNE_PHASES):
            touchdown = r.t
        if stop is None and r.phase is PhaseTag.GROUND and r.state.u <= STOP_SPEED:
            stop = r.t
        prev = r
    events = []
    if liftoff is not None:
        events.append((EventKind.LIFTOFF, liftoff))
    if touchdown is not None:
        events.append((EventKind.TOUCHDOWN, touchdown))
    if stop is not None:
        events.append((EventKind.STOP, stop))
    events.sort(key=lambda e: e[1])
    return events
