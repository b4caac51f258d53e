"""Phase machines and reference trajectory generation.

The speed reference moves between the maneuver's target speeds along C1
cubic-ease ramps so that the pitch reference (a Gaussian in the reference
speed) has well defined first and second time derivatives. References are
pure functions of time; they never read the measured state.
"""

import enum
import math
from dataclasses import dataclass

from .airframe import FlightState
from .errors import ConfigError

__all__ = [
    "Maneuver",
    "PhaseTag",
    "TakeoffSchedule",
    "LandingSchedule",
    "RampSpec",
    "PitchProfileParams",
    "Setpoint",
    "SpeedProfile",
    "takeoff_schedule",
    "landing_schedule",
    "desired_pitch",
    "reference_speed",
    "setpoint",
    "advance_phase",
]


class Maneuver(enum.Enum):
    TAKEOFF = "takeoff"
    LANDING = "landing"


class PhaseTag(enum.Enum):
    """Maneuver phases in canonical order; phases never regress."""

    TAXI = ("takeoff", 0)
    ACCELERATION = ("takeoff", 1)
    ROTATION = ("takeoff", 2)
    CLIMB = ("takeoff", 3)
    APPROACH = ("landing", 0)
    FLARE = ("landing", 1)
    TOUCHDOWN = ("landing", 2)
    GROUND = ("landing", 3)

    def __init__(self, maneuver_name, order):
        self.maneuver = Maneuver(maneuver_name)
        self.order = order

    @property
    def label(self) -> str:
        return self.name.capitalize()


TAKEOFF_PHASES = (PhaseTag.TAXI, PhaseTag.ACCELERATION, PhaseTag.ROTATION, PhaseTag.CLIMB)
LANDING_PHASES = (PhaseTag.APPROACH, PhaseTag.FLARE, PhaseTag.TOUCHDOWN, PhaseTag.GROUND)

# Grounded/airborne split of the phase tags, used by event detection.
GROUNDED_PHASES = frozenset(
    {PhaseTag.TAXI, PhaseTag.ACCELERATION, PhaseTag.ROTATION, PhaseTag.TOUCHDOWN, PhaseTag.GROUND}
)
AIRBORNE_PHASES = frozenset({PhaseTag.CLIMB, PhaseTag.APPROACH, PhaseTag.FLARE})


@dataclass(frozen=True)
class TakeoffSchedule:
    """Increasing speed ladder 0 < V_1 < V_R < V_LOF < V_2 [m/s]."""

    v0: float
    v1: float
    v_r: float
    v_lof: float
    v2: float

    def __post_init__(self):
        s = self.speeds
        if any(not math.isfinite(v) for v in s) or any(b <= a for a, b in zip(s, s[1:])):
            raise ConfigError(f"take-off schedule must be strictly increasing, got {s}")

    @property
    def maneuver(self) -> Maneuver:
        return Maneuver.TAKEOFF

    @property
    def speeds(self) -> tuple[float, ...]:
        return (self.v0, self.v1, self.v_r, self.v_lof, self.v2)


@dataclass(frozen=True)
class LandingSchedule:
    """Decreasing speed ladder V_REF > V_TD > 0 [m/s]."""

    v_ref: float
    v_td: float
    v0: float = 0.0

    def __post_init__(self):
        s = self.speeds
        if any(not math.isfinite(v) for v in s) or any(b >= a for a, b in zip(s, s[1:])):
            raise ConfigError(f"landing schedule must be strictly decreasing, got {s}")

    @property
    def maneuver(self) -> Maneuver:
        return Maneuver.LANDING

    @property
    def speeds(self) -> tuple[float, ...]:
        return (self.v_ref, self.v_td, self.v0)


SpeedSchedule = TakeoffSchedule | LandingSchedule


def takeoff_schedule(V_stall: float) -> TakeoffSchedule:
    """Take-off targets {0, 0.5, 1.1, 1.15, 1.2} x V_stall."""
    if not (math.isfinite(V_stall) and V_stall > 0.0):
        raise ConfigError(f"V_stall must be positive, got {V_stall}")
    return TakeoffSchedule(
        v0=0.0,
        v1=0.5 * V_stall,
        v_r=1.1 * V_stall,
        v_lof=1.15 * V_stall,
        v2=1.2 * V_stall,
    )


def landing_schedule(V_stall: float) -> LandingSchedule:
    """Landing targets {1.3, 1.1, 0} x V_stall."""
    if not (math.isfinite(V_stall) and V_stall > 0.0):
        raise ConfigError(f"V_stall must be positive, got {V_stall}")
    return LandingSchedule(v_ref=1.3 * V_stall, v_td=1.1 * V_stall, v0=0.0)


@dataclass(frozen=True)
class RampSpec:
    """Per-segment ramp durations [s] for the speed reference."""

    durations: tuple[float, ...]

    def __post_init__(self):
        if len(self.durations) == 0:
            raise ConfigError("ramp spec needs at least one duration")
        for d in self.durations:
            if not (math.isfinite(d) and d > 0.0):
                raise ConfigError(f"ramp durations must be positive, got {d}")

    @staticmethod
    def default_takeoff() -> "RampSpec":
        return RampSpec((3.0, 3.0, 3.0, 3.0))

    @staticmethod
    def default_landing() -> "RampSpec":
        return RampSpec((5.0, 5.0))


@dataclass(frozen=True)
class PitchProfileParams:
    """Gaussian pitch reference: theta_lim * exp(-0.5 (V_d - c)^2 / d^2)."""

    theta_lim: float
    c: float
    d: float

    def __post_init__(self):
        if not all(map(math.isfinite, (self.theta_lim, self.c, self.d))):
            raise ConfigError("pitch profile parameters must be finite")
        if self.d == 0.0:
            raise ConfigError("pitch profile width d must be nonzero")


@dataclass(frozen=True)
class Setpoint:
    """Desired (u, du, theta, q, dq) at one instant."""

    u_d: float
    du_d: float
    theta_d: float
    q_d: float
    dq_d: float


class SpeedProfile:
    """Piecewise cubic-ease speed reference through a schedule's targets.

    Within segment i the speed eases from speeds[i] to speeds[i+1] over
    ramp.durations[i] with zero end slopes, then the profile holds the
    final target. Built once per scenario; evaluation is O(#segments).
    """

    def __init__(self, schedule: SpeedSchedule, ramp: RampSpec):
        speeds = schedule.speeds
        n_seg = len(speeds) - 1
        if len(ramp.durations) != n_seg:
            raise ConfigError(
                f"{schedule.maneuver.value} profile needs {n_seg} ramp durations, "
                f"got {len(ramp.durations)}"
            )
        self.schedule = schedule
        self.ramp = ramp
        self.seg_v0 = tuple(speeds[:-1])
        self.seg_v1 = tuple(speeds[1:])
        self.seg_dur = tuple(ramp.durations)
        t0 = []
        t = 0.0
        for d in self.seg_dur:
            t0.append(t)
            t = t + d
        self.seg_t0 = tuple(t0)
        self.seg_end = tuple(a + b for a, b in zip(self.seg_t0, self.seg_dur))
        self.t_final = self.seg_end[-1]

    def speed(self, t: float) -> tuple[float, float, float]:
        """Reference speed and its first two time derivatives at ``t``."""
        if t < 0.0:
            raise ConfigError(f"profile time must be non-negative, got {t}")
        i = 0
        n = len(self.seg_dur)
        while i < n and t >= self.seg_end[i]:
            i += 1
        if i == n:
            return self.seg_v1[-1], 0.0, 0.0
        dur = self.seg_dur[i]
        dv = self.seg_v1[i] - self.seg_v0[i]
        s = (t - self.seg_t0[i]) / dur
        V = self.seg_v0[i] + dv * (s * s * (3.0 - 2.0 * s))
        dV = dv * (6.0 * s - 6.0 * s * s) / dur
        ddV = dv * (6.0 - 12.0 * s) / (dur * dur)
        return V, dV, ddV

    def setpoint(self, t: float, pitch: PitchProfileParams) -> Setpoint:
        """Full setpoint at ``t``: speed reference plus the pitch chain.

        theta_d = theta_lim exp(-0.5 (V_d - c)^2 / d^2) evaluated along
        the reference speed, with q_d and dq_d from the analytic chain
        rule through V_d(t).
        """
        V, dV, ddV = self.speed(t)
        c = pitch.c
        d = pitch.d
        ex = math.exp(-0.5 * (V - c) * (V - c) / (d * d))
        th_d = pitch.theta_lim * ex
        g1 = -(V - c) / (d * d)
        q_d = th_d * g1 * dV
        dq_d = th_d * ((g1 * g1 - 1.0 / (d * d)) * dV * dV + g1 * ddV)
        return Setpoint(u_d=V, du_d=dV, theta_d=th_d, q_d=q_d, dq_d=dq_d)


def desired_pitch(V_d: float, p: PitchProfileParams) -> float:
    """Pitch reference theta_lim * exp(-0.5 (V_d - c)^2 / d^2) [rad]."""
    return p.theta_lim * math.exp(-0.5 * (V_d - p.c) * (V_d - p.c) / (p.d * p.d))


def reference_speed(t: float, schedule: SpeedSchedule, ramp: RampSpec) -> tuple[float, float]:
    """Reference speed and acceleration at ``t`` (see :class:`SpeedProfile`)."""
    V, dV, _ = SpeedProfile(schedule, ramp).speed(t)
    return V, dV


def setpoint(
    t: float, schedule: SpeedSchedule, p: PitchProfileParams, ramp: RampSpec
) -> Setpoint:
    """Setpoint at ``t``; u_d follows the speed reference (V ~ u regime)."""
    return SpeedProfile(schedule, ramp).setpoint(t, p)


def advance_phase(
    phase: PhaseTag, state: FlightState, schedule: SpeedSchedule, N: float
) -> PhaseTag:
    """Advance the phase machine for the current state.

    Take-off climbs the ladder on u crossing V_1, V_R and (with the
    wheels unloaded, N >= 0) V_LOF. Landing advances on u <= V_REF, then
    ground contact h >= 0, then u <= V_TD. Adjacent transitions may chain
    within one call; terminal phases absorb.
    """
    if phase.maneuver is not schedule.maneuver:
        raise ConfigError(
            f"phase {phase.name} does not belong to a {schedule.maneuver.value} schedule"
        )
    while True:
        if phase is PhaseTag.TAXI and state.u >= schedule.v1:
            phase = PhaseTag.ACCELERATION
        elif phase is PhaseTag.ACCELERATION and state.u >= schedule.v_r:
            phase = PhaseTag.ROTATION
        elif phase is PhaseTag.ROTATION and state.u >= schedule.v_lof and N >= 0.0:
            phase = PhaseTag.CLIMB
        elif phase is PhaseTag.APPROACH and state.u <= schedule.v_ref:
            phase = PhaseTag.FLARE
        elif phase is PhaseTag.FLARE and state.h >= 0.0:
            phase = PhaseTag.TOUCHDOWN
        elif phase is PhaseTag.TOUCHDOWN and state.u <= schedule.v_td:
            phase = PhaseTag.GROUND
        else:
            return phase
