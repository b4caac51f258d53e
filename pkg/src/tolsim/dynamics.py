"""Longitudinal equations of motion with rolling resistance.

The state is (u, w, theta, q, h); the inputs are thrust T and the pitch
angular acceleration tau. Rolling resistance switches on the sign of the
normal force N: wheels carry load when N < 0 (z axis points down).
"""

import enum
import math
from dataclasses import dataclass

from .airframe import AircraftParams, FlightState, airspeed, angle_of_attack, lift_drag
from .errors import ConfigError

__all__ = [
    "ControlCommand",
    "StateDerivative",
    "GroundContactMode",
    "normal_force",
    "effective_friction",
    "derivatives",
]


@dataclass(frozen=True)
class ControlCommand:
    """Controller output: thrust force T [N] and pitch acceleration tau [rad/s^2].

    Negative T only appears in runs with the thrust clamp disabled; the
    simulator enforces the clamp policy, not this type.
    """

    T: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.T) and math.isfinite(self.tau)):
            raise ConfigError("control command must be finite")


@dataclass(frozen=True)
class StateDerivative:
    du: float
    dw: float
    dtheta: float
    dq: float
    dh: float


class GroundContactMode(enum.Enum):
    """How the rolling-resistance force enters the u equation.

    SIGNED_NORMAL applies the term -mu*N directly, so its sign follows the
    normal force; with the wheels loaded (N < 0) it points forward, which
    makes a parked aircraft creep. OPPOSING_MOTION applies the same
    magnitude mu*|N| against the rolling direction and holds the aircraft
    statically when no net force exceeds the friction threshold.
    """

    SIGNED_NORMAL = "signed_normal"
    OPPOSING_MOTION = "opposing_motion"


def normal_force(
    params: AircraftParams,
    state: FlightState,
    T: float,
    L: float,
    D: float,
    alpha: float,
) -> float:
    """Net non-runway vertical support minus weight, positive up [N].

    N < 0 means the runway carries part of the weight; N >= 0 means the
    aircraft is aerodynamically supported.
    """
    tma = state.theta - alpha
    return L * math.cos(tma) - D * math.sin(tma) + T * math.sin(state.theta) - params.m * params.g


def effective_friction(N: float, mu: float) -> float:
    """Friction coefficient in effect: 0 when N >= 0, mu when N < 0."""
    if mu < 0.0:
        raise ConfigError(f"mu must be non-negative, got {mu}")
    return 0.0 if N >= 0.0 else mu


def derivatives(
    params: AircraftParams,
    state: FlightState,
    cmd: ControlCommand,
    mode: GroundContactMode = GroundContactMode.SIGNED_NORMAL,
) -> StateDerivative:
    """Time derivatives of (u, w, theta, q, h).

    u equation: du = -q w - g sin(theta) + a [L sin(alpha) - D cos(alpha)
    + T - friction], with a = 1/m. In SIGNED_NORMAL mode the friction
    term is F_mu * N; in OPPOSING_MOTION it is F_mu * |N| * sign(u), with
    static holding at u = 0 while the net in-plane force stays below the
    friction threshold.

    The w equation contains neither thrust nor friction; dh is the
    inertial vertical velocity -u sin(theta) + w cos(theta) (down
    positive). Runway contact kinematics are not applied here; the
    integrator owns that constraint.
    """
    m = params.m
    g = params.g
    a = 1.0 / m
    u, w, th, q = state.u, state.w, state.theta, state.q
    T, tau = cmd.T, cmd.tau

    alpha = angle_of_attack(state)
    V = airspeed(state)
    L, D = lift_drag(params, V, alpha)
    sin_th = math.sin(th)
    cos_th = math.cos(th)
    sin_a = math.sin(alpha)
    cos_a = math.cos(alpha)

    N = normal_force(params, state, T, L, D, alpha)
    F_mu = effective_friction(N, params.mu)

    if mode is GroundContactMode.SIGNED_NORMAL:
        fric = F_mu * N
        du = -q * w - g * sin_th + a * (L * sin_a - D * cos_a + T - fric)
    else:
        du_free = -q * w - g * sin_th + a * (L * sin_a - D * cos_a + T)
        fric_mag = F_mu * abs(N)
        if u > 0.0:
            du = du_free - a * fric_mag
        elif u < 0.0:
            du = du_free + a * fric_mag
        elif abs(du_free) * m <= fric_mag:
            du = 0.0
        else:
            du = du_free - a * fric_mag if du_free > 0.0 else du_free + a * fric_mag

    dw = q * u + g * cos_th + a * (-D * sin_a - L * cos_a)
    dh = -u * sin_th + w * cos_th

    out = StateDerivative(du=du, dw=dw, dtheta=q, dq=tau, dh=dh)
    for name in ("du", "dw", "dtheta", "dq", "dh"):
        if not math.isfinite(getattr(out, name)):
            raise ArithmeticError(
                f"derivative term {name} is not finite "
                f"(state u={u:.6g} w={w:.6g} theta={th:.6g} q={q:.6g}, cmd T={T:.6g} tau={tau:.6g})"
            )
    return out
