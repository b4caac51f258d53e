"""Aircraft parameters and aerodynamic primitives.

Longitudinal-plane conventions: body x forward, body z down. ``u`` and
``w`` are the body-frame velocity components, so the airspeed vector in
this plane is (u, w) and the angle of attack is the angle it makes with
the body x axis.
"""

import math
from dataclasses import dataclass, field

from .errors import ConfigError

__all__ = [
    "AeroCoeffModel",
    "AircraftParams",
    "FlightState",
    "stall_speed",
    "airspeed",
    "angle_of_attack",
    "lift_drag",
]


@dataclass(frozen=True)
class AeroCoeffModel:
    """Linear lift curve with a parabolic drag polar.

    C_L(alpha) = C_L0 + C_L_alpha * alpha, clamped to +-C_L_max of the
    owning :class:`AircraftParams`; C_D = C_D0 + k_induced * C_L**2.
    A constant-coefficient model is the special case C_L_alpha = 0.
    """

    C_L0: float = 0.4
    C_L_alpha: float = 5.0   # per rad
    C_D0: float = 0.03
    k_induced: float = 0.05

    def __post_init__(self):
        if not all(map(math.isfinite, (self.C_L0, self.C_L_alpha, self.C_D0, self.k_induced))):
            raise ConfigError("aero coefficients must be finite")
        if self.C_D0 <= 0.0:
            raise ConfigError("C_D0 must be positive (C_D >= C_D0 > 0)")
        if self.k_induced < 0.0:
            raise ConfigError("k_induced must be non-negative")


@dataclass(frozen=True)
class AircraftParams:
    """Physical constants of the aircraft and its coefficient model.

    Units: m [kg], S [m^2], rho [kg/m^3], g [m/s^2]; C_L_max and mu are
    dimensionless.
    """

    m: float = 3.0
    S: float = 2.0
    rho: float = 1.22
    C_L_max: float = 1.25
    mu: float = 0.02
    g: float = 9.81
    aero: AeroCoeffModel = field(default_factory=AeroCoeffModel)

    def __post_init__(self):
        for name in ("m", "S", "rho", "C_L_max", "g"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ConfigError(f"{name} must be a positive finite number, got {v}")
        if not (math.isfinite(self.mu) and 0.0 <= self.mu < 1.0):
            raise ConfigError(f"mu must satisfy 0 <= mu < 1, got {self.mu}")

    def lift_coeff(self, alpha: float) -> float:
        """Lift coefficient at angle of attack, clamped to +-C_L_max."""
        c_l = self.aero.C_L0 + self.aero.C_L_alpha * alpha
        if c_l > self.C_L_max:
            c_l = self.C_L_max
        elif c_l < -self.C_L_max:
            c_l = -self.C_L_max
        return c_l

    def drag_coeff(self, alpha: float) -> float:
        c_l = self.lift_coeff(alpha)
        return self.aero.C_D0 + self.aero.k_induced * c_l * c_l


@dataclass(frozen=True)
class FlightState:
    """Integrated state: body velocities, pitch, pitch rate, vertical position.

    ``h`` is the inertial z position with the axis pointing down, so the
    aircraft is on or below the runway when h >= 0 and airborne when
    h < 0. ``t`` is simulation time in seconds.
    """

    u: float = 0.0
    w: float = 0.0
    theta: float = 0.0
    q: float = 0.0
    h: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        for name in ("u", "w", "theta", "q", "h", "t"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"flight state field {name} must be finite")


def stall_speed(params: AircraftParams) -> float:
    """Minimum level-flight speed at maximum lift coefficient [m/s]."""
    return math.sqrt(2.0 * params.m * params.g / (params.rho * params.C_L_max * params.S))


def airspeed(state: FlightState) -> float:
    """Magnitude of the in-plane velocity, sqrt(u^2 + w^2)."""
    return math.sqrt(state.u * state.u + state.w * state.w)


def angle_of_attack(state: FlightState) -> float:
    """Angle between body x axis and the velocity vector [rad].

    Defined as 0 at rest (u = w = 0), where the arctangent is singular.
    """
    if state.u == 0.0 and state.w == 0.0:
        return 0.0
    return math.atan2(state.w, state.u)


def lift_drag(params: AircraftParams, V: float, alpha: float) -> tuple[float, float]:
    """Lift and drag forces [N] at airspeed ``V`` and angle of attack ``alpha``.

    L = K V^2 C_L(alpha) and D = K V^2 C_D(alpha) with K = rho S / 2.
    """
    if V < 0.0:
        raise ConfigError(f"airspeed must be non-negative, got {V}")
    K = 0.5 * params.rho * params.S
    kv2 = K * V * V
    L = kv2 * params.lift_coeff(alpha)
    D = kv2 * params.drag_coeff(alpha)
    return L, D
