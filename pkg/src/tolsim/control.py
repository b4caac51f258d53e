"""Saturated tracking controller and the stability monitor.

The thrust channel cancels the known u dynamics so the speed error obeys
e1' = -(k_T/m) sigma(e1) (or -k_T sigma(e1), selectable); the pitch
channel is a PD law with pitch acceleration feedforward, giving
e3' = -k_theta e2 - k_q e3 exactly. The monitor evaluates the tracking
energy 0.5 (e1^2 + e2^2 + e3^2) and the three terms of its analytic time
derivative along a run.
"""

import enum
import math
from dataclasses import dataclass

from .airframe import AircraftParams, FlightState, airspeed, angle_of_attack, lift_drag
from .dynamics import GroundContactMode
from .errors import ConfigError
from .guidance import Setpoint

__all__ = [
    "SaturationParams",
    "ControlGains",
    "E1RateScale",
    "ErrorVector",
    "LyapunovSample",
    "saturate",
    "thrust_command",
    "torque_command",
    "lyapunov_sample",
]


@dataclass(frozen=True)
class SaturationParams:
    """Linear saturation bounds: identity on [-L, L], asymptotic bound M.

    The blending factor n = pi / (2 (M - L)) makes the arctangent branches
    meet the linear zone continuously and approach +-M at infinity. The
    degenerate case L = M is a hard clip at +-L.
    """

    L_sat: float = 0.9
    M_sat: float = 1.0

    def __post_init__(self):
        ok = math.isfinite(self.L_sat) and math.isfinite(self.M_sat)
        if not (ok and 0.0 < self.L_sat <= self.M_sat):
            raise ConfigError(
                f"saturation bounds must satisfy 0 < L <= M, got L={self.L_sat} M={self.M_sat}"
            )

    @property
    def n(self) -> float:
        if self.L_sat == self.M_sat:
            return math.inf
        return math.pi / (2.0 * (self.M_sat - self.L_sat))


class E1RateScale(enum.Enum):
    """Convergence-rate convention for the speed error.

    PER_MASS: the saturated gain enters as a force, e1' = -(k_T/m) sigma(e1).
    DIRECT: the gain is an acceleration, e1' = -k_T sigma(e1).
    Both give a negative semidefinite monitor term.
    """

    PER_MASS = "per_mass"
    DIRECT = "direct"


@dataclass(frozen=True)
class ControlGains:
    """Tracking gains; all must be positive."""

    k_T: float = 10.0
    k_theta: float = 3.3
    k_q: float = 2.0

    def __post_init__(self):
        for name in ("k_T", "k_theta", "k_q"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ConfigError(f"gain {name} must be a positive real number, got {v}")


@dataclass(frozen=True)
class ErrorVector:
    """Tracking errors e1 = u - u_d, e2 = theta - theta_d, e3 = q - q_d."""

    e1: float
    e2: float
    e3: float


@dataclass(frozen=True)
class LyapunovSample:
    """One monitor sample: energy value and its analytic derivative terms.

    Vdot1 and Vdot2 are non-positive by construction; Vdot3 is the
    indefinite cross term e2 e3 (1 - k_theta), positive only when
    e2 e3 < 0 for k_theta > 1.
    """

    Vlyap: float
    Vdot1: float
    Vdot2: float
    Vdot3: float
    Vdot_total: float


def saturate(s: float, p: SaturationParams) -> float:
    """Odd, continuous, non-decreasing saturation: identity on [-L, L], bounded by M."""
    L = p.L_sat
    if p.L_sat == p.M_sat:
        if s > L:
            return L
        if s < -L:
            return -L
        return s
    n = p.n
    if s > L:
        return math.atan(n * (s - L)) / n + L
    if s < -L:
        return math.atan(n * (s + L)) / n - L
    return s


def thrust_command(
    state: FlightState,
    sp: Setpoint,
    params: AircraftParams,
    gains: ControlGains,
    satp: SaturationParams,
    mode: GroundContactMode = GroundContactMode.SIGNED_NORMAL,
    e1_scale: E1RateScale = E1RateScale.PER_MASS,
) -> float:
    """Thrust [N] that cancels the u dynamics down to the saturated error law.

    The u equation is affine in T, including T's appearance inside the
    normal force (through T sin(theta)) and therefore inside the friction
    term, so T has a closed form per friction branch. Both branches give
    the normal force the same sign, which makes the branch choice
    unambiguous: evaluate it from the friction-free solution.

    Returns the raw command; clamping to non-negative thrust is scenario
    policy applied by the simulator.
    """
    m = params.m
    g = params.g
    mu = params.mu
    u, w, th, q = state.u, state.w, state.theta, state.q

    alpha = angle_of_attack(state)
    V = airspeed(state)
    L, D = lift_drag(params, V, alpha)
    sin_th = math.sin(th)
    sin_a = math.sin(alpha)
    cos_a = math.cos(alpha)
    tma = th - alpha
    cos_tma = math.cos(tma)
    sin_tma = math.sin(tma)

    e1 = u - sp.u_d
    sfac = 1.0 if e1_scale is E1RateScale.PER_MASS else m
    B = (
        -sfac * gains.k_T * saturate(e1, satp)
        + m * (q * w + g * sin_th + sp.du_d)
        - L * sin_a
        + D * cos_a
    )
    C_term = L * cos_tma - D * sin_tma - m * g
    N0 = C_term + B * sin_th
    if N0 >= 0.0:
        return B

    if mode is GroundContactMode.OPPOSING_MOTION and u > 0.0:
        denom = 1.0 + mu * sin_th
        numer = B - mu * C_term
    elif mode is GroundContactMode.OPPOSING_MOTION and u == 0.0:
        # Static regime: command the friction-free solution and let static
        # friction absorb any sub-threshold residual.
        return B
    else:
        denom = 1.0 - mu * sin_th
        numer = B + mu * C_term
    if abs(denom) < 1e-6:
        raise ArithmeticError(
            f"thrust cancellation is singular: |1 -+ mu sin(theta)| = {abs(denom):.3g}"
        )
    return numer / denom


def torque_command(state: FlightState, sp: Setpoint, gains: ControlGains) -> float:
    """Pitch acceleration command: PD on (e2, e3) plus reference feedforward."""
    e2 = state.theta - sp.theta_d
    e3 = state.q - sp.q_d
    return -gains.k_theta * e2 - gains.k_q * e3 + sp.dq_d


def lyapunov_sample(
    err: ErrorVector,
    gains: ControlGains,
    satp: SaturationParams,
    e1_rate_scale: float = 1.0,
) -> LyapunovSample:
    """Monitor sample at one error vector.

    ``e1_rate_scale`` is the factor in the closed-loop speed-error rate
    e1' = -e1_rate_scale * k_T * sigma(e1): 1/m under the PER_MASS
    convention, 1 under DIRECT. The default 1 reports the unscaled term.
    """
    e1, e2, e3 = err.e1, err.e2, err.e3
    Vlyap = 0.5 * (e1 * e1 + e2 * e2 + e3 * e3)
    Vdot1 = -e1_rate_scale * gains.k_T * e1 * saturate(e1, satp)
    Vdot2 = -gains.k_q * e3 * e3
    Vdot3 = e2 * e3 * (1.0 - gains.k_theta)
    return LyapunovSample(
        Vlyap=Vlyap,
        Vdot1=Vdot1,
        Vdot2=Vdot2,
        Vdot3=Vdot3,
        Vdot_total=Vdot1 + Vdot2 + Vdot3,
    )
