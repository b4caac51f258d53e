import math

import numpy as np
import pytest

from tolsim.airframe import AircraftParams, FlightState
from tolsim.dynamics import (
    ControlCommand,
    GroundContactMode,
    derivatives,
    effective_friction,
    normal_force,
)
from tolsim.errors import ConfigError

P = AircraftParams()
REST = FlightState()
ZERO = ControlCommand()


def test_normal_force_at_rest():
    # only weight: N = -m g
    N = normal_force(P, REST, T=0.0, L=0.0, D=0.0, alpha=0.0)
    assert N == pytest.approx(-29.43, abs=1e-12)


def test_normal_force_lift_weight_balance():
    st = FlightState(theta=0.1)
    N = normal_force(P, st, T=0.0, L=P.m * P.g, D=0.0, alpha=0.1)
    assert N == pytest.approx(0.0, abs=1e-12)


def test_normal_force_mixed_example():
    st = FlightState(theta=0.1)
    N = normal_force(P, st, T=10.0, L=20.0, D=2.0, alpha=0.05)
    assert N == pytest.approx(-8.556618964173747, rel=1e-12)


def test_effective_friction_switch():
    assert effective_friction(-29.43, 0.02) == 0.02
    assert effective_friction(0.0, 0.02) == 0.0
    assert effective_friction(5.0, 0.02) == 0.0
    with pytest.raises(ConfigError):
        effective_friction(1.0, -0.5)


def test_parked_derivatives_signed_normal():
    d = derivatives(P, REST, ZERO, GroundContactMode.SIGNED_NORMAL)
    # the -mu*N term with N = -m g pushes the parked aircraft forward
    assert d.du == pytest.approx(0.02 * 9.81, rel=1e-12)
    assert d.dw == pytest.approx(9.81, rel=1e-12)
    assert d.dtheta == 0.0
    assert d.dq == 0.0
    assert d.dh == 0.0


def test_parked_derivatives_opposing_motion():
    d = derivatives(P, REST, ZERO, GroundContactMode.OPPOSING_MOTION)
    assert d.du == 0.0


def test_static_friction_threshold():
    # parked, theta = 0: threshold force is mu*m*g = 0.5886 N
    hold = derivatives(P, REST, ControlCommand(T=0.5), GroundContactMode.OPPOSING_MOTION)
    assert hold.du == 0.0
    push = derivatives(P, REST, ControlCommand(T=1.0), GroundContactMode.OPPOSING_MOTION)
    assert push.du == pytest.approx((1.0 - 0.02 * 29.43) / 3.0, rel=1e-12)


def test_sliding_friction_opposes_motion_sign():
    fwd = derivatives(P, FlightState(u=1.0), ZERO, GroundContactMode.OPPOSING_MOTION)
    back = derivatives(P, FlightState(u=-1.0), ZERO, GroundContactMode.OPPOSING_MOTION)
    assert fwd.du < 0.0  # decelerating forward roll
    assert back.du > 0.0


def test_friction_vanishes_airborne():
    # enough speed and incidence that the wheels are unloaded
    st = FlightState(u=8.0, w=0.8, theta=0.1, q=0.05, h=-10.0)
    cmd = ControlCommand(T=3.0, tau=0.2)
    d_mu = derivatives(P, st, cmd)
    d_0 = derivatives(AircraftParams(mu=0.0), st, cmd)
    for f in ("du", "dw", "dtheta", "dq", "dh"):
        assert getattr(d_mu, f) == getattr(d_0, f)


def test_kinematic_identities():
    rng = np.random.default_rng(11)
    for _ in range(50):
        st = FlightState(u=float(rng.uniform(-5, 10)), w=float(rng.uniform(-5, 5)),
                         theta=float(rng.uniform(-1, 1)), q=float(rng.uniform(-2, 2)),
                         h=float(rng.uniform(-50, 1)))
        cmd = ControlCommand(T=float(rng.uniform(-5, 20)), tau=float(rng.uniform(-3, 3)))
        d = derivatives(P, st, cmd)
        assert d.dtheta == st.q
        assert d.dq == cmd.tau


def test_w_equation_independent_of_thrust():
    rng = np.random.default_rng(13)
    for _ in range(50):
        st = FlightState(u=float(rng.uniform(-5, 10)), w=float(rng.uniform(-5, 5)),
                         theta=float(rng.uniform(-1, 1)), q=float(rng.uniform(-2, 2)),
                         h=float(rng.uniform(-50, 1)))
        d0 = derivatives(P, st, ControlCommand(T=0.0))
        d1 = derivatives(P, st, ControlCommand(T=50.0))
        assert d0.dw == d1.dw


def test_smooth_on_each_side_of_contact_switch():
    # central differences of du along u stabilize as the step shrinks,
    # checked separately for a wheels-loaded and an airborne state
    for st in (FlightState(u=2.0, theta=0.05, h=0.0),
               FlightState(u=8.0, w=0.5, theta=0.1, h=-20.0)):
        cmd = ControlCommand(T=2.0)

        def slope(eps):
            lo = derivatives(P, FlightState(u=st.u - eps, w=st.w, theta=st.theta,
                                            q=st.q, h=st.h), cmd).du
            hi = derivatives(P, FlightState(u=st.u + eps, w=st.w, theta=st.theta,
                                            q=st.q, h=st.h), cmd).du
            return (hi - lo) / (2 * eps)

        assert slope(1e-5) == pytest.approx(slope(1e-6), abs=1e-4)


def test_non_finite_output_rejected():
    st = FlightState(u=1e300, w=1e300)
    with pytest.raises(ArithmeticError, match="not finite"):
        derivatives(P, st, ZERO)
