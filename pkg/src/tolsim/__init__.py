"""Take-off and landing simulation for fixed-wing longitudinal dynamics.

A single saturated tracking controller drives both maneuvers: thrust
cancels the known speed dynamics down to a saturated error law, and a PD
law with feedforward tracks a Gaussian pitch profile evaluated along the
speed reference. Rolling resistance switches on the sign of the wheel
normal force. A monitor samples the tracking-energy function and its
analytic decay terms along every run.
"""

from .airframe import (
    AeroCoeffModel,
    AircraftParams,
    FlightState,
    airspeed,
    angle_of_attack,
    lift_drag,
    stall_speed,
)
from .control import (
    ControlGains,
    E1RateScale,
    ErrorVector,
    LyapunovSample,
    SaturationParams,
    lyapunov_sample,
    saturate,
    thrust_command,
    torque_command,
)
from .dynamics import (
    ControlCommand,
    GroundContactMode,
    StateDerivative,
    derivatives,
    effective_friction,
    normal_force,
)
from .errors import ConfigError, SimulationError
from .guidance import (
    LandingSchedule,
    Maneuver,
    PhaseTag,
    PitchProfileParams,
    RampSpec,
    Setpoint,
    SpeedProfile,
    TakeoffSchedule,
    advance_phase,
    desired_pitch,
    landing_schedule,
    reference_speed,
    setpoint,
    takeoff_schedule,
)
from .simulator import (
    EventKind,
    STOP_SPEED,
    ScenarioConfig,
    SimRecord,
    detect_events,
    engine_name,
    landing_config,
    rk4_step,
    run_scenario,
    takeoff_config,
)

__version__ = "0.1.0"
