"""Acceptance suite: one test per criterion, tolerances fixed.

Each test prints a PASS/FAIL line (visible with ``pytest -s`` or on
failure) and asserts the criterion. Criterion 3 includes a clause that
the friction coefficient is zero at every post-liftoff step; the specified
model cannot satisfy it at dt = 1 ms because steady climbing flight sits
exactly on the friction switching surface (constant velocity means the
aerodynamic support equals the weight, so N = 0 identically) and the
fixed-step zero-order-hold loop chatters across it at the 1e-6 N level.
That clause is asserted as stated and fails honestly; the companion
friction-switch invariant (criterion 10) holds exactly.
"""

import pytest

from tolsim import checks


def _report(n, result):
    mark = "PASS" if result.passed else "FAIL"
    print(f"{mark} criterion {n}: {result.name} - {result.detail}")
    assert result.passed, f"criterion {n} ({result.name}): {result.detail}"


def test_criterion_01_stall_speed():
    _report(1, checks.check_stall_speed())


def test_criterion_02_threshold_ladder():
    _report(2, checks.check_speed_ladders())


def test_criterion_03_takeoff_reproduction(takeoff_run):
    _report(3, checks.check_takeoff_reproduction(takeoff_run))


def test_criterion_04_landing_reproduction(landing_run):
    _report(4, checks.check_landing_reproduction(landing_run))


def test_criterion_05_feedback_linearization_oracle():
    _report(5, checks.check_feedback_linearization())


def test_criterion_06_lyapunov_monitor(takeoff_unclamped_run, landing_run):
    _report(6, checks.check_lyapunov_monitor(takeoff_unclamped_run, landing_run))


def test_criterion_07_saturation_properties():
    _report(7, checks.check_saturation_properties())


def test_criterion_08_trajectory_gradients():
    _report(8, checks.check_trajectory_gradients())


def test_criterion_09_integrator_order():
    _report(9, checks.check_rk4_order())


def test_criterion_10_friction_switch_invariant(takeoff_run, takeoff_unclamped_run, landing_run):
    _report(10, checks.check_friction_switch([takeoff_run, takeoff_unclamped_run, landing_run]))
