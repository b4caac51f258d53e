"""Command-line front end: run scenarios, emit CSV telemetry, summarize.

Subcommands: ``takeoff`` and ``landing`` run one scenario and print a run
summary, ``sweep`` runs one scenario per parameter value, and ``check``
executes the invariant suite headlessly. Configs are INI files whose
missing keys fall back to the built-in defaults for the maneuver.
"""

import argparse
import configparser
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .airframe import AeroCoeffModel, AircraftParams, FlightState
from .control import ControlGains, E1RateScale, SaturationParams
from .dynamics import GroundContactMode
from .errors import ConfigError, SimulationError
from .guidance import Maneuver, PitchProfileParams, RampSpec
from .simulator import (
    STOP_SPEED,
    EventKind,
    ScenarioConfig,
    SimRecord,
    detect_events,
    engine_name,
    landing_config,
    run_scenario,
    takeoff_config,
)

__all__ = [
    "RunSummary",
    "parse_config",
    "build_config",
    "emit_csv",
    "read_csv",
    "summarize",
    "summarize_csv",
    "main",
]

CSV_COLUMNS = (
    "t", "u", "u_d", "w", "theta", "theta_d", "q", "q_d", "T", "tau",
    "h", "altitude", "V", "phase", "N", "F_mu", "e1", "e2", "e3",
    "Vlyap", "Vdot_total",
)

# Section -> allowed keys; anything else in a config file is rejected.
_SCHEMA = {
    "aircraft": ("m", "S", "rho", "C_L_max", "mu", "g",
                 "C_L0", "C_L_alpha", "C_D0", "k_induced"),
    "gains": ("k_T", "k_theta", "k_q", "e1_rate_scaling"),
    "saturation": ("L", "M"),
    "pitch_profile": ("theta_lim", "c", "d"),
    "initial": ("u", "w", "theta", "q", "h"),
    "sim": ("dt", "t_max", "contact_mode", "thrust_clamp", "ramp_durations"),
}

_GROUNDED_LABELS = frozenset({"Taxi", "Acceleration", "Rotation", "Touchdown", "Ground"})
_AIRBORNE_LABELS = frozenset({"Climb", "Approach", "Flare"})


@dataclass(frozen=True)
class RunSummary:
    """Human-facing digest of a run; recomputable from the emitted CSV."""

    maneuver: str
    n_records: int
    t_final: float
    terminal_phase: str
    liftoff_t: float | None
    touchdown_t: float | None
    stop_t: float | None
    e1: float
    e2: float
    e3: float
    final_altitude: float
    frac_vdot_nonpos: float
    max_vdot_pos: float

    def __str__(self):
        def ev(t):
            return f"{t:.3f} s" if t is not None else "-"

        return "\n".join([
            f"maneuver:          {self.maneuver}",
            f"records:           {self.n_records} (t_final = {self.t_final:.3f} s)",
            f"terminal phase:    {self.terminal_phase}",
            f"liftoff:           {ev(self.liftoff_t)}",
            f"touchdown:         {ev(self.touchdown_t)}",
            f"stop:              {ev(self.stop_t)}",
            f"terminal errors:   e1={self.e1:.6g} m/s  e2={self.e2:.6g} rad  e3={self.e3:.6g} rad/s",
            f"final altitude:    {self.final_altitude:.3f} m",
            f"Vdot_total <= 0:   {self.frac_vdot_nonpos:.2%} of steps",
            f"max Vdot_total+:   {self.max_vdot_pos:.6g}",
        ])


def _read_ini(path: str) -> dict[str, dict[str, str]]:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys like C_L_max and k_T are case sensitive
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cp.read_file(fh, source=path)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}")
    raw: dict[str, dict[str, str]] = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(
                f"unknown config section [{section}] in {path}; "
                f"expected one of {sorted(_SCHEMA)}"
            )
        allowed = _SCHEMA[section]
        raw[section] = {}
        for key, value in cp.items(section):
            if key not in allowed:
                raise ConfigError(
                    f"unknown key {key!r} in section [{section}] of {path}; "
                    f"allowed keys: {', '.join(allowed)}"
                )
            raw[section][key] = value
    return raw


def _f(raw: dict, section: str, key: str, default: float) -> float:
    s = raw.get(section, {}).get(key)
    if s is None:
        return default
    try:
        return float(s)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected a number, got {s!r}")


def _b(raw: dict, section: str, key: str, default: bool) -> bool:
    s = raw.get(section, {}).get(key)
    if s is None:
        return default
    states = configparser.ConfigParser.BOOLEAN_STATES
    try:
        return states[s.strip().lower()]
    except KeyError:
        raise ConfigError(f"[{section}] {key}: expected a boolean, got {s!r}")


def build_config(maneuver: Maneuver, raw: dict[str, dict[str, str]]) -> ScenarioConfig:
    """Merge raw INI values over the maneuver's defaults."""
    base = takeoff_config() if maneuver is Maneuver.TAKEOFF else landing_config()

    params = AircraftParams(
        m=_f(raw, "aircraft", "m", base.params.m),
        S=_f(raw, "aircraft", "S", base.params.S),
        rho=_f(raw, "aircraft", "rho", base.params.rho),
        C_L_max=_f(raw, "aircraft", "C_L_max", base.params.C_L_max),
        mu=_f(raw, "aircraft", "mu", base.params.mu),
        g=_f(raw, "aircraft", "g", base.params.g),
        aero=AeroCoeffModel(
            C_L0=_f(raw, "aircraft", "C_L0", base.params.aero.C_L0),
            C_L_alpha=_f(raw, "aircraft", "C_L_alpha", base.params.aero.C_L_alpha),
            C_D0=_f(raw, "aircraft", "C_D0", base.params.aero.C_D0),
            k_induced=_f(raw, "aircraft", "k_induced", base.params.aero.k_induced),
        ),
    )
    gains = ControlGains(
        k_T=_f(raw, "gains", "k_T", base.gains.k_T),
        k_theta=_f(raw, "gains", "k_theta", base.gains.k_theta),
        k_q=_f(raw, "gains", "k_q", base.gains.k_q),
    )
    scale_s = raw.get("gains", {}).get("e1_rate_scaling", base.e1_scale.value)
    try:
        e1_scale = E1RateScale(scale_s.strip().lower())
    except ValueError:
        raise ConfigError(
            f"[gains] e1_rate_scaling: expected 'per_mass' or 'direct', got {scale_s!r}"
        )
    satp = SaturationParams(
        L_sat=_f(raw, "saturation", "L", base.satp.L_sat),
        M_sat=_f(raw, "saturation", "M", base.satp.M_sat),
    )
    pitch = PitchProfileParams(
        theta_lim=_f(raw, "pitch_profile", "theta_lim", base.pitch.theta_lim),
        c=_f(raw, "pitch_profile", "c", base.pitch.c),
        d=_f(raw, "pitch_profile", "d", base.pitch.d),
    )
    initial = FlightState(
        u=_f(raw, "initial", "u", base.initial.u),
        w=_f(raw, "initial", "w", base.initial.w),
        theta=_f(raw, "initial", "theta", base.initial.theta),
        q=_f(raw, "initial", "q", base.initial.q),
        h=_f(raw, "initial", "h", base.initial.h),
        t=0.0,
    )
    mode_s = raw.get("sim", {}).get("contact_mode", base.contact_mode.value)
    try:
        contact_mode = GroundContactMode(mode_s.strip().lower())
    except ValueError:
        raise ConfigError(
            f"[sim] contact_mode: expected 'signed_normal' or 'opposing_motion', got {mode_s!r}"
        )
    ramp_s = raw.get("sim", {}).get("ramp_durations")
    if ramp_s is None:
        ramp = base.ramp
    else:
        try:
            ramp = RampSpec(tuple(float(x) for x in ramp_s.split(",") if x.strip()))
        except ValueError:
            raise ConfigError(f"[sim] ramp_durations: expected comma-separated numbers, got {ramp_s!r}")

    return ScenarioConfig(
        maneuver=maneuver,
        params=params,
        gains=gains,
        satp=satp,
        pitch=pitch,
        ramp=ramp,
        initial=initial,
        dt=_f(raw, "sim", "dt", base.dt),
        t_max=_f(raw, "sim", "t_max", base.t_max),
        contact_mode=contact_mode,
        thrust_clamp=_b(raw, "sim", "thrust_clamp", base.thrust_clamp),
        e1_scale=e1_scale,
    )


def parse_config(path: str | None, maneuver: Maneuver = Maneuver.TAKEOFF) -> ScenarioConfig:
    """Load a scenario config; ``path=None`` yields the maneuver defaults."""
    raw = _read_ini(path) if path is not None else {}
    return build_config(maneuver, raw)


def emit_csv(records: list[SimRecord], path: str) -> None:
    """Write one full-precision row per record in the fixed column order."""
    if not records:
        raise ConfigError("emit_csv needs a non-empty record stream")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for r in records:
                s = r.state
                sp = r.setpoint
                row = (
                    r.t, s.u, sp.u_d, s.w, s.theta, sp.theta_d, s.q, sp.q_d,
                    r.cmd.T, r.cmd.tau, s.h, -s.h, r.V, r.phase.label,
                    r.N, r.F_mu, r.errors.e1, r.errors.e2, r.errors.e3,
                    r.lyap.Vlyap, r.lyap.Vdot_total,
                )
                fh.write(",".join(v if isinstance(v, str) else repr(v) for v in row) + "\n")
    except OSError as exc:
        raise SimulationError(f"could not write CSV {path}: {exc}")


def read_csv(path: str) -> dict[str, list]:
    """Read back an emitted CSV; floats everywhere except the phase labels."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        if tuple(header) != CSV_COLUMNS:
            raise ConfigError(f"{path} does not have the expected column header")
        cols: dict[str, list] = {name: [] for name in CSV_COLUMNS}
        for line in fh:
            parts = line.rstrip("\n").split(",")
            for name, value in zip(CSV_COLUMNS, parts):
                cols[name].append(value if name == "phase" else float(value))
    return cols


def _summarize_cols(maneuver: str, cols: dict[str, list]) -> RunSummary:
    n = len(cols["t"])
    liftoff = touchdown = stop = None
    for i in range(n):
        if liftoff is None and cols["phase"][i] in _GROUNDED_LABELS and cols["N"][i] >= 0.0:
            liftoff = cols["t"][i]
        if (touchdown is None and i > 0 and cols["h"][i - 1] < 0.0 <= cols["h"][i]
                and cols["phase"][i - 1] in _AIRBORNE_LABELS):
            touchdown = cols["t"][i]
        if stop is None and cols["phase"][i] == "Ground" and cols["u"][i] <= STOP_SPEED:
            stop = cols["t"][i]
    vdot = cols["Vdot_total"]
    n_nonpos = sum(1 for v in vdot if v <= 0.0)
    max_pos = max((v for v in vdot if v > 0.0), default=0.0)
    return RunSummary(
        maneuver=maneuver,
        n_records=n,
        t_final=cols["t"][-1],
        terminal_phase=cols["phase"][-1],
        liftoff_t=liftoff,
        touchdown_t=touchdown,
        stop_t=stop,
        e1=cols["e1"][-1],
        e2=cols["e2"][-1],
        e3=cols["e3"][-1],
        final_altitude=-cols["h"][-1],
        frac_vdot_nonpos=n_nonpos / n,
        max_vdot_pos=max_pos,
    )


def summarize(maneuver: Maneuver, records: list[SimRecord]) -> RunSummary:
    """Digest a record stream (same result as summarizing its CSV)."""
    if not records:
        raise ConfigError("summarize needs a non-empty record stream")
    cols = {
        "t": [r.t for r in records],
        "u": [r.state.u for r in records],
        "h": [r.state.h for r in records],
        "phase": [r.phase.label for r in records],
        "N": [r.N for r in records],
        "e1": [r.errors.e1 for r in records],
        "e2": [r.errors.e2 for r in records],
        "e3": [r.errors.e3 for r in records],
        "Vdot_total": [r.lyap.Vdot_total for r in records],
    }
    return _summarize_cols(maneuver.value, cols)


def summarize_csv(maneuver: Maneuver, path: str) -> RunSummary:
    return _summarize_cols(maneuver.value, read_csv(path))


def _run_one(maneuver: Maneuver, args) -> int:
    cfg = parse_config(args.config, maneuver)
    engine = None if args.engine == "auto" else args.engine
    records = run_scenario(cfg, engine=engine)
    if args.out:
        emit_csv(records, args.out)
    print(f"engine:            {engine or engine_name()}")
    print(summarize(maneuver, records))
    if args.out:
        print(f"csv:               {args.out}")
    return 0


def _resolve_sweep_param(name: str) -> tuple[str, str]:
    if "." in name:
        section, key = name.split(".", 1)
        if section not in _SCHEMA or key not in _SCHEMA[section]:
            raise ConfigError(f"unknown sweep parameter {name!r}")
        return section, key
    hits = [(s, k) for s, keys in _SCHEMA.items() for k in keys if k == name]
    if not hits:
        raise ConfigError(f"unknown sweep parameter {name!r}")
    if len(hits) > 1:
        options = ", ".join(f"{s}.{k}" for s, k in hits)
        raise ConfigError(f"ambiguous sweep parameter {name!r}; use one of {options}")
    return hits[0]


def _run_sweep(args) -> int:
    import os

    maneuver = Maneuver(args.maneuver)
    section, key = _resolve_sweep_param(args.param)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("sweep needs at least one value")
    raw_base = _read_ini(args.config) if args.config else {}
    engine = None if args.engine == "auto" else args.engine
    os.makedirs(args.out, exist_ok=True)

    cfgs = []
    for v in values:
        raw = {s: dict(kv) for s, kv in raw_base.items()}
        raw.setdefault(section, {})[key] = v
        cfgs.append(build_config(maneuver, raw))

    def job(cfg):
        return run_scenario(cfg, engine=engine)

    with ThreadPoolExecutor(max_workers=min(len(cfgs), 8)) as pool:
        runs = list(pool.map(job, cfgs))

    print(f"engine:            {engine or engine_name()}")
    print(f"sweep:             {section}.{key} over {', '.join(values)}")
    header = f"{'value':>12}  {'terminal':>12}  {'t_final':>9}  {'|e1|':>10}  {'altitude':>9}  csv"
    print(header)
    for v, records in zip(values, runs):
        path = os.path.join(args.out, f"{maneuver.value}_{key}_{v}.csv")
        emit_csv(records, path)
        s = summarize(maneuver, records)
        print(f"{v:>12}  {s.terminal_phase:>12}  {s.t_final:9.3f}  {abs(s.e1):10.3g}  "
              f"{s.final_altitude:9.3f}  {path}")
    return 0


def _run_check(args) -> int:
    from . import checks

    engine = None if args.engine == "auto" else args.engine
    results = checks.run_all(engine=engine)
    width = max(len(r.name) for r in results)
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        print(f"{mark}  {r.name:<{width}}  {r.detail}")
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="tolsim",
        description="Simulate take-off and landing of a fixed-wing aircraft "
                    "under a unified saturated tracking controller.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--engine", choices=("auto", "python", "compiled"), default="auto",
                       help="stepping engine (default: compiled when built)")

    p_to = sub.add_parser("takeoff", help="run a take-off scenario")
    p_to.add_argument("--config", help="INI config path (defaults are built in)")
    p_to.add_argument("--out", help="write per-step CSV telemetry here")
    add_common(p_to)

    p_ld = sub.add_parser("landing", help="run a landing scenario")
    p_ld.add_argument("--config", help="INI config path (defaults are built in)")
    p_ld.add_argument("--out", help="write per-step CSV telemetry here")
    add_common(p_ld)

    p_sw = sub.add_parser("sweep", help="run one scenario per parameter value")
    p_sw.add_argument("--param", required=True,
                      help="config key to sweep, e.g. k_T or gains.k_T")
    p_sw.add_argument("--values", required=True, help="comma-separated values")
    p_sw.add_argument("--config", help="base INI config")
    p_sw.add_argument("--out", required=True, help="directory for the per-value CSVs")
    p_sw.add_argument("--maneuver", choices=("takeoff", "landing"), default="takeoff")
    add_common(p_sw)

    p_ck = sub.add_parser("check", help="run the invariant and property suite")
    add_common(p_ck)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    try:
        if args.command == "takeoff":
            return _run_one(Maneuver.TAKEOFF, args)
        if args.command == "landing":
            return _run_one(Maneuver.LANDING, args)
        if args.command == "sweep":
            return _run_sweep(args)
        return _run_check(args)
    except (ConfigError, SimulationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
