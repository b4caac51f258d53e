#!/usr/bin/env python3
"""Benchmark the compiled stepping engine against the pure-Python one.

Measures the raw engine loop (record-array production) and the full
run_scenario path (including record object construction), which is what
library callers see.

Usage: python benchmarks/bench_engines.py [--repeats N]
"""

import argparse
import time

from tolsim.guidance import SpeedProfile
from tolsim.simulator import (
    _build_schedule,
    _count_steps,
    _plan_for_compiled,
    _run_python,
    available_engines,
    landing_config,
    run_scenario,
    takeoff_config,
)


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_engine_loop(cfg, repeats):
    schedule = _build_schedule(cfg)
    profile = SpeedProfile(schedule, cfg.ramp)
    n_steps = _count_steps(cfg.dt, cfg.t_max)
    results = {}
    results["python"] = best_of(lambda: _run_python(cfg, profile, schedule, n_steps), repeats)
    if "compiled" in available_engines():
        from tolsim import _engine

        plan = _plan_for_compiled(cfg, profile, schedule, n_steps)
        results["compiled"] = best_of(lambda: _engine.run_closed_loop(plan), repeats)
    return n_steps, results


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    scenarios = [
        ("take-off, 30 s @ 1 ms", takeoff_config()),
        ("landing, 40 s horizon @ 1 ms", landing_config()),
    ]
    print(f"engines available: {', '.join(available_engines())}\n")
    for label, cfg in scenarios:
        n_steps, res = bench_engine_loop(cfg, args.repeats)
        print(f"{label}  ({n_steps} steps max)")
        for name in ("python", "compiled"):
            if name in res:
                rate = n_steps / res[name]
                print(f"  engine loop   {name:>8}: {res[name] * 1e3:8.1f} ms  ({rate / 1e3:8.1f} ksteps/s)")
        if "compiled" in res:
            print(f"  loop speedup: {res['python'] / res['compiled']:.1f}x")
        full = {}
        for name in res:
            full[name] = best_of(lambda n=name: run_scenario(cfg, engine=n), args.repeats)
            print(f"  run_scenario  {name:>8}: {full[name] * 1e3:8.1f} ms")
        if "compiled" in full:
            print(f"  end-to-end speedup: {full['python'] / full['compiled']:.1f}x")
        print()


if __name__ == "__main__":
    main()
