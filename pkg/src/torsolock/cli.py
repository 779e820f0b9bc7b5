"""Command-line pipeline driver.

Subcommands: ``generate`` (synthetic lean/fall trajectories),
``simulate`` (full pipeline to trace and event CSVs), ``detect``
(detection events only), ``tune`` (closed-form inverse design) and
``sweep`` (parameter grids over the built-in suite).

Files and internal state are SI; summary lines report velocities in
cm/s for direct comparison with bench figures. Exit codes: 0 success,
2 invalid flags or config, 3 I/O failure, 4 pipeline error,
5 infeasible tuning target.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from . import signal as sig
from . import tuning
from .config import RunConfig, default_config, load_config, write_config
from .device import ModeChangeKind, threshold_velocity, write_device_events, write_trace
from .errors import InfeasibleTarget, InvalidProfile, InvalidSpec, TorsolockError
from .motion import (
    FallProfile,
    LeanProfile,
    Trajectory,
    gen_fall,
    gen_lean,
    load_trajectory,
    radial_direction,
    trajectory_to_cable,
    write_trajectory,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PIPELINE = 4
EXIT_INFEASIBLE = 5


def _vec(text: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z, got {text!r}")
    return np.array([float(p) for p in parts])


def _axis(text: str) -> tuple[str, list]:
    name, _, values = text.partition("=")
    if not values:
        raise argparse.ArgumentTypeError(f"expected NAME=v1,v2,..., got {text!r}")
    cast = int if name == "window" else float
    return name, [cast(v) for v in values.split(",")]


def _load_cfg(args) -> RunConfig:
    return load_config(args.config) if args.config else default_config()


def _out_path(args, name: str) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, name)


def _print_trajectory_summary(traj: Trajectory, cfg: RunConfig) -> None:
    cable = trajectory_to_cable(traj, cfg.anchor)
    speed = np.linalg.norm(np.gradient(traj.pos, 1.0 / traj.sample_rate, axis=0), axis=1)
    excursion = float(cable.length.max() - cable.length.min())
    print(
        f"duration {traj.duration:.3f} s | peak speed {100 * speed.max():.1f} cm/s | "
        f"peak payout {100 * excursion:.1f} cm"
    )


def cmd_generate(args) -> int:
    cfg = _load_cfg(args)
    rate = args.rate if args.rate is not None else cfg.sample_rate
    start = np.asarray(cfg.start_pos, dtype=float)

    if args.motion == "lean":
        if args.direction is None:
            direction = radial_direction(cfg.anchor, start)
        else:
            direction = args.direction / np.linalg.norm(args.direction)
        profile = LeanProfile(
            direction=direction,
            amplitude=args.amplitude,
            duration=args.duration,
            hold=args.hold,
        )
        traj = gen_lean(profile, cfg.anchor, start, rate)
    else:
        profile = FallProfile(
            onset=args.onset,
            dip_speed=args.dip,
            recoil_speed=args.recoil if args.recoil is not None else 0.9 * args.dip,
            dip_duration=args.dip_duration,
            recoil_duration=args.recoil_duration,
        )
        traj = gen_fall(profile, cfg.anchor, start, rate, tail=args.tail)

    if args.noise > 0.0:
        rng = np.random.default_rng(args.seed if args.seed is not None else cfg.seed)
        jitter = rng.uniform(-args.noise, args.noise, size=traj.pos.shape)
        traj = Trajectory(sample_rate=traj.sample_rate, t=traj.t, pos=traj.pos + jitter)

    out = args.out or _out_path(args, f"{args.motion}.csv")
    write_trajectory(traj, out)
    _print_trajectory_summary(traj, cfg)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load_cfg(args)
    traj = load_trajectory(args.input)
    res = tuning.run_pipeline(traj, cfg.anchor, cfg.device, cfg.sg)
    t0 = float(traj.t[0])

    trace_path = _out_path(args, "trace.csv")
    events_path = _out_path(args, "events.csv")
    write_trace(res.trace, trace_path, t0=t0)
    write_device_events(res.device_events, events_path, t0=t0)

    locks = sum(1 for e in res.device_events if e.kind is ModeChangeKind.LOCK)
    resets = sum(1 for e in res.device_events if e.kind is ModeChangeKind.RESET)
    print(
        f"LOCK events {locks} | RESET events {resets} | "
        f"max payout {100 * res.trace.length_m.max():.1f} cm | "
        f"peak cable velocity {100 * res.velocity.max():.1f} cm/s | "
        f"threshold {100 * threshold_velocity(cfg.device):.1f} cm/s"
    )
    print(f"wrote {trace_path} and {events_path}")
    return EXIT_OK


def cmd_detect(args) -> int:
    cfg = _load_cfg(args)
    traj = load_trajectory(args.input)
    cable = trajectory_to_cable(traj, cfg.anchor)
    velocity = sig.differentiate(sig.sg_filter(cable.length, cfg.sg), traj.sample_rate)
    events = sig.detect(velocity, traj.sample_rate, cfg.detector)

    out = args.out or _out_path(args, "detections.csv")
    sig.write_events(events, out, t0=float(traj.t[0]))
    locks = [e for e in events if e.kind is sig.EventKind.LOCK_TRIGGER]
    first = f"{float(traj.t[0]) + locks[0].t:.3f} s" if locks else "none"
    print(f"events {len(events)} | lock triggers {len(locks)} | first trigger {first}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_tune(args) -> int:
    cfg = _load_cfg(args)
    target = tuning.TuneTarget(v_star=args.v_star, free=args.free)
    device = tuning.solve_retention(target, cfg.device)
    detector = cfg.detector
    if detector.mode is sig.DetectorMode.VELOCITY_THRESHOLD:
        detector = replace(detector, v_lock=args.v_star)
    tuned = replace(cfg, device=device, detector=detector)

    out = args.out or _out_path(args, "tuned_config.toml")
    write_config(tuned, out)
    print(
        f"solved {args.free} = {getattr(device, args.free):.6g} | "
        f"threshold {100 * threshold_velocity(device):.2f} cm/s"
    )
    print(f"wrote {out}")

    if args.sweep_axis:
        grid = dict(args.sweep_axis)
        suite = tuning.default_suite(tuned.anchor, tuned.start_pos, tuned.sample_rate)
        rows = tuning.sweep(grid, suite, device, detector, tuned.anchor, tuned.sg)
        sweep_path = _out_path(args, "tune_sweep.csv")
        tuning.write_sweep(rows, sweep_path)
        print(f"wrote {sweep_path} ({len(rows)} rows)")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_cfg(args)
    grid = dict(args.axis)
    suite = tuning.default_suite(
        cfg.anchor, cfg.start_pos, cfg.sample_rate, n_lean=args.leans, n_fall=args.falls
    )
    rows = tuning.sweep(grid, suite, cfg.device, cfg.detector, cfg.anchor, cfg.sg)
    out = args.out or _out_path(args, "sweep.csv")
    tuning.write_sweep(rows, out)
    print(f"wrote {out} ({len(rows)} rows over {len(suite)} scenarios)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torsolock",
        description="Simulate and tune the cable-driven torso-stabiliser lock.",
    )
    parser.add_argument("--config", help="TOML run configuration (defaults used if omitted)")
    parser.add_argument("--out-dir", default=".", help="directory for output files")
    parser.add_argument("--seed", type=int, default=None, help="noise seed override")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic trajectory CSV")
    gen_sub = gen.add_subparsers(dest="motion", required=True)
    lean = gen_sub.add_parser("lean", help="minimum-jerk out/hold/return reach")
    lean.add_argument("--amplitude", type=float, required=True, help="reach distance, m")
    lean.add_argument("--duration", type=float, required=True, help="one-way movement time, s")
    lean.add_argument("--hold", type=float, default=0.0, help="dwell at full reach, s")
    lean.add_argument(
        "--direction", type=_vec, default=None,
        help="motion direction x,y,z (normalised; default radial from the device anchor)",
    )
    fall = gen_sub.add_parser("fall", help="forward surge plus backward correction")
    fall.add_argument("--dip", type=float, required=True, help="forward surge peak, m/s")
    fall.add_argument("--recoil", type=float, default=None,
                      help="backward correction peak, m/s (default 0.9 * dip)")
    fall.add_argument("--onset", type=float, default=2.0, help="surge onset, s")
    fall.add_argument("--dip-duration", type=float, default=0.25)
    fall.add_argument("--recoil-duration", type=float, default=0.25)
    fall.add_argument("--tail", type=float, default=1.0, help="rest after the episode, s")
    for p in (lean, fall):
        p.add_argument("--rate", type=float, default=None, help="sample rate, Hz")
        p.add_argument("--noise", type=float, default=0.0,
                       help="uniform marker jitter amplitude, m (off by default)")
        p.add_argument("--out", default=None, help="output CSV path")
        p.set_defaults(func=cmd_generate)

    sim = sub.add_parser("simulate", help="full pipeline: trace.csv and events.csv")
    sim.add_argument("input", help="trajectory CSV (header t,x,y,z)")
    sim.set_defaults(func=cmd_simulate)

    det = sub.add_parser("detect", help="detection events only")
    det.add_argument("input", help="trajectory CSV (header t,x,y,z)")
    det.add_argument("--out", default=None, help="output CSV path")
    det.set_defaults(func=cmd_detect)

    tune = sub.add_parser("tune", help="solve mechanism parameters for a target threshold")
    tune.add_argument("--v-star", type=float, required=True, help="target lock velocity, m/s")
    tune.add_argument("--free", default="F_retain", choices=["F_retain", "m_fly", "r_fly"],
                      help="parameter to solve for")
    tune.add_argument("--out", default=None, help="output config path")
    tune.add_argument("--sweep-axis", type=_axis, action="append", default=None,
                      metavar="NAME=v1,v2,...",
                      help="also sweep the built-in suite over these axes")
    tune.set_defaults(func=cmd_tune)

    swp = sub.add_parser("sweep", help="evaluate the built-in suite over a parameter grid")
    swp.add_argument("--axis", type=_axis, action="append", required=True,
                     metavar="NAME=v1,v2,...",
                     help="grid axis (F_retain, m_fly, r_fly, window, v_lock); repeatable")
    swp.add_argument("--leans", type=int, default=5, help="daily-living scenarios in the suite")
    swp.add_argument("--falls", type=int, default=5, help="fall scenarios in the suite")
    swp.add_argument("--out", default=None, help="output CSV path")
    swp.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    try:
        return args.func(args)
    except InfeasibleTarget as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InvalidSpec, InvalidProfile) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except TorsolockError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PIPELINE
    except Exception as e:  # no undocumented exit codes
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
