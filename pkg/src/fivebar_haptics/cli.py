"""Command-line entry points.

Exit codes: 0 success, 1 domain error (unreachable target, bad file, ...),
2 usage error (argparse).  All commands run against the simulated device by
default; point ``pattern play`` at real hardware with ``--port-path``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .device import DEFAULT_CONFIG, FingerProfile, calibrate, load_config
from .errors import DomainError
from .experiment import (
    TrialSession,
    build_report,
    build_schedule,
    read_log,
    record_response,
    render_report_text,
    report_to_dict,
    SessionLogWriter,
)
from .kinematics import (
    Elbow,
    ElbowConfig,
    Rect,
    inverse_kinematics,
    symmetric_normal_force,
    workspace_grid,
)
from .patterns import (
    DEFAULT_RATE_HZ,
    builtin_catalog,
    compile_schedule,
    load_catalog,
    slippage_trajectory,
    static_trajectory,
)
from .servo import LoopbackTransport, SerialTransport, VirtualClock, play

_ELBOW_CHOICES = {
    "out-out": ElbowConfig(Elbow.OUT, Elbow.OUT),
    "out-in": ElbowConfig(Elbow.OUT, Elbow.IN),
    "in-out": ElbowConfig(Elbow.IN, Elbow.OUT),
    "in-in": ElbowConfig(Elbow.IN, Elbow.IN),
}


def _load_device_config(path: str | None):
    if path is None:
        return DEFAULT_CONFIG
    return load_config(Path(path).read_text())


def _resolve_catalog(name: str):
    if name in ("static", "slippage"):
        return builtin_catalog(name)
    return load_catalog(Path(name).read_text())


def _cmd_workspace(args) -> int:
    cfg = _load_device_config(args.config)
    bounds = Rect(args.x_min, args.x_max, args.y_min, args.y_max)
    wm = workspace_grid(cfg.linkage_a, bounds, args.resolution, cfg.elbows, cfg.margins)
    csv_text = wm.to_csv()
    if args.csv is None or args.csv == "-":
        sys.stdout.write(csv_text)
    else:
        Path(args.csv).write_text(csv_text)
    if args.png is not None:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(7, 5))
        extent = (bounds.x_min, bounds.x_max, bounds.y_min, bounds.y_max)
        ax.imshow(wm.cells, origin="lower", extent=extent, cmap="viridis", vmin=0, vmax=2)
        ax.set_xlabel("x [mm]")
        ax.set_ylabel("y [mm]")
        ax.set_title("workspace: 0 unreachable, 1 reachable, 2 near-singular")
        fig.savefig(args.png, dpi=120)
        plt.close(fig)
    return 0


def _cmd_ik(args) -> int:
    cfg = _load_device_config(args.config)
    angles = inverse_kinematics(
        cfg.linkage_a, (args.x, args.y), _ELBOW_CHOICES[args.elbows], cfg.margins
    )
    print(f"alpha_left={angles.alpha_left:.2f} alpha_right={angles.alpha_right:.2f}")
    return 0


def _cmd_force(args) -> int:
    cfg = _load_device_config(args.config)
    tau = args.tau if args.tau is not None else cfg.servo_map[0].stall_torque_nm
    breakdown = symmetric_normal_force(cfg.linkage_a, args.depth, tau)
    print(f"alpha={breakdown.alpha:.2f} deg")
    print(f"beta={breakdown.beta:.2f} deg")
    print(f"gamma={breakdown.gamma:.2f} deg")
    print(f"phi={breakdown.phi:.2f} deg")
    print(f"F1={breakdown.f1:.3f} N")
    print(f"F2={breakdown.f2:.3f} N")
    print(f"Fn={breakdown.fn:.3f} N")
    return 0


def _cmd_pattern_play(args) -> int:
    cfg = _load_device_config(args.config)
    cal = calibrate(FingerProfile(thickness=args.thickness, width=args.width), cfg)
    catalog = _resolve_catalog(args.catalog)
    pattern = catalog.get(args.id)
    if hasattr(pattern, "hold_s"):
        traj = static_trajectory(pattern, cal, args.rate)
    else:
        traj = slippage_trajectory(pattern, cal, args.rate)
    schedule = compile_schedule(traj, cfg, cal)
    if args.port_path is not None:
        transport = SerialTransport(args.port_path, args.baud)
        clock = None  # wall-clock pacing against real hardware
    else:
        transport = LoopbackTransport()
        clock = VirtualClock()
    try:
        report = play(schedule, cfg.servo_map, transport, clock=clock)
    finally:
        if args.capture is not None and isinstance(transport, LoopbackTransport):
            Path(args.capture).write_bytes(transport.data)
        transport.close()
    print(
        f"pattern={pattern.id} ticks={len(schedule.entries)} "
        f"frames={report.frames_sent} duration={report.duration:.3f}s "
        f"max_jitter={report.max_jitter * 1000:.2f}ms underruns={report.underruns}"
    )
    return 0


def _cmd_experiment_run(args) -> int:
    cfg = _load_device_config(args.config)
    cal = calibrate(FingerProfile(thickness=args.thickness, width=args.width), cfg)
    catalog = _resolve_catalog(args.catalog)
    schedule = build_schedule(catalog, args.reps, args.seed)
    session = TrialSession(
        subject_id=args.subject, catalog_name=catalog.name, schedule=schedule
    )
    log_path = Path(args.log)
    with open(log_path, "w", encoding="utf-8") as stream:
        writer = SessionLogWriter(stream)
        writer.schedule(session)
        for trial in schedule.trials:
            pattern = catalog.get(trial.pattern_id)
            if hasattr(pattern, "hold_s"):
                traj = static_trajectory(pattern, cal, args.rate)
            else:
                traj = slippage_trajectory(pattern, cal, args.rate)
            play(
                compile_schedule(traj, cfg, cal),
                cfg.servo_map,
                LoopbackTransport(),
                clock=VirtualClock(),
            )
            writer.stimulus_delivered(trial.trial_id, trial.pattern_id)
            if args.auto:
                answer = trial.pattern_id
            else:
                prompt = f"trial {trial.trial_id}/{len(schedule.trials)}: pattern number? "
                answer = int(input(prompt))
            record_response(session, trial.trial_id, answer)
            writer.response(trial.trial_id, answer)
    report = build_report([session])
    sys.stdout.write(render_report_text(report))
    print(f"log written to {log_path}")
    return 0


def _cmd_report(args) -> int:
    sessions = []
    for path in args.logs:
        sessions.extend(read_log(Path(path).read_text()))
    report = build_report(sessions)
    if args.json:
        import json

        sys.stdout.write(json.dumps(report_to_dict(report), indent=2) + "\n")
    else:
        sys.stdout.write(render_report_text(report))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceHub, create_app

    cfg = _load_device_config(args.config)
    hub = ServiceHub(config=cfg, log_dir=args.log_dir, simulate=not args.hardware)
    uvicorn.run(create_app(hub), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fivebar",
        description="Two-point five-bar fingertip haptic display toolkit",
    )
    parser.add_argument("--config", help="device configuration file (JSON)")
    sub = parser.add_subparsers(dest="command", required=True)

    ws = sub.add_parser("workspace", help="classify and export the reachable workspace")
    ws.add_argument("--x-min", type=float, default=-45.0)
    ws.add_argument("--x-max", type=float, default=45.0)
    ws.add_argument("--y-min", type=float, default=-55.0)
    ws.add_argument("--y-max", type=float, default=-5.0)
    ws.add_argument("--resolution", type=float, default=1.0)
    ws.add_argument("--csv", help="CSV output path ('-' for stdout, the default)")
    ws.add_argument("--png", help="also render the map to this PNG file")
    ws.set_defaults(func=_cmd_workspace)

    ik = sub.add_parser("ik", help="joint angles for a target point")
    ik.add_argument("x", type=float)
    ik.add_argument("y", type=float)
    ik.add_argument("--elbows", choices=sorted(_ELBOW_CHOICES), default="out-out")
    ik.set_defaults(func=_cmd_ik)

    force = sub.add_parser("force", help="symmetric contact force breakdown")
    force.add_argument("--depth", type=float, default=22.0, help="contact depth H in mm")
    force.add_argument("--tau", type=float, help="per-motor torque in N*m (default: stall)")
    force.set_defaults(func=_cmd_force)

    pattern = sub.add_parser("pattern", help="pattern operations")
    pattern_sub = pattern.add_subparsers(dest="pattern_command", required=True)
    pplay = pattern_sub.add_parser("play", help="compile and play one pattern")
    pplay.add_argument("id", type=int)
    pplay.add_argument("--catalog", default="static", help="static, slippage, or a file path")
    pplay.add_argument("--rate", type=float, default=DEFAULT_RATE_HZ)
    pplay.add_argument("--thickness", type=float, default=15.0)
    pplay.add_argument("--width", type=float, default=16.0)
    pplay.add_argument("--capture", help="write the wire bytes to this file")
    pplay.add_argument("--port-path", help="serial device path (plays on hardware)")
    pplay.add_argument("--baud", type=int, default=115200)
    pplay.set_defaults(func=_cmd_pattern_play)

    experiment = sub.add_parser("experiment", help="experiment operations")
    experiment_sub = experiment.add_subparsers(dest="experiment_command", required=True)
    erun = experiment_sub.add_parser("run", help="run a full session (simulated device)")
    erun.add_argument("--catalog", default="static")
    erun.add_argument("--reps", type=int, default=5)
    erun.add_argument("--seed", type=int, default=0)
    erun.add_argument("--subject", required=True)
    erun.add_argument("--log", required=True, help="session log path (JSON lines)")
    erun.add_argument("--rate", type=float, default=DEFAULT_RATE_HZ)
    erun.add_argument("--thickness", type=float, default=15.0)
    erun.add_argument("--width", type=float, default=16.0)
    erun.add_argument("--auto", action="store_true", help="answer every trial correctly")
    erun.set_defaults(func=_cmd_experiment_run)

    report = sub.add_parser("report", help="analyze one or more session logs")
    report.add_argument("logs", nargs="+")
    report.add_argument("--json", action="store_true")
    report.set_defaults(func=_cmd_report)

    serve = sub.add_parser("serve", help="run the local HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=7430)
    serve.add_argument("--log-dir", default=".")
    serve.add_argument("--hardware", action="store_true", help="disable simulation mode")
    serve.set_defaults(func=_cmd_serve)

    return parser


def execute(argv: list[str]) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(execute(sys.argv[1:]))


if __name__ == "__main__":
    main()
