"""Command-line entry point.

Subcommands: simulate, calibrate, run, pca, eval, replay. Every subcommand
works with zero flags using the embedded defaults (surveyed anchors, the
four reference tones, 12-bit 200 kSa/s acquisition). Exit codes: 0 success,
1 usage, 2 configuration, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import threading
from dataclasses import dataclass, replace

from . import defaults
from .core import ConfigError, MagposError, load_survey_table, project_to_reference_plane
from .evaluation import (
    format_cdf_csv,
    format_errors_csv,
    format_gdop_csv,
    gdop_map,
    run_accuracy_experiment,
    summarize,
)
from .pca.canvas import CanvasCalibration, load_canvas_calibration
from .pca.service import PCAService
from .pipeline import (
    PipelineConfig,
    SteerSubscriber,
    Trajectory,
    VirtualVisitor,
    load_trajectory,
    replay_trajectory,
    run_pipeline,
    static_source,
)
from .ranging import calibrate, dump_observations, load_observations
from .simulator import load_scenario, synthesize_record
from .sinefit import build_basis, estimate_amplitudes

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

logger = logging.getLogger("magpos")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_endpoint(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not host:
        raise ConfigError(f"endpoint {text!r} must be host:port")
    try:
        return (host, int(port))
    except ValueError as exc:
        raise ConfigError(f"endpoint {text!r}: bad port") from exc


def _parse_canvas_size(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return (int(w), int(h))
    except ValueError as exc:
        raise ConfigError(f"canvas {text!r} must be WIDTHxHEIGHT") from exc


def _parse_position(text: str) -> tuple[float, float]:
    try:
        x, y = text.split(",")
        return (float(x), float(y))
    except ValueError as exc:
        raise ConfigError(f"position {text!r} must be 'x,y' in meters") from exc


def _load_scenario(args) -> "defaults.SimScenario":
    if getattr(args, "scenario", None):
        scenario = load_scenario(args.scenario)
    elif getattr(args, "preset", "reference") == "ideal":
        scenario = defaults.ideal_scenario()
    elif getattr(args, "preset", "reference") == "noiseless":
        scenario = defaults.default_scenario()
    else:
        scenario = defaults.reference_scenario()
    seed = getattr(args, "seed", None)
    if seed is not None:
        scenario = scenario.with_seed(seed)
    return scenario


def _load_calibration(args, scenario):
    """Ranging constants: fitted from an observations file, or from a fresh
    simulated calibration run at C1..C5."""
    if getattr(args, "calibration", None):
        return calibrate(load_observations(args.calibration))
    from .evaluation import simulate_calibration_observations

    return calibrate(simulate_calibration_observations(scenario, records_per_point=3))


def demo_trajectory() -> Trajectory:
    """Looping walk through the surveyed calibration points."""
    table = load_survey_table()
    labels = ["C1", "C2", "C3", "C4", "C1"]
    pts = [table.calibration_points[l][:2] for l in labels]
    times = tuple(4.0 * i for i in range(len(pts)))
    return Trajectory(times, tuple(p[0] for p in pts), tuple(p[1] for p in pts), loop=True)


@dataclass(frozen=True)
class RunConfig:
    """Validated inputs for one subcommand invocation.

    Everything referenced on the command line is loaded and checked before
    any subsystem starts; a bad file never leaves a half-running system.
    """

    scenario: object
    calibration: object = None
    trajectory: object = None
    canvas: object = None


# -- subcommands ---------------------------------------------------------------


def cmd_simulate(args) -> int:
    scenario = _load_scenario(args)
    anchor_set = scenario.anchor_set
    if args.point:
        table = load_survey_table()
        position = project_to_reference_plane(table.point(args.point), anchor_set)
    else:
        position = _parse_position(args.position)
    basis = build_basis(
        [a.frequency for a in anchor_set],
        scenario.adc.sample_rate,
        scenario.adc.record_length,
    )
    print(f"receiver at ({position[0]:.3f}, {position[1]:.3f}) m")
    print("anchor  f_Hz      true_d_m  true_V    est_V")
    from .simulator import tone_amplitude, true_distance

    for i in range(args.records):
        record = synthesize_record(scenario, position, t0=i * record_duration(scenario))
        est = estimate_amplitudes(record, basis, anchor_set.ids)
        for anchor in anchor_set:
            d = true_distance(anchor, position)
            v = tone_amplitude(anchor, d)
            print(
                f"{anchor.id:6s}  {anchor.frequency:<9.1f} {d:<9.4f} "
                f"{v:<9.5f} {est.per_anchor[anchor.id]:<9.5f}"
            )
        print(f"record {i}: dc={est.dc:.5f} V residual_rms={est.residual_rms:.6f} V")
    return EXIT_OK


def record_duration(scenario) -> float:
    return scenario.adc.record_length / scenario.adc.sample_rate


def cmd_calibrate(args) -> int:
    scenario = _load_scenario(args)
    if args.observations:
        observations = load_observations(args.observations)
    else:
        from .evaluation import simulate_calibration_observations

        observations = simulate_calibration_observations(
            scenario, records_per_point=args.records_per_point
        )
    if args.write_observations:
        with open(args.write_observations, "w", encoding="utf-8") as fh:
            fh.write(dump_observations(observations))
    result = calibrate(observations, method=args.method)
    print("anchor  alpha       beta      log_rms   n")
    for aid in sorted(result.constants):
        alpha, beta = result.constants[aid]
        print(
            f"{aid:6s}  {alpha:<10.6f}  {beta:<8.4f}  "
            f"{result.residual_log_rms[aid]:<8.5f}  {result.observation_counts[aid]}"
        )
    return EXIT_OK


def cmd_run(args) -> int:
    scenario = _load_scenario(args)
    calibration = _load_calibration(args, scenario)
    endpoint = None if args.no_stream else _parse_endpoint(args.endpoint)
    config = PipelineConfig(
        scenario=scenario,
        calibration=calibration,
        update_period=args.period,
        endpoint=endpoint,
    )

    steer = None
    if args.position:
        source = static_source(_parse_position(args.position))
    elif args.trajectory == "live":
        bounds = scenario.anchor_set.bounding_box()
        center = ((bounds[0] + bounds[1]) / 2, (bounds[2] + bounds[3]) / 2)
        visitor = VirtualVisitor(center, bounds)
        steer = SteerSubscriber(args.bridge_url, visitor.set_target).start()
        source = visitor
    elif args.trajectory:
        source = load_trajectory(args.trajectory, loop=args.loop)
    else:
        source = demo_trajectory()

    stop = threading.Event()
    try:
        result = run_pipeline(config, source, stop=stop, duration=args.duration)
    except KeyboardInterrupt:
        stop.set()
        return EXIT_OK
    finally:
        if steer is not None:
            steer.stop()
    print(
        f"fixes={len(result.fixes)} errors={result.errors} sent={result.sent} "
        f"dropped={result.dropped} p95_compute={result.p95_latency * 1e3:.2f} ms"
    )
    return EXIT_OK


def cmd_pca(args) -> int:
    if args.calibration:
        canvas = load_canvas_calibration(args.calibration)
    else:
        width, height = _parse_canvas_size(args.canvas)
        canvas = defaults.default_canvas_calibration(width, height)
    service = PCAService(
        calibration=canvas,
        listen=_parse_endpoint(args.listen),
        bridge=None if args.no_bridge else _parse_endpoint(args.bridge),
        anchor_set=defaults.default_anchor_set(),
        click_count=args.click_count,
    )
    service.start()
    print(f"position receiver on {service.receiver.host}:{service.receiver.port}")
    if service.bridge is not None:
        print(f"ui bridge on ws://{service.bridge.host}:{service.bridge.port}")
    try:
        if args.duration is not None:
            threading.Event().wait(args.duration)
        else:
            threading.Event().wait()
    except KeyboardInterrupt:
        pass
    finally:
        service.stop()
        print(
            f"received={service.receiver.received} malformed={service.receiver.malformed} "
            f"clamped={service.env.clamp_count} evictions={service.env.eviction_count}"
        )
    return EXIT_OK


def cmd_eval(args) -> int:
    scenario = _load_scenario(args)
    report = run_accuracy_experiment(
        scenario,
        repeats=args.repeats,
        border_threshold=args.border_threshold,
    )
    print(summarize(report), end="")
    if args.out:
        import os

        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "errors.csv"), "w", encoding="utf-8") as fh:
            fh.write(format_errors_csv(report))
        with open(os.path.join(args.out, "cdf.csv"), "w", encoding="utf-8") as fh:
            fh.write(format_cdf_csv(report))
        grid = gdop_map(scenario.anchor_set, grid_resolution=args.gdop_resolution)
        with open(os.path.join(args.out, "gdop.csv"), "w", encoding="utf-8") as fh:
            fh.write(format_gdop_csv(grid))
        with open(os.path.join(args.out, "summary.txt"), "w", encoding="utf-8") as fh:
            fh.write(summarize(report))
        print(f"report written to {args.out}/")
    return EXIT_OK


def cmd_replay(args) -> int:
    scenario = _load_scenario(args)
    calibration = _load_calibration(args, scenario)
    trajectory = (
        load_trajectory(args.trajectory) if args.trajectory else demo_trajectory_once()
    )
    config = PipelineConfig(
        scenario=scenario, calibration=calibration, update_period=args.period
    )
    fixes = replay_trajectory(config, trajectory, period=args.period)
    lines = ["t_s,x_m,y_m,iterations,final_cost,converged"]
    for fix in fixes:
        lines.append(
            f"{fix.timestamp:.3f},{fix.x:.6f},{fix.y:.6f},"
            f"{fix.iterations},{fix.final_cost:.9f},{int(fix.converged)}"
        )
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"{len(fixes)} fixes written to {args.out}")
    else:
        print(text, end="")
    return EXIT_OK


def demo_trajectory_once() -> Trajectory:
    traj = demo_trajectory()
    return Trajectory(traj.times, traj.xs, traj.ys, loop=False)


# -- parser ---------------------------------------------------------------------


def build_parser() -> _Parser:
    parser = _Parser(prog="magpos", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--scenario", help="scenario description file")
        p.add_argument("--seed", type=int, help="override the scenario noise seed")
        p.add_argument(
            "--preset",
            choices=["reference", "noiseless", "ideal"],
            default="reference",
            help="built-in scenario when no file is given (default: reference noise)",
        )

    p = sub.add_parser("simulate", help="synthesize records and report estimates")
    add_common(p)
    p.add_argument("--position", default="1.367,2.360", help="receiver position 'x,y' m")
    p.add_argument("--point", help="surveyed point label instead of --position")
    p.add_argument("--records", type=int, default=1)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("calibrate", help="fit ranging constants from observations")
    add_common(p)
    p.add_argument("--observations", help="observations file (anchor_id d_m V)")
    p.add_argument("--records-per-point", type=int, default=3)
    p.add_argument("--method", choices=["log", "linear"], default="log")
    p.add_argument("--write-observations", help="dump the observations used")
    p.set_defaults(handler=cmd_calibrate)

    p = sub.add_parser("run", help="run the real-time pipeline")
    add_common(p)
    p.add_argument("--calibration", help="ranging observations file to fit from")
    p.add_argument("--endpoint", default="127.0.0.1:5005")
    p.add_argument("--no-stream", action="store_true")
    p.add_argument("--trajectory", help="trajectory file, or 'live' for UI steering")
    p.add_argument("--loop", action="store_true", help="loop a file trajectory")
    p.add_argument("--position", help="static position 'x,y' instead of a trajectory")
    p.add_argument("--period", type=float, default=0.5)
    p.add_argument("--duration", type=float, default=None)
    p.add_argument("--bridge-url", default="ws://127.0.0.1:5006")
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("pca", help="run the position controlled application")
    p.add_argument("--listen", default="127.0.0.1:5005")
    p.add_argument("--canvas", default="1280x720")
    p.add_argument("--calibration", help="canvas calibration file")
    p.add_argument("--bridge", default="127.0.0.1:5006")
    p.add_argument("--no-bridge", action="store_true")
    p.add_argument("--click-count", type=int, default=5)
    p.add_argument("--duration", type=float, default=None)
    p.set_defaults(handler=cmd_pca)

    p = sub.add_parser("eval", help="run the accuracy experiment")
    add_common(p)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--border-threshold", type=float, default=0.10)
    p.add_argument("--gdop-resolution", type=float, default=0.1)
    p.add_argument("--out", help="directory for errors.csv, cdf.csv, gdop.csv")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("replay", help="offline batch run over a trajectory")
    add_common(p)
    p.add_argument("--calibration", help="ranging observations file to fit from")
    p.add_argument("--trajectory", help="trajectory file (default: demo loop)")
    p.add_argument("--period", type=float, default=0.5)
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.set_defaults(handler=cmd_replay)

    return parser


def parse_and_dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="[%(asctime)s] %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"magpos: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"magpos: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KeyboardInterrupt:
        return EXIT_OK
    except (MagposError, OSError) as exc:
        print(f"magpos: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
