"""Command-line entry point: run scenarios, analyze logs, launch the live
bridge, and reproduce the constant-command natural-perturbation run.

Exit codes: 0 ok, 2 config error, 3 divergence, 4 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys

from . import engine, objective, telemetry_io
from .errors import ConfigError, DivergenceError, LogFormatError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_IO = 4

DEFAULT_HOLD_S = 5.0
DEFAULT_F_MIN_HZ = 1.0


def _fail(code: int, kind: str, message: str) -> int:
    # single-line machine-parsable error record
    print(f'error kind={kind} message="{message}"', file=sys.stderr)
    return code


def _target_fn(config: engine.SimConfig):
    if config.objective.kind == "light_field":
        sched = config.objective.schedule
        return lambda t: objective.source_position(t, sched)
    return config.objective.z_d


def _print_report(report: engine.ConvergenceReport) -> None:
    print(f"converged={'yes' if report.converged else 'no'}")
    settle = "inf" if math.isinf(report.settle_time) else f"{report.settle_time:.3f}"
    print(f"settle_time_s={settle}")
    print(f"terminal_mean_abs_error_mm={report.terminal_mean_abs_error:.4f}")
    print(f"terminal_band_mm={report.terminal_band:.4f}")


def _cmd_run(args) -> int:
    config = telemetry_io.load_config(telemetry_io.scenario_path(args.scenario))
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    log = engine.run_scenario(config)
    if args.out:
        telemetry_io.write_log(args.out, log)
    band = args.band if args.band is not None else engine.acceptance_band(log)
    hold = min(DEFAULT_HOLD_S, 0.5 * config.duration)
    report = engine.detect_convergence(log, _target_fn(config), band, hold)
    print(f"scenario={config.name} seed={config.seed} frames={len(log)}")
    print(f"band_mm={band:.4f}")
    _print_report(report)
    return EXIT_OK


def _cmd_analyze(args) -> int:
    log = telemetry_io.read_log(args.log)
    if args.target is None:
        target = log.frames[-1].z_src if log.frames else 0.0
    elif ":" in args.target:
        sched = telemetry_io.parse_schedule(args.target)
        target = lambda t: objective.source_position(t, sched)
    else:
        target = float(args.target)
    band = args.band if args.band is not None else engine.acceptance_band(log)
    hold = min(DEFAULT_HOLD_S, 0.5 * log.duration)
    report = engine.detect_convergence(log, target, band, hold)
    print(f"frames={len(log)} band_mm={band:.4f}")
    _print_report(report)
    try:
        f_peak, peak, floor = engine.spectrum_detail(
            log.column("J"), log.dt, DEFAULT_F_MIN_HZ)
        print(f"J_spectrum_peak_hz={f_peak:.4f}")
        print(f"J_spectrum_peak_over_floor={peak / floor:.2f}")
    except ValueError:
        print("J_spectrum_peak_hz=n/a (series too short)")
    return EXIT_OK


def _cmd_natural(args) -> int:
    config = telemetry_io.load_config(telemetry_io.scenario_path(args.scenario))
    config = dataclasses.replace(config, mode="open_loop", m_const=args.command)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    log = engine.run_scenario(config)
    if args.out:
        telemetry_io.write_log(args.out, log)
    f_peak, peak, floor = engine.spectrum_detail(
        log.column("J"), config.dt, DEFAULT_F_MIN_HZ)
    f_carrier = config.dynamics.omega_f / (2.0 * math.pi)
    print(f"scenario={config.name} m_const={args.command} frames={len(log)}")
    print(f"carrier_hz={f_carrier:.4f}")
    print(f"J_spectrum_peak_hz={f_peak:.4f}")
    print(f"J_spectrum_peak_over_floor={peak / floor:.2f}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    from . import bridge  # deferred: pulls in asyncio/websockets
    config = telemetry_io.load_config(telemetry_io.scenario_path(args.scenario))
    bridge.serve_forever(config, host=args.host, port=args.port,
                         rate_hz=args.rate, out=args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flapesc",
        description="Extremum-seeking hover and light-seeking simulator "
                    "for a vertically constrained flapping-wing robot.")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_run = sub.add_parser("run", help="run a scenario headless")
    p_run.add_argument("--scenario", required=True,
                       help="shipped scenario name or path to an INI file")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None, help="telemetry CSV output path")
    p_run.add_argument("--band", type=float, default=None,
                       help="convergence band in mm (default: 3x ripple, min 5)")
    p_run.set_defaults(func=_cmd_run)

    p_an = sub.add_parser("analyze", help="analyze a telemetry CSV")
    p_an.add_argument("--log", required=True)
    p_an.add_argument("--target", default=None,
                      help="target altitude in mm, or a 't:z,...' schedule")
    p_an.add_argument("--band", type=float, default=None)
    p_an.set_defaults(func=_cmd_analyze)

    p_sv = sub.add_parser("serve", help="serve a live simulation over websocket")
    p_sv.add_argument("--scenario", required=True)
    p_sv.add_argument("--host", default="127.0.0.1")
    p_sv.add_argument("--port", type=int, default=8765)
    p_sv.add_argument("--rate", type=float, default=50.0,
                      help="frame broadcast rate, Hz")
    p_sv.add_argument("--out", default=None, help="telemetry CSV flushed on exit")
    p_sv.set_defaults(func=_cmd_serve)

    p_nat = sub.add_parser("natural",
                           help="open-loop constant-command run with spectrum report")
    p_nat.add_argument("--scenario", required=True)
    p_nat.add_argument("--command", type=float, required=True,
                       help="constant command m_const")
    p_nat.add_argument("--seed", type=int, default=None)
    p_nat.add_argument("--out", default=None)
    p_nat.set_defaults(func=_cmd_natural)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        return _fail(EXIT_CONFIG, "config", str(e))
    except DivergenceError as e:
        return _fail(EXIT_DIVERGENCE, "divergence", str(e))
    except (LogFormatError, OSError) as e:
        return _fail(EXIT_IO, "io", str(e))
    except KeyboardInterrupt:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
