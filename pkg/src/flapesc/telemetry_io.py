"""Scenario configuration parsing and telemetry CSV serialization.

Configuration is an INI file with sections [dynamics], [esc], [objective],
[sim]; keys are named exactly after the corresponding dataclass fields and
unknown keys or sections are rejected.  Telemetry logs are CSV with a fixed
header and 9-significant-digit floats so golden files diff cleanly.
"""

from __future__ import annotations

import configparser
import math
import os
from importlib import resources

from . import controller as ctrl
from . import dynamics as dyn
from . import objective as obj
from .engine import CSV_HEADER, SimConfig, TelemetryFrame, TelemetryLog
from .errors import ConfigError, LogFormatError

_FLOAT_FMT = "%.9g"

_DYNAMICS_KEYS = ("k_d1", "k_L", "k_d2", "k_d3", "g", "kappa_m", "omega_f")
_ESC_FLOAT_KEYS = ("omega", "k", "a", "c", "h", "m_min", "m_max",
                   "t_lead", "lead_pole")
_ESC_REQUIRED = ("omega", "k", "a", "c")
_OBJECTIVE_KEYS = ("kind", "z_d", "schedule", "interpolation", "r_floor",
                   "gamma", "noise_sigma", "adc_bits", "r_max", "falloff")
_SIM_KEYS = ("dt", "duration", "seed", "mode", "m_const", "z_ref",
             "ctrl_decimation", "name", "z", "z_dot", "phi", "phi_dot")


def _section(cp: configparser.ConfigParser, name: str, allowed) -> dict:
    if not cp.has_section(name):
        raise ConfigError(f"missing required section [{name}]")
    sec = dict(cp.items(name))
    unknown = sorted(set(sec) - set(k.lower() for k in allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(unknown)}")
    # configparser lowercases keys; map back to the canonical field names
    canon = {k.lower(): k for k in allowed}
    return {canon[k]: v for k, v in sec.items()}


def _as_float(sec: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{sec}] {key}: expected a number, got '{raw}'") from None


def _as_int(sec: str, key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"[{sec}] {key}: expected an integer, got '{raw}'") from None


def _as_bool(sec: str, key: str, raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"[{sec}] {key}: expected a boolean, got '{raw}'")


def parse_schedule(text: str,
                   interpolation: str = "step") -> obj.SourceSchedule:
    """Parse 't:z, t:z, ...' (seconds : mm) into a SourceSchedule."""
    points = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" not in item:
            raise ConfigError(f"schedule entry '{item}' is not 't:z'")
        t_s, z_s = item.split(":", 1)
        points.append((_as_float("objective", "schedule", t_s),
                       _as_float("objective", "schedule", z_s)))
    sched = obj.SourceSchedule(breakpoints=tuple(points),
                               interpolation=interpolation)
    sched.validate()
    return sched


def _parse_objective(sec: dict):
    kind = sec.get("kind", "quadratic").strip()
    if kind == "quadratic":
        extra = set(sec) - {"kind", "z_d"}
        if extra:
            raise ConfigError(f"[objective] key(s) {sorted(extra)} do not apply "
                              f"to kind=quadratic")
        if "z_d" not in sec:
            raise ConfigError("[objective] kind=quadratic requires z_d")
        return obj.QuadraticObjective(z_d=_as_float("objective", "z_d", sec["z_d"]))
    if kind == "light_field":
        if "z_d" in sec:
            raise ConfigError("[objective] z_d does not apply to kind=light_field; "
                              "use schedule")
        if "schedule" not in sec:
            raise ConfigError("[objective] kind=light_field requires schedule")
        sensor_kwargs = {}
        for key in ("r_floor", "gamma", "noise_sigma", "r_max"):
            if key in sec:
                sensor_kwargs[key] = _as_float("objective", key, sec[key])
        if "adc_bits" in sec:
            raw = sec["adc_bits"].strip().lower()
            sensor_kwargs["adc_bits"] = None if raw == "none" else _as_int(
                "objective", "adc_bits", sec["adc_bits"])
        if "falloff" in sec:
            sensor_kwargs["falloff"] = sec["falloff"].strip()
        sched = parse_schedule(sec["schedule"],
                               sec.get("interpolation", "step").strip())
        return obj.LightField(schedule=sched,
                              sensor=obj.SensorModel(**sensor_kwargs))
    raise ConfigError(f"[objective] unknown kind '{kind}'")


def load_config(path: str) -> SimConfig:
    """Load and fully validate a scenario configuration file."""
    if not os.path.exists(path):
        raise ConfigError(f"scenario file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        read = cp.read(path)
    except configparser.Error as e:
        raise ConfigError(f"cannot parse {path}: {e}") from e
    if not read:
        raise ConfigError(f"cannot read scenario file: {path}")

    known_sections = {"dynamics", "esc", "objective", "sim"}
    extra = set(cp.sections()) - known_sections
    if extra:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(extra))}")

    d_sec = _section(cp, "dynamics", _DYNAMICS_KEYS)
    dynamics = dyn.DynamicsParams(**{k: _as_float("dynamics", k, v)
                                     for k, v in d_sec.items()})

    e_sec = _section(cp, "esc", list(_ESC_FLOAT_KEYS) +
                     ["hpf_enabled", "sign", "m_init", "grad_avg"])
    missing = [k for k in _ESC_REQUIRED if k not in e_sec]
    if missing:
        raise ConfigError(f"[esc] missing required key(s): {', '.join(missing)}")
    esc_kwargs = {k: _as_float("esc", k, v) for k, v in e_sec.items()
                  if k in _ESC_FLOAT_KEYS}
    if "hpf_enabled" in e_sec:
        esc_kwargs["hpf_enabled"] = _as_bool("esc", "hpf_enabled", e_sec["hpf_enabled"])
    if "grad_avg" in e_sec:
        esc_kwargs["grad_avg"] = _as_bool("esc", "grad_avg", e_sec["grad_avg"])
    if "sign" in e_sec:
        esc_kwargs["sign"] = _as_int("esc", "sign", e_sec["sign"])
    if "m_init" in e_sec and e_sec["m_init"].strip().lower() != "none":
        esc_kwargs["m_init"] = _as_float("esc", "m_init", e_sec["m_init"])
    esc = ctrl.EscParams(**esc_kwargs)

    objective = _parse_objective(_section(cp, "objective", _OBJECTIVE_KEYS))

    s_sec = _section(cp, "sim", _SIM_KEYS)
    for key in ("dt", "duration", "seed"):
        if key not in s_sec:
            raise ConfigError(f"[sim] missing required key: {key}")
    initial = dyn.FlapperState(
        z=_as_float("sim", "z", s_sec.get("z", "0")),
        z_dot=_as_float("sim", "z_dot", s_sec.get("z_dot", "0")),
        phi=_as_float("sim", "phi", s_sec.get("phi", "0")),
        phi_dot=_as_float("sim", "phi_dot", s_sec.get("phi_dot", "0")))
    config = SimConfig(
        dt=_as_float("sim", "dt", s_sec["dt"]),
        duration=_as_float("sim", "duration", s_sec["duration"]),
        seed=_as_int("sim", "seed", s_sec["seed"]),
        dynamics=dynamics, esc=esc, objective=objective,
        initial_state=initial,
        mode=s_sec.get("mode", "closed_loop").strip(),
        m_const=_as_float("sim", "m_const", s_sec.get("m_const", "0")),
        z_ref=_as_float("sim", "z_ref", s_sec.get("z_ref", "1.0")),
        ctrl_decimation=_as_int("sim", "ctrl_decimation",
                                s_sec.get("ctrl_decimation", "1")),
        name=s_sec.get("name", os.path.splitext(os.path.basename(path))[0]))
    config.validate()
    return config


def scenario_path(name: str) -> str:
    """Resolve a shipped scenario name ('scenario_a') or a filesystem path."""
    if os.path.exists(name):
        return name
    base = name if name.endswith(".ini") else name + ".ini"
    pkg_file = resources.files("flapesc").joinpath("scenarios", base)
    if pkg_file.is_file():
        return str(pkg_file)
    raise ConfigError(f"scenario file not found: {name}")


# -- telemetry CSV -------------------------------------------------------------


def format_frame(frame: TelemetryFrame) -> str:
    return ",".join(_FLOAT_FMT % v for v in frame.as_tuple())


def write_log(path: str, log: TelemetryLog) -> None:
    """Write a telemetry CSV.  Refuses non-finite values: a log containing
    them is a divergence artifact, not data."""
    lines = [CSV_HEADER]
    for i, frame in enumerate(log.frames):
        vals = frame.as_tuple()
        if not all(math.isfinite(v) for v in vals):
            raise LogFormatError(f"frame {i} contains a non-finite value; "
                                 f"refusing to write divergence artifacts")
        lines.append(",".join(_FLOAT_FMT % v for v in vals))
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def read_log(path: str) -> TelemetryLog:
    """Read a telemetry CSV written by write_log."""
    with open(path) as f:
        header = f.readline().rstrip("\n")
        if header != CSV_HEADER:
            raise LogFormatError(f"bad header: expected '{CSV_HEADER}', "
                                 f"got '{header}'")
        frames = []
        n_cols = len(CSV_HEADER.split(","))
        for lineno, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != n_cols:
                raise LogFormatError(f"line {lineno}: expected {n_cols} "
                                     f"fields, got {len(parts)}")
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                raise LogFormatError(f"line {lineno}: non-numeric field") from None
            if not all(math.isfinite(v) for v in vals):
                raise LogFormatError(f"line {lineno}: non-finite value")
            frames.append(TelemetryFrame(*vals))
    dt = frames[1].t - frames[0].t if len(frames) > 1 else 0.0
    return TelemetryLog(frames=frames, dt=dt)
