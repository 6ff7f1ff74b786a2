"""Scenario orchestration: steps plant + controller + objective on a fixed
clock, applies source schedules and live commands, records telemetry, and
computes convergence and spectral diagnostics.

Telemetry reports z as *altitude* in mm (z_ref - z_plant, scaled), so plots
rise when the flapper climbs; z_dot is the altitude rate in mm/s.
"""

from __future__ import annotations

import math
import random
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from . import controller as ctrl
from . import dynamics as dyn
from . import objective as obj
from .errors import ConfigError, DivergenceError

CSV_HEADER = "t,z,z_dot,phi_dot,J,J_hp,xi,m_hat,m,z_src"

MM_PER_M = 1000.0


@dataclass(frozen=True)
class SimConfig:
    dt: float
    duration: float
    seed: int
    dynamics: dyn.DynamicsParams
    esc: ctrl.EscParams
    objective: object                      # QuadraticObjective | LightField
    initial_state: dyn.FlapperState
    mode: str = "closed_loop"              # or "open_loop"
    m_const: float = 0.0                   # command in open_loop mode
    z_ref: float = 1.0                     # altitude reference, m
    ctrl_decimation: int = 1
    name: str = "scenario"

    def n_steps(self) -> int:
        n = self.duration / self.dt
        if abs(n - round(n)) > 1e-9:
            raise ConfigError(f"sim.duration ({self.duration}) must be a whole "
                              f"number of steps of dt={self.dt}")
        return int(round(n))

    def validate(self) -> None:
        if not (self.duration > 0):
            raise ConfigError(f"sim.duration must be > 0, got {self.duration}")
        if not (self.dt > 0):
            raise ConfigError(f"sim.dt must be > 0, got {self.dt}")
        self.n_steps()
        if self.mode not in ("closed_loop", "open_loop"):
            raise ConfigError(f"sim.mode must be closed_loop or open_loop, got '{self.mode}'")
        if self.ctrl_decimation < 1:
            raise ConfigError(f"sim.ctrl_decimation must be >= 1, got {self.ctrl_decimation}")
        try:
            self.dynamics.validate()
            self.esc.validate()
            self.objective.validate()
        except ValueError as e:
            raise ConfigError(str(e)) from e
        for name, v in zip(("z", "z_dot", "phi", "phi_dot"),
                           self.initial_state.as_tuple()):
            if not math.isfinite(v):
                raise ConfigError(f"initial_state.{name} is not finite")


@dataclass(frozen=True)
class TelemetryFrame:
    t: float
    z: float        # altitude, mm
    z_dot: float    # altitude rate, mm/s
    phi_dot: float  # rad/s
    J: float
    J_hp: float
    xi: float
    m_hat: float
    m: float
    z_src: float    # mm; target position for quadratic objectives

    def as_tuple(self):
        return (self.t, self.z, self.z_dot, self.phi_dot, self.J, self.J_hp,
                self.xi, self.m_hat, self.m, self.z_src)


class TelemetryLog:
    def __init__(self, frames: Optional[list] = None, dt: float = 0.0):
        self.frames: list[TelemetryFrame] = frames if frames is not None else []
        self.dt = dt

    def __len__(self):
        return len(self.frames)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(f, name) for f in self.frames])

    @property
    def duration(self) -> float:
        return self.frames[-1].t if self.frames else 0.0


@dataclass(frozen=True)
class ConvergenceReport:
    converged: bool
    settle_time: float
    terminal_mean_abs_error: float
    terminal_band: float


@dataclass(frozen=True)
class LiveCommand:
    t: float            # apply at the first step boundary >= t
    kind: str           # set_source | pause | resume | reset
    value: float | None = None


class CommandQueue:
    """Thread-safe ordered command queue drained at step boundaries."""

    def __init__(self):
        self._lock = threading.Lock()
        self._items: list[LiveCommand] = []

    def push(self, cmd: LiveCommand) -> None:
        with self._lock:
            self._items.append(cmd)
            self._items.sort(key=lambda c: c.t)

    def pop_due(self, t: float) -> list:
        with self._lock:
            due = [c for c in self._items if c.t <= t]
            self._items = [c for c in self._items if c.t > t]
        return due


class Simulation:
    """Single stepping context for one scenario.

    Construction computes the frame at t=0; each step() advances one dt and
    appends a frame.  Live commands are applied only at step boundaries.
    """

    def __init__(self, config: SimConfig, commands: Optional[CommandQueue] = None):
        config.validate()
        self.config = config
        self.commands = commands if commands is not None else CommandQueue()
        self.reset()

    def reset(self) -> None:
        cfg = self.config
        self._rng = random.Random(cfg.seed)
        self._state = cfg.initial_state.as_tuple()
        self._esc = ctrl.reset(cfg.esc)
        self._i = 0
        self._source_override: float | None = None
        self._m = 0.0
        self.log = TelemetryLog(dt=cfg.dt)
        self._light = cfg.objective if cfg.objective.kind == "light_field" else None
        self._record_frame()

    # -- per-boundary work ---------------------------------------------------

    def _source_at(self, t: float) -> float:
        if self._light is None:
            return self.config.objective.z_d
        if self._source_override is not None:
            return self._source_override
        return obj.source_position(t, self._light.schedule)

    def _measure(self, t: float, alt_mm: float, z_src: float) -> float:
        if self._light is None:
            return obj.quadratic_eval(alt_mm, self.config.objective.z_d)
        sensor = self._light.sensor
        raw = sensor.noise_free(alt_mm - z_src)
        if sensor.noise_sigma > 0:
            raw += self._rng.gauss(0.0, sensor.noise_sigma)
        return sensor.quantize(raw)

    def apply_command(self, cmd: LiveCommand) -> None:
        if cmd.kind == "set_source":
            if self._light is None:
                raise ConfigError("set_source requires a light_field objective")
            self._source_override = float(cmd.value)
        elif cmd.kind == "reset":
            self.reset()
        # pause/resume carry no engine state: pacing is the caller's job

    def _record_frame(self) -> None:
        cfg = self.config
        t = self._i * cfg.dt
        for c in self.commands.pop_due(t):
            if c.kind == "reset":
                # reset records its own initial frame; abandon this one
                self.reset()
                return
            self.apply_command(c)
        z, zd, phi, pd = self._state
        alt = (cfg.z_ref - z) * MM_PER_M
        z_src = self._source_at(t)
        J = self._measure(t, alt, z_src)

        if cfg.mode == "open_loop":
            self._m = cfg.m_const
            J_hp, xi, m_hat = J, 0.0, cfg.m_const
        elif self._i % cfg.ctrl_decimation == 0:
            self._esc, self._m = ctrl.esc_step(self._esc, J, cfg.dt * cfg.ctrl_decimation, cfg.esc)
            J_hp, xi, m_hat = self._esc.last_J_hp, self._esc.last_xi, self._esc.m_hat
        else:
            J_hp, xi, m_hat = self._esc.last_J_hp, self._esc.last_xi, self._esc.m_hat

        self.log.frames.append(TelemetryFrame(
            t=t, z=alt, z_dot=-zd * MM_PER_M, phi_dot=pd,
            J=J, J_hp=J_hp, xi=xi, m_hat=m_hat, m=self._m, z_src=z_src))

    def step(self) -> TelemetryFrame:
        cfg = self.config
        p = cfg.dynamics
        t = self._i * cfg.dt
        m = self._m
        kam = p.kappa_m * m
        omf = p.omega_f

        def input_fn(tau: float):
            return (0.0, kam * math.cos(omf * tau))

        s_new = dyn._rk4_tuple(self._state, input_fn, t, cfg.dt, p)
        for name, v in zip(("z", "z_dot", "phi", "phi_dot"), s_new):
            if not math.isfinite(v):
                raise DivergenceError(name, last_valid_frame=self._i)
        self._state = s_new
        self._i += 1
        self._record_frame()
        return self.log.frames[-1]

    @property
    def done(self) -> bool:
        return self._i >= self.config.n_steps()

    @property
    def t(self) -> float:
        return self._i * self.config.dt


def run_scenario(config: SimConfig,
                 live_commands: Optional[Iterable[LiveCommand]] = None) -> TelemetryLog:
    """Run a full scenario headless.  Deterministic for a fixed
    (config, seed, command stream)."""
    queue = CommandQueue()
    if live_commands:
        for c in live_commands:
            queue.push(c)
    sim = Simulation(config, commands=queue)
    n = config.n_steps()
    for _ in range(n):
        sim.step()
    return sim.log


# -- diagnostics --------------------------------------------------------------


def detect_convergence(log: TelemetryLog, target, band: float,
                       hold: float) -> ConvergenceReport:
    """Converged when |z - target(t)| <= band continuously over the final
    `hold` seconds.  settle_time is the start of the earliest such terminal
    window; terminal_mean_abs_error averages over the last 20% of the run."""
    if not log.frames:
        raise ValueError("empty telemetry log")
    duration = log.duration
    if not (hold < duration):
        raise ValueError(f"hold ({hold}) must be < duration ({duration})")
    target_fn = target if callable(target) else (lambda _t, _v=float(target): _v)

    t = log.column("t")
    err = np.abs(log.column("z") - np.array([target_fn(ti) for ti in t]))

    viol = np.nonzero(err > band)[0]
    if len(viol) == 0:
        settle = 0.0
    else:
        last = viol[-1]
        settle = t[last + 1] if last + 1 < len(t) else float("inf")
    converged = math.isfinite(settle) and (duration - settle) >= hold

    n_tail = max(1, int(0.2 * len(err)))
    terminal_mean = float(np.mean(err[-n_tail:]))
    n_hold = max(1, int(round(hold / log.dt))) if log.dt > 0 else len(err)
    terminal_band = float(np.max(err[-n_hold:]))
    return ConvergenceReport(converged=converged,
                             settle_time=float(settle) if converged else float("inf"),
                             terminal_mean_abs_error=terminal_mean,
                             terminal_band=terminal_band)


def measure_dither_ripple(log: TelemetryLog, frac: float = 0.2) -> float:
    """RMS deviation of z about its mean over the final `frac` of the run;
    used to size the acceptance band when the source is frozen."""
    z = log.column("z")
    tail = z[-max(2, int(frac * len(z))):]
    return float(np.sqrt(np.mean((tail - tail.mean()) ** 2)))


def acceptance_band(log: TelemetryLog, floor_mm: float = 5.0) -> float:
    """band = max(3 x steady dither ripple, floor)."""
    return max(3.0 * measure_dither_ripple(log), floor_mm)


def spectrum_detail(signal, dt: float, f_min: float):
    """(peak frequency Hz, peak magnitude, median floor) of the Hann-windowed
    DFT magnitude restricted to f >= f_min."""
    x = np.asarray(signal, dtype=float)
    if len(x) < 2 ** 12:
        raise ValueError(f"series too short for spectrum: {len(x)} < {2**12}")
    w = np.hanning(len(x))
    mag = np.abs(np.fft.rfft((x - x.mean()) * w))
    freqs = np.fft.rfftfreq(len(x), dt)
    mask = freqs >= f_min
    if not np.any(mask):
        raise ValueError(f"f_min={f_min} excludes the whole spectrum")
    sel = mag[mask]
    fsel = freqs[mask]
    i = int(np.argmax(sel))
    return float(fsel[i]), float(sel[i]), float(np.median(sel))


def spectrum_peak(signal, dt: float, f_min: float) -> float:
    """Dominant frequency (Hz) above f_min."""
    return spectrum_detail(signal, dt, f_min)[0]
