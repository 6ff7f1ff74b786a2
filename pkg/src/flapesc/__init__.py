"""Extremum-seeking hover and light-source seeking for a vertically
constrained flapping-wing robot: plant model, controller, scenario engine,
telemetry I/O, CLI, and a live websocket bridge."""

from .controller import EscParams, EscState, demodulate, esc_step, hpf_update
from .dynamics import (ActuatorInput, DynamicsParams, FlapperState,
                       FlapperStateDerivative, derivatives, hover_equilibrium,
                       step)
from .engine import (CSV_HEADER, CommandQueue, ConvergenceReport, LiveCommand,
                     SimConfig, Simulation, TelemetryFrame, TelemetryLog,
                     acceptance_band, detect_convergence, measure_dither_ripple,
                     run_scenario, spectrum_detail, spectrum_peak)
from .errors import (ConfigError, DivergenceError, FlapescError,
                     LogFormatError, MeasurementFaultError)
from .objective import (LightField, QuadraticObjective, SensorModel,
                        SourceSchedule, light_sensor_read, quadratic_eval,
                        source_position)
from .telemetry_io import load_config, read_log, scenario_path, write_log

__version__ = "0.1.0"
