"""Measurable objectives: known quadratic field and a simulated light field
read through a noisy, quantized photoresistor whose counts *decrease* with
intensity, so the source is the minimum of the reading."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Literal

from .errors import ConfigError


def quadratic_eval(z: float, z_d: float) -> float:
    """J(z) = (z - z_d)^2, mm^2."""
    return (z - z_d) ** 2


@dataclass(frozen=True)
class QuadraticObjective:
    z_d: float  # desired vertical position, mm

    kind = "quadratic"

    def validate(self) -> None:
        if not math.isfinite(self.z_d):
            raise ValueError(f"z_d must be finite, got {self.z_d}")


@dataclass(frozen=True)
class SensorModel:
    r_floor: float = 100.0      # reading at the source, counts
    gamma: float = 0.02         # falloff coefficient, counts/mm^2
    noise_sigma: float = 0.2    # additive Gaussian noise std, counts
    adc_bits: int | None = 12   # None disables quantization
    r_max: float = 4095.0       # full-scale reading, counts
    falloff: Literal["quadratic", "inverse_square"] = "quadratic"

    def validate(self) -> None:
        if self.r_floor < 0:
            raise ValueError(f"r_floor must be >= 0, got {self.r_floor}")
        if not (self.gamma > 0):
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not (self.r_floor < self.r_max):
            raise ValueError(f"r_floor must be < r_max, got {self.r_floor} >= {self.r_max}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.adc_bits is not None and self.adc_bits < 1:
            raise ValueError(f"adc_bits must be >= 1, got {self.adc_bits}")
        if self.falloff not in ("quadratic", "inverse_square"):
            raise ValueError(f"unknown falloff '{self.falloff}'")

    def noise_free(self, dist_mm: float) -> float:
        d2 = dist_mm * dist_mm
        if self.falloff == "quadratic":
            return self.r_floor + self.gamma * d2
        # inverse-square intensity mapped onto the count range: monotone in
        # |d|, saturating toward r_max far from the source
        return self.r_floor + (self.r_max - self.r_floor) * (self.gamma * d2) / (1.0 + self.gamma * d2)

    def quantize(self, raw: float) -> float:
        clamped = min(max(raw, 0.0), self.r_max)
        if self.adc_bits is None:
            return clamped
        step = self.r_max / (2 ** self.adc_bits - 1)
        return round(clamped / step) * step


@dataclass(frozen=True)
class SourceSchedule:
    breakpoints: tuple    # ((t_s, z_src_mm), ...), times strictly increasing
    interpolation: Literal["step", "linear"] = "step"

    def validate(self) -> None:
        if not self.breakpoints:
            raise ConfigError("source schedule is empty")
        times = [t for t, _ in self.breakpoints]
        if any(t1 >= t2 for t1, t2 in zip(times, times[1:])):
            raise ConfigError(f"schedule breakpoint times must be strictly increasing: {times}")
        if self.interpolation not in ("step", "linear"):
            raise ConfigError(f"unknown interpolation '{self.interpolation}'")


def source_position(t: float, schedule: SourceSchedule) -> float:
    """Scheduled source position at time t.  Before the first breakpoint the
    first position applies."""
    bps = schedule.breakpoints
    if not bps:
        raise ConfigError("source schedule is empty")
    if t <= bps[0][0]:
        return bps[0][1]
    for (t0, z0), (t1, z1) in zip(bps, bps[1:]):
        if t < t1:
            if schedule.interpolation == "linear":
                frac = (t - t0) / (t1 - t0)
                return z0 + frac * (z1 - z0)
            return z0
    return bps[-1][1]


@dataclass(frozen=True)
class LightField:
    schedule: SourceSchedule
    sensor: SensorModel = field(default_factory=SensorModel)

    kind = "light_field"

    def validate(self) -> None:
        self.schedule.validate()
        self.sensor.validate()


def light_sensor_read(z: float, t: float, fld: LightField,
                      rng: random.Random) -> float:
    """Quantized, clamped, noisy photoresistor reading at position z (mm)."""
    raw = fld.sensor.noise_free(z - source_position(t, fld.schedule))
    if fld.sensor.noise_sigma > 0:
        raw += rng.gauss(0.0, fld.sensor.noise_sigma)
    return fld.sensor.quantize(raw)
