"""Infrared proximity sensor model.

Reflected intensity falls off as ``s_max / (1 + d/d_s)**2``. A calibration
table maps intensity back to distance; readings are quantized to the
sensor resolution and published at a fixed rate after a pure transport
delay.
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import ParameterError, RangeError


@dataclass(frozen=True)
class SensorModel:
    s_max: float = 1.0
    d_s: float = 10.0  # falloff scale, mm
    range_max: float = 35.0  # mm
    resolution: float = 0.2  # mm
    rate: float = 4800.0  # Hz
    latency: float = 1.8e-3  # s, includes sampling delay
    noise_sigma: float = 0.0  # additive, in normalized intensity units

    def __post_init__(self):
        problems = []
        if not self.s_max > 0:
            problems.append("s_max must be > 0")
        if not self.d_s > 0:
            problems.append("d_s must be > 0")
        if not self.range_max > 0:
            problems.append("range_max must be > 0")
        if not self.resolution > 0:
            problems.append("resolution must be > 0")
        if not self.rate > 0:
            problems.append("rate must be > 0")
        if not self.latency >= 0:
            problems.append("latency must be >= 0")
        if not self.noise_sigma >= 0:
            problems.append("noise_sigma must be >= 0")
        if problems:
            raise ParameterError("; ".join(problems))

    @property
    def period(self) -> float:
        return 1.0 / self.rate


def clean_intensity(model: SensorModel, d: float) -> float:
    return model.s_max / (1.0 + d / model.d_s) ** 2


def intensity_of(model: SensorModel, d: float, rng: np.random.Generator | None = None) -> float:
    """Reflected intensity at distance ``d``; noise is drawn from ``rng`` when enabled."""
    if not 0.0 <= d <= model.range_max:
        raise RangeError("distance", d, 0.0, model.range_max)
    s = clean_intensity(model, d)
    if model.noise_sigma > 0:
        if rng is None:
            raise ParameterError("a seeded rng is required when noise is enabled")
        s += rng.normal(0.0, model.noise_sigma)
    return s


def quantize(x: float, step: float) -> float:
    """Nearest multiple of ``step``, ties away from zero."""
    n = math.floor(abs(x) / step + 0.5 + 1e-9)
    return math.copysign(round(n * step, 9), x) if n else 0.0


@dataclass(frozen=True)
class CalibrationLut:
    """Monotone intensity -> distance table.

    Interpolation runs on ``intensity**-0.5``, which is linear in distance
    for an inverse-square falloff and near-linear for any similar curve.
    """

    intensities: tuple[float, ...]  # strictly decreasing
    distances: tuple[float, ...]  # strictly increasing, mm
    resolution: float = 0.2

    def __post_init__(self):
        s, d = self.intensities, self.distances
        if len(s) != len(d) or len(s) < 2:
            raise ParameterError("calibration table needs matching columns of length >= 2")
        if any(b >= a for a, b in zip(s, s[1:])):
            raise ParameterError("calibration intensities must strictly decrease with distance")
        if any(b <= a for a, b in zip(d, d[1:])):
            raise ParameterError("calibration distances must strictly increase")
        if any(x <= 0 for x in s):
            raise ParameterError("calibration intensities must be positive")
        object.__setattr__(self, "_keys", tuple(x ** -0.5 for x in s))

    @property
    def s_hi(self) -> float:
        return self.intensities[0]

    @property
    def s_lo(self) -> float:
        return self.intensities[-1]


def calibrate(model: SensorModel, step: float | None = None) -> CalibrationLut:
    if model.noise_sigma != 0:
        raise ParameterError("calibrate requires a noise-free sensor model")
    step = step or model.resolution / 4
    n = int(math.ceil(model.range_max / step - 1e-9))
    ds = [min(k * step, model.range_max) for k in range(n + 1)]
    ds[-1] = model.range_max
    return CalibrationLut(
        tuple(clean_intensity(model, d) for d in ds), tuple(ds), model.resolution
    )


def distance_unquantized(lut: CalibrationLut, s: float) -> tuple[float, bool]:
    if s >= lut.s_hi:
        return lut.distances[0], s > lut.s_hi
    if s <= lut.s_lo:
        return lut.distances[-1], s < lut.s_lo
    keys = lut._keys
    k = s ** -0.5
    j = min(max(bisect_left(keys, k), 1), len(keys) - 1)
    w = (k - keys[j - 1]) / (keys[j] - keys[j - 1])
    return lut.distances[j - 1] + w * (lut.distances[j] - lut.distances[j - 1]), False


def distance_of(lut: CalibrationLut, s: float) -> tuple[float, bool]:
    """Distance for intensity ``s`` at the sensor resolution.

    Returns ``(distance_mm, saturated)``; out-of-span intensities clamp to the
    nearest table end with ``saturated`` set.
    """
    d, sat = distance_unquantized(lut, s)
    return quantize(d, lut.resolution), sat


class SensorChannel:
    """Stateful measurement path: intensity, noise, calibration, quantization."""

    def __init__(self, model: SensorModel, seed: int = 0, lut: CalibrationLut | None = None):
        self.model = model
        self.lut = lut or calibrate(replace(model, noise_sigma=0.0))
        self.rng = np.random.default_rng(seed)

    def measure(self, d_true: float) -> tuple[float, bool]:
        d = min(max(d_true, 0.0), self.model.range_max)
        clipped = d != d_true
        s = intensity_of(self.model, d, self.rng)
        d_meas, sat = distance_of(self.lut, s)
        return d_meas, sat or clipped


def sample_stream(model: SensorModel, true_distance: Callable[[float], float],
                  duration: float, seed: int = 0) -> list[tuple[float, float]]:
    """Samples ``(t_wall, d_meas)`` at the sensor rate over ``[0, duration)``.

    The sample published at ``t`` carries the true distance at ``t - latency``.
    """
    if not duration > 0:
        raise ParameterError("duration must be > 0")
    chan = SensorChannel(model, seed)
    n = int(math.ceil(duration * model.rate - 1e-9))
    out = []
    for k in range(n):
        t = k / model.rate
        d, _ = chan.measure(true_distance(t - model.latency))
        out.append((t, d))
    return out
