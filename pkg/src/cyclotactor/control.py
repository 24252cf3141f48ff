"""Feedforward controllers mapping a distance estimate to a coil current.

There is no force sensor, so every mode goes through the landscape: a
force request at the estimated distance is inverted to a current.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Union

from .errors import ParameterError
from .landscape import ForceLandscape, invert_current_clamped

MAX_VIBRO_HZ = 1000.0


def _const(value: float) -> Callable[[float], float]:
    def f(t: float) -> float:
        return value
    f.value = value
    return f


@dataclass(frozen=True)
class PassiveSurface:
    """Cancel all magnetic force so the device feels like an inert surface."""


@dataclass(frozen=True)
class ForceTrack:
    target: Callable[[float], float]  # N as a function of time (s)

    @classmethod
    def constant(cls, force: float) -> "ForceTrack":
        return cls(_const(force))


@dataclass(frozen=True)
class Vibro:
    f_dc: float  # N
    amplitude: float  # N
    frequency: float  # Hz

    def __post_init__(self):
        if not 0 <= self.frequency <= MAX_VIBRO_HZ:
            raise ParameterError(f"vibro frequency must be in [0, {MAX_VIBRO_HZ}] Hz")

    def force(self, t: float) -> float:
        return self.f_dc + self.amplitude * math.sin(2.0 * math.pi * self.frequency * t)


@dataclass(frozen=True)
class OpenLoop:
    current: Callable[[float], float]  # A as a function of time (s)

    @classmethod
    def constant(cls, current: float) -> "OpenLoop":
        return cls(_const(current))


ControllerMode = Union[PassiveSurface, ForceTrack, Vibro, OpenLoop]


def time_varying(mode: ControllerMode) -> bool:
    """Whether the command must be re-evaluated at the output rate."""
    if isinstance(mode, Vibro):
        return mode.amplitude != 0 and mode.frequency > 0
    if isinstance(mode, (ForceTrack, OpenLoop)):
        fn = mode.target if isinstance(mode, ForceTrack) else mode.current
        return not hasattr(fn, "value")
    return False


class Command(NamedTuple):
    current: float
    saturated: bool


def compute_command(mode: ControllerMode, d_est: float, landscape: ForceLandscape,
                    t: float = 0.0) -> Command:
    """Current command with a saturation flag; never raises on saturation."""
    if isinstance(mode, OpenLoop):
        return Command(mode.current(t), False)
    d = min(max(d_est, landscape.d_min), landscape.d_max)
    clipped = d != d_est
    if isinstance(mode, PassiveSurface):
        force = 0.0
    elif isinstance(mode, ForceTrack):
        force = mode.target(t)
    elif isinstance(mode, Vibro):
        force = mode.force(t)
    else:
        raise ParameterError(f"unknown controller mode {mode!r}")
    current, sat = invert_current_clamped(landscape, d, force)
    return Command(current, sat or clipped)


def control_update(mode: ControllerMode, d_est: float, landscape: ForceLandscape,
                   t: float = 0.0) -> float:
    return compute_command(mode, d_est, landscape, t).current


@dataclass(frozen=True)
class TriggerMap:
    v_min: float = 50.0  # mm/s
    v_ref: float = 1050.0  # mm/s
    gamma: float = 1.0

    def __post_init__(self):
        if not 0 < self.v_min < self.v_ref:
            raise ParameterError("trigger map needs 0 < v_min < v_ref")
        if not self.gamma > 0:
            raise ParameterError("trigger exponent must be > 0")


def trigger_amplitude(tmap: TriggerMap, v_contact: float) -> float:
    """Approach speed at contact mapped to a trigger amplitude in [0, 1]."""
    if v_contact < tmap.v_min:
        return 0.0
    x = (v_contact - tmap.v_min) / (tmap.v_ref - tmap.v_min)
    return min(max(x ** tmap.gamma, 0.0), 1.0)
