"""Electromagnet coil-current response.

The coil is a first-order lag from commanded to achieved current, stepped
with the exact zero-order-hold discretization so any tick length is stable.
The time constant is derived from the 99% settle time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ParameterError

LN100 = math.log(100.0)
OUTPUT_RATE_HZ = 96000.0


def tau_from_settle(settle_99: float) -> float:
    return settle_99 / LN100


@dataclass(frozen=True)
class ActuatorModel:
    tau: float = tau_from_settle(1.0e-3)  # s
    i_min: float = -2.0  # A
    i_max: float = 2.0  # A
    output_rate: float = OUTPUT_RATE_HZ  # Hz
    # transport delay on top of the coil dynamics; total tactile output
    # latency is settle time + this
    output_latency_extra: float = 1.6e-3  # s

    def __post_init__(self):
        problems = []
        if not self.tau > 0:
            problems.append("tau must be > 0")
        if not self.i_min < self.i_max:
            problems.append("i_min must be < i_max")
        if not self.output_rate > 0:
            problems.append("output_rate must be > 0")
        if not self.output_latency_extra >= 0:
            problems.append("output_latency_extra must be >= 0")
        if problems:
            raise ParameterError("; ".join(problems))

    @property
    def dt(self) -> float:
        return 1.0 / self.output_rate

    @property
    def output_latency(self) -> float:
        return settle_time_99(self) + self.output_latency_extra


# Legacy electromagnet: 33 ms to reach 99%.
LEGACY = ActuatorModel(tau=tau_from_settle(33e-3))


@dataclass(frozen=True)
class ActuatorState:
    i_act: float = 0.0
    t: float = 0.0
    saturated: bool = False


def clamp_command(model: ActuatorModel, i_cmd: float) -> tuple[float, bool]:
    if i_cmd > model.i_max:
        return model.i_max, True
    if i_cmd < model.i_min:
        return model.i_min, True
    return i_cmd, False


def step(model: ActuatorModel, state: ActuatorState, i_cmd: float, dt: float) -> ActuatorState:
    if not dt > 0:
        raise ParameterError("dt must be > 0")
    target, sat = clamp_command(model, i_cmd)
    k = -math.expm1(-dt / model.tau)
    return ActuatorState(state.i_act + (target - state.i_act) * k, state.t + dt, sat)


def settle_time_99(model: ActuatorModel) -> float:
    return model.tau * LN100


def freq_response(model: ActuatorModel, f: float) -> float:
    if f < 0:
        raise ParameterError("frequency must be >= 0")
    wt = 2.0 * math.pi * f * model.tau
    return 1.0 / math.sqrt(1.0 + wt * wt)


def step_response(model: ActuatorModel, duration: float, target: float = 1.0) -> np.ndarray:
    """Achieved current at every output tick of a 0 -> target step, tick 0 included."""
    n = int(round(duration * model.output_rate))
    out = np.empty(n + 1)
    st = ActuatorState()
    out[0] = st.i_act
    for k in range(1, n + 1):
        st = step(model, st, target, model.dt)
        out[k] = st.i_act
    return out


def measure_settle_time(model: ActuatorModel, level: float = 0.99) -> float:
    """Empirical time for a unit step to reach ``level``, linearly interpolated between ticks."""
    horizon = 3.0 * settle_time_99(model)
    y = step_response(replace(model, i_max=max(model.i_max, 1.0)), horizon)
    k = int(np.argmax(y >= level))
    if y[k] < level:
        raise RuntimeError("step response never reached the requested level")
    frac = (level - y[k - 1]) / (y[k] - y[k - 1])
    return (k - 1 + frac) * model.dt


def measure_gain(model: ActuatorModel, f: float, amplitude: float = 0.5,
                 settle_periods: int = 10, periods: int = 20) -> float:
    """Steady-state gain from a sinusoidal command, by projection onto sin/cos."""
    amplitude = min(amplitude, 0.9 * min(abs(model.i_min), abs(model.i_max)))
    dt = model.dt
    # integer number of periods in the analysis window where possible
    n_settle = int(math.ceil(max(settle_periods / f, 10 * model.tau) / dt))
    n_win = int(round(periods / f / dt))
    st = ActuatorState()
    ts = np.arange(n_settle + n_win) * dt
    cmd = amplitude * np.sin(2.0 * math.pi * f * ts)
    y = np.empty_like(ts)
    for k, c in enumerate(cmd):
        y[k] = st.i_act
        st = step(model, st, c, dt)
    tw, yw = ts[n_settle:], y[n_settle:]
    basis = np.column_stack([np.sin(2 * math.pi * f * tw), np.cos(2 * math.pi * f * tw),
                             np.ones_like(tw)])
    coef, *_ = np.linalg.lstsq(basis, yw, rcond=None)
    return math.hypot(coef[0], coef[1]) / amplitude
