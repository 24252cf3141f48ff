"""Deterministic multirate closed-loop simulator.

One 96 kHz clock drives everything. Each tick: fire due events, step the
coil, evaluate magnetic, contact and finger forces, integrate the keystone
semi-implicitly, and every 20th tick publish a delayed sensor sample that
runs the controller and predictor.

Positions are in mm, velocities in mm/s, forces in N, masses in kg.
"""

from __future__ import annotations

import io
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

from .actuator import ActuatorModel, clamp_command
from .control import (ControllerMode, OpenLoop, PassiveSurface, TriggerMap, Vibro, ForceTrack,
                      compute_command, time_varying)
from .errors import ConfigError, FormatError, SimulationAbort
from .events import EventQueue, ScheduledEvent
from .landscape import ForceLandscape
from .predictor import MotionEstimator, Predictor, PredictorConfig
from .sensing import SensorChannel, SensorModel

TRACE_HEADER = "t_ms,d_true_mm,d_meas_mm,v_est_mm_s,I_cmd_A,I_act_A,F_mag_N,F_contact_N,event"
SUMMARY_MARKER = "#summary"
ABOVE_SPAN_FADE_MM = 1.0


@dataclass(frozen=True)
class Intent:
    """Intended fingertip position over time (mm).

    ``hold`` stays at ``start``; ``tap`` and ``sweep`` move from ``start``
    toward ``end`` at ``speed`` (mm/s) and then hold; ``sinusoid`` oscillates
    about ``start`` with ``amplitude`` and ``frequency``.
    """

    kind: str = "hold"
    start: float = 20.0
    end: float = -2.0
    speed: float = 0.0
    amplitude: float = 0.0
    frequency: float = 0.0

    def __post_init__(self):
        if self.kind not in ("hold", "tap", "sweep", "sinusoid"):
            raise ValueError(f"unknown intent kind {self.kind!r}")
        if self.kind in ("tap", "sweep") and not self.speed > 0:
            raise ValueError(f"{self.kind} intent needs speed > 0")

    @property
    def _ramp_time(self) -> float:
        return abs(self.end - self.start) / self.speed

    def position(self, t: float) -> float:
        if self.kind == "hold":
            return self.start
        if self.kind == "sinusoid":
            return self.start + self.amplitude * math.sin(2 * math.pi * self.frequency * t)
        sign = 1.0 if self.end >= self.start else -1.0
        if t >= self._ramp_time:
            return self.end
        return self.start + sign * self.speed * t

    def velocity(self, t: float) -> float:
        if self.kind == "hold":
            return 0.0
        if self.kind == "sinusoid":
            w = 2 * math.pi * self.frequency
            return self.amplitude * w * math.cos(w * t)
        if t >= self._ramp_time:
            return 0.0
        return (1.0 if self.end >= self.start else -1.0) * self.speed


@dataclass(frozen=True)
class FingerModel:
    mass: float = 0.03  # kg
    k_f: float = 0.5  # N/mm, pull toward the intent position
    c_f: float = 0.01  # N*s/mm, on velocity relative to the intent
    gravity: float = 9.81  # m/s^2, downward
    intent: Intent = Intent()
    clamp: bool = False  # follow the intent kinematically, ignoring forces
    initial: float | None = None  # mm; default is static equilibrium under gravity

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError("finger mass must be > 0")
        if self.k_f < 0 or self.c_f < 0:
            raise ValueError("finger stiffness and damping must be >= 0")


@dataclass(frozen=True)
class ContactModel:
    k_c: float = 10.0  # N/mm
    c_c: float = 0.05  # N*s/mm

    def __post_init__(self):
        if not self.k_c > 0:
            raise ValueError("contact stiffness must be > 0")


@dataclass(frozen=True)
class Scenario:
    landscape: ForceLandscape
    sensor: SensorModel = SensorModel()
    actuator: ActuatorModel = ActuatorModel()
    finger: FingerModel = FingerModel()
    contact: ContactModel = ContactModel()
    controller: ControllerMode = PassiveSurface()
    # distance estimate fed to the controller: raw measurement or the
    # estimator's tracked position, extrapolated forward by ``controller_lead``
    # (None: sensor latency + half a sensor period + coil time constant)
    controller_estimate: str = "tracked"
    controller_lead: float | None = None  # s
    trigger: TriggerMap = TriggerMap()
    predictor: PredictorConfig | None = None
    duration: float = 0.1  # s
    seed: int = 0
    decimation: int = 20
    command_delay: float = 0.0  # s, transport delay on coil commands
    abort_distance: float = 1000.0  # mm

    def validate(self) -> None:
        problems = []
        if not self.duration > 0:
            problems.append("duration must be > 0")
        if self.actuator.output_rate != 96000.0:
            problems.append("physics tick requires actuator output_rate = 96000 Hz")
        ratio = self.actuator.output_rate / self.sensor.rate
        if abs(ratio - round(ratio)) > 1e-9:
            problems.append("sensor rate must divide the output rate")
        if self.decimation < 1:
            problems.append("decimation must be >= 1")
        g = self.landscape
        if self.actuator.i_min < g.i_min or self.actuator.i_max > g.i_max:
            problems.append(
                f"actuator current range [{self.actuator.i_min}, {self.actuator.i_max}] A "
                f"exceeds landscape range [{g.i_min}, {g.i_max}] A"
            )
        if self.controller_estimate not in ("measured", "tracked"):
            problems.append("controller_estimate must be 'measured' or 'tracked'")
        if (self.controller_lead or 0.0) < 0 or self.command_delay < 0:
            problems.append("controller lead and command delay must be >= 0")
        if problems:
            raise ConfigError(problems)


class FingerState(NamedTuple):
    d: float  # mm
    v: float  # mm/s


def step_physics(state: FingerState, force: float, dt: float, mass: float) -> FingerState:
    """Semi-implicit Euler: velocity first, then position with the new velocity."""
    v = state.v + force / mass * 1000.0 * dt
    return FingerState(state.d + v * dt, v)


def magnetic_force(grid: ForceLandscape, d: float, current: float) -> float:
    """Landscape force, clamped below the span and faded to zero just above it."""
    dist, curr, f = grid.distances, grid.currents, grid.forces
    fade = 1.0
    if d <= dist[0]:
        d = dist[0]
    elif d >= dist[-1]:
        fade = 1.0 - (d - dist[-1]) / ABOVE_SPAN_FADE_MM
        if fade <= 0.0:
            return 0.0
        d = dist[-1]
    current = min(max(current, curr[0]), curr[-1])
    i = min(max(bisect_right(dist, d) - 1, 0), len(dist) - 2)
    j = min(max(bisect_right(curr, current) - 1, 0), len(curr) - 2)
    u = (d - dist[i]) / (dist[i + 1] - dist[i])
    w = (current - curr[j]) / (curr[j + 1] - curr[j])
    r0, r1 = f[i], f[i + 1]
    val = ((1.0 - u) * ((1.0 - w) * r0[j] + w * r0[j + 1])
           + u * ((1.0 - w) * r1[j] + w * r1[j + 1]))
    return val * fade


def contact_force(model: ContactModel, d: float, v: float) -> float:
    """Penalty force for penetration (d < 0); pushes only, never pulls."""
    if d >= 0.0:
        return 0.0
    return max(0.0, -model.k_c * d - model.c_c * v)


def auto_lead(sensor: SensorModel, actuator: ActuatorModel) -> float:
    """Age of the distance information by the time the coil has responded."""
    return sensor.latency + 0.5 / sensor.rate + actuator.tau


def mode_name(mode: ControllerMode) -> str:
    return {PassiveSurface: "passive_surface", ForceTrack: "force_track",
            Vibro: "vibro", OpenLoop: "open_loop"}[type(mode)]


def fmt(x: float) -> str:
    return f"{x:.6g}"


@dataclass
class Trace:
    rows: list = field(default_factory=list)  # tuples in TRACE_HEADER order
    summary: dict = field(default_factory=dict)  # key -> formatted string
    events: list = field(default_factory=list)  # ScheduledEvent, fired only

    def column(self, name: str) -> list:
        idx = TRACE_HEADER.split(",").index(name)
        return [r[idx] for r in self.rows]

    def to_text(self) -> str:
        buf = io.StringIO()
        buf.write(TRACE_HEADER + "\n")
        for r in self.rows:
            buf.write(",".join(fmt(x) for x in r[:8]) + "," + r[8] + "\n")
        buf.write(SUMMARY_MARKER + "\n")
        for k, v in self.summary.items():
            buf.write(f"{k}={v}\n")
        return buf.getvalue()

    def summary_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.summary.items())

    def write(self, path) -> None:
        Path(path).write_text(self.to_text())


def read_trace(path) -> Trace:
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or lines[0] != TRACE_HEADER:
        raise FormatError("trace header mismatch", line=1, path=path)
    tr = Trace()
    in_summary = False
    for lineno, line in enumerate(lines[1:], start=2):
        if in_summary:
            if not line.strip():
                continue
            if "=" not in line:
                raise FormatError("summary line must be key=value", line=lineno, path=path)
            k, v = line.split("=", 1)
            tr.summary[k] = v
            continue
        if line == SUMMARY_MARKER:
            in_summary = True
            continue
        cells = line.split(",")
        if len(cells) != 9:
            raise FormatError(f"expected 9 cells, got {len(cells)}", line=lineno, path=path)
        try:
            nums = tuple(float(c) for c in cells[:8])
        except ValueError:
            raise FormatError("bad number", line=lineno, path=path) from None
        tr.rows.append(nums + (cells[8],))
    if not in_summary:
        raise FormatError(f"missing {SUMMARY_MARKER} block", line=len(lines), path=path)
    return tr


def _event_cell(ev: ScheduledEvent) -> str:
    return f"{ev.channel}:{fmt(ev.physical_onset * 1e3)}:{'late' if ev.late else 'ontime'}"


def _crossings(times, ds) -> list[float]:
    """Times where d passes from >= 0 to < 0, linearly interpolated."""
    out = []
    for k in range(1, len(ds)):
        if ds[k - 1] >= 0.0 > ds[k]:
            frac = ds[k - 1] / (ds[k - 1] - ds[k])
            out.append(times[k - 1] + frac * (times[k] - times[k - 1]))
    return out


def simulate(sc: Scenario) -> Trace:
    sc.validate()
    act, sen, fing, grid = sc.actuator, sc.sensor, sc.finger, sc.landscape
    dt = act.dt
    n_ticks = int(round(sc.duration * act.output_rate))
    per_sample = int(round(act.output_rate / sen.rate))
    delay_ticks = sen.latency * act.output_rate
    cmd_delay_ticks = int(round(sc.command_delay * act.output_rate))
    k_act = -math.expm1(-dt / act.tau)
    g_force = -fing.mass * fing.gravity  # N
    intent = fing.intent
    lead = sc.controller_lead
    if lead is None:
        lead = auto_lead(sen, act)

    d = fing.initial
    if d is None:
        d = intent.position(0.0)
        if fing.k_f > 0 and not fing.clamp:
            d += g_force / fing.k_f
    v = intent.velocity(0.0)
    d_init, v_init = d, v

    channel = SensorChannel(sen, sc.seed)
    queue = EventQueue()
    predictor = Predictor(sc.predictor, sc.trigger) if sc.predictor else None
    motion = predictor.motion if predictor else MotionEstimator(PredictorConfig())
    dynamic_cmd = time_varying(sc.controller)

    hist: list[float] = []
    cmd_hist: list[float] = []
    d_meas = float("nan")
    d_est = d
    v_est = 0.0
    i_cmd, cmd_sat = compute_command(sc.controller, d, grid, 0.0)
    # coil starts settled on the initial command
    i_act = clamp_command(act, i_cmd)[0]
    rows, times, ds = [], [], []
    fired_events: list[ScheduledEvent] = []
    sat_ticks = 0
    max_fmag = 0.0
    max_fmag_approach = 0.0
    in_approach = True
    min_d = d
    peak_contact = 0.0

    def true_at(t: float) -> float:
        x = t / dt
        if x <= 0.0:
            return d_init + v_init * t
        k = int(x)
        if k + 1 >= len(hist):
            return hist[-1]
        w = x - k
        return hist[k] * (1.0 - w) + hist[k + 1] * w

    for n in range(n_ticks + 1):
        t = n * dt
        hist.append(d)
        times.append(t)
        ds.append(d)

        # 1. events
        fired = queue.due_events(t)
        if fired:
            fired_events.extend(fired)
            if predictor:
                predictor.on_fired(fired)

        # 2. actuator
        if dynamic_cmd:
            i_cmd, cmd_sat = compute_command(sc.controller, d_est, grid, t)
        cmd_hist.append(i_cmd)
        eff = cmd_hist[n - cmd_delay_ticks] if n >= cmd_delay_ticks else cmd_hist[0]
        target, clamp_sat = clamp_command(act, eff)
        i_act += (target - i_act) * k_act
        if cmd_sat or clamp_sat:
            sat_ticks += 1

        # 3-4. forces
        f_mag = magnetic_force(grid, d, i_act)
        f_con = contact_force(sc.contact, d, v)
        xi, vi = intent.position(t), intent.velocity(t)
        f_fing = fing.k_f * (xi - d) + fing.c_f * (vi - v)
        total = f_mag + f_con + f_fing + g_force

        if abs(f_mag) > max_fmag:
            max_fmag = abs(f_mag)
        if in_approach:
            if d < 0.0:
                in_approach = False
            elif abs(f_mag) > max_fmag_approach:
                max_fmag_approach = abs(f_mag)
        if f_con > peak_contact:
            peak_contact = f_con
        if d < min_d:
            min_d = d

        # 6-7. sensor publication, controller, predictor
        if n % per_sample == 0:
            d_meas, _ = channel.measure(true_at(t - sen.latency))
            if predictor:
                d_pos, v_est = predictor.on_sample(t, d_meas, queue)
            else:
                d_pos, v_est = motion.update(t, d_meas)
            base = d_meas if sc.controller_estimate == "measured" else d_pos
            d_est = base - v_est * lead
            if not dynamic_cmd:
                i_cmd, cmd_sat = compute_command(sc.controller, d_est, grid, t)

        if n % sc.decimation == 0 or fired:
            cell = ";".join(_event_cell(ev) for ev in fired)
            rows.append((t * 1e3, d, d_meas, v_est, cmd_hist[n], i_act, f_mag, f_con, cell))

        # 5. integrate
        if fing.clamp:
            d, v = intent.position(t + dt), intent.velocity(t + dt)
        else:
            v += total / fing.mass * 1000.0 * dt
            d += v * dt
        if not (abs(d) <= sc.abort_distance):
            raise SimulationAbort(
                f"numeric divergence at t={t * 1e3:.6g} ms: d={d!r} mm exceeds "
                f"{sc.abort_distance} mm"
            )

    trace = Trace(rows=rows, events=fired_events)
    contacts = _crossings(times, ds)
    trace.summary = _summarize(sc, n_ticks, contacts, max_fmag, max_fmag_approach, min_d,
                               peak_contact, sat_ticks, predictor, fired_events, queue)
    return trace


def _ms(x: float | None) -> str:
    return "none" if x is None else fmt(x * 1e3)


def _summarize(sc, n_ticks, contacts, max_fmag, max_fmag_approach, min_d, peak_contact,
               sat_ticks, predictor, fired_events, queue) -> dict:
    s: dict[str, str] = {}
    s["ticks"] = str(n_ticks + 1)
    s["duration_s"] = fmt(sc.duration)
    s["seed"] = str(sc.seed)
    s["controller"] = mode_name(sc.controller)
    s["contact_count"] = str(len(contacts))
    s["contact_times_ms"] = ";".join(fmt(c * 1e3) for c in contacts) or "none"
    s["first_contact_ms"] = _ms(contacts[0] if contacts else None)
    s["max_abs_F_mag_N"] = fmt(max_fmag)
    s["max_abs_F_mag_during_approach"] = fmt(max_fmag_approach)
    s["min_d_true_mm"] = fmt(min_d)
    s["max_penetration_mm"] = fmt(max(0.0, -min_d))
    s["peak_contact_force_N"] = fmt(peak_contact)
    s["saturation_ticks"] = str(sat_ticks)

    preds = predictor.predictions if predictor else []
    s["predictions"] = str(len(preds))
    worst = None
    for i, p in enumerate(preds):
        after = [c for c in contacts if c >= p.made_at - 1e-12]
        contact = after[0] if after else None
        err = None if contact is None else p.intended_onset - contact
        if err is not None and (worst is None or abs(err) > abs(worst)):
            worst = err
        s[f"prediction.{i}.made_ms"] = _ms(p.made_at)
        s[f"prediction.{i}.intended_onset_ms"] = _ms(p.intended_onset)
        s[f"prediction.{i}.contact_ms"] = _ms(contact)
        s[f"prediction.{i}.error_ms"] = _ms(err)
        s[f"prediction.{i}.v_est_mm_s"] = fmt(p.v_est)
        s[f"prediction.{i}.late"] = "late" if p.late else "ontime"
    s["onset_error_ms"] = "none" if worst is None else fmt(abs(worst) * 1e3)

    s["events"] = str(len(fired_events))
    skew = None
    for i, ev in enumerate(fired_events):
        s[f"event.{i}.channel"] = ev.channel
        s[f"event.{i}.amplitude"] = fmt(ev.amplitude)
        s[f"event.{i}.intended_onset_ms"] = _ms(ev.intended_onset)
        s[f"event.{i}.issue_ms"] = _ms(ev.issue_time)
        s[f"event.{i}.fired_ms"] = _ms(ev.fired_at)
        s[f"event.{i}.physical_onset_ms"] = _ms(ev.physical_onset)
        s[f"event.{i}.late"] = "late" if ev.late else "ontime"
        s[f"event.{i}.deficit_ms"] = fmt(max(0.0, ev.deficit) * 1e3)
    by_onset: dict[float, list] = {}
    for ev in fired_events:
        by_onset.setdefault(ev.intended_onset, []).append(ev)
    for group in by_onset.values():
        if len(group) > 1:
            ons = [e.physical_onset for e in group]
            gap = max(ons) - min(ons)
            skew = gap if skew is None else max(skew, gap)
    s["onset_skew_ms"] = _ms(skew)
    s["unfired_events"] = str(len(queue))
    return s
