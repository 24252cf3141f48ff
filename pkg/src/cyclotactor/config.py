"""Scenario files: ``key = value`` lines grouped under section headers.

Parsing is strict. Unknown sections or keys, bad values, and missing
required keys are all collected and reported together.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

from .actuator import ActuatorModel, tau_from_settle
from .control import ForceTrack, OpenLoop, PassiveSurface, TriggerMap, Vibro
from .errors import ConfigError, CyclotactorError
from .landscape import SyntheticLandscapeParams, generate_synthetic, load_landscape
from .predictor import PredictorConfig
from .sensing import SensorModel
from .sim import ContactModel, FingerModel, Intent, Scenario

REQUIRED = object()
AUTO = "auto"


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _choice(*options):
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return text
    parse.__name__ = "|".join(options)
    return parse


def _auto_float(text: str):
    return AUTO if text.strip() == AUTO else float(text)


_auto_float.__name__ = "float|auto"

# section -> key -> (parser, default, help)
SCHEMA: dict[str, dict[str, tuple]] = {
    "landscape": {
        "grid": (str, None, "landscape CSV (relative to the scenario file); synthetic if absent"),
        "a": (float, 100.0, "synthetic coil coupling, N*mm^2/A"),
        "b": (float, 5000.0, "synthetic residual magnetization, N*mm^4"),
        "d0_mm": (float, 5.0, "synthetic geometric offset"),
        "d_step_mm": (float, 0.5, "synthetic distance step over [0, 35] mm"),
        "i_min_a": (float, -2.0, "synthetic lowest current"),
        "i_max_a": (float, 2.0, "synthetic highest current"),
        "i_step_a": (float, 0.1, "synthetic current step"),
        "noise_n": (float, 0.0, "synthetic per-cell noise sigma"),
        "seed": (int, 0, "synthetic noise seed"),
    },
    "sensor": {
        "s_max": (float, 1.0, "peak normalized intensity"),
        "falloff_mm": (float, 10.0, "intensity falloff scale"),
        "range_mm": (float, 35.0, "proximity range"),
        "resolution_mm": (float, 0.2, "quantization step"),
        "rate_hz": (float, 4800.0, "sample rate"),
        "latency_ms": (float, 1.8, "input latency (pure delay)"),
        "noise_sigma": (float, 0.0, "additive intensity noise"),
    },
    "actuator": {
        "settle_ms": (float, 1.0, "time to 99% of a current step"),
        "i_min_a": (float, -2.0, "command clamp, low"),
        "i_max_a": (float, 2.0, "command clamp, high"),
        "output_rate_hz": (float, 96000.0, "output (physics) rate"),
        "latency_extra_ms": (float, 1.6, "transport delay added to the settle time"),
        "command_delay_ms": (float, 0.0, "transport delay applied to coil commands"),
    },
    "finger": {
        "mass_kg": (float, 0.03, "keystone + fingertip mass"),
        "k_f_n_per_mm": (float, 0.5, "pull toward the intent position"),
        "c_f_ns_per_mm": (float, 0.01, "damping on velocity relative to the intent"),
        "gravity_m_s2": (float, 9.81, "downward gravity"),
        "intent": (_choice("hold", "tap", "sweep", "sinusoid"), "hold", "intent trajectory"),
        "start_mm": (float, 20.0, "intent start / hold / sinusoid centre"),
        "end_mm": (float, -2.0, "tap or sweep end"),
        "speed_mm_s": (float, 0.0, "tap or sweep speed"),
        "amplitude_mm": (float, 0.0, "sinusoid amplitude"),
        "frequency_hz": (float, 0.0, "sinusoid frequency"),
        "clamp": (_bool, False, "follow the intent kinematically"),
        "initial_mm": (_auto_float, AUTO, "initial distance; auto = static equilibrium"),
        "contact_k_n_per_mm": (float, 10.0, "surface contact stiffness"),
        "contact_c_ns_per_mm": (float, 0.05, "surface contact damping"),
    },
    "controller": {
        "mode": (_choice("passive_surface", "force_track", "vibro", "open_loop"),
                 "passive_surface", "controller mode"),
        "force_n": (float, 0.0, "force_track target"),
        "f_dc_n": (float, 0.0, "vibro DC force"),
        "amplitude_n": (float, 0.0, "vibro amplitude"),
        "frequency_hz": (float, 0.0, "vibro frequency (<= 1000 Hz)"),
        "current_a": (float, 0.0, "open_loop current"),
        "estimate": (_choice("tracked", "measured"), "tracked", "distance estimate source"),
        "lead_ms": (_auto_float, AUTO,
                    "extrapolation of the estimate; auto = latency + half period + tau"),
        "trigger_v_min_mm_s": (float, 50.0, "trigger threshold speed"),
        "trigger_v_ref_mm_s": (float, 1050.0, "speed giving full trigger amplitude"),
        "trigger_gamma": (float, 1.0, "trigger power-law exponent"),
    },
    "predictor": {
        "enabled": (_bool, False, "run impact prediction and prescheduling"),
        "threshold_mm": (float, 0.0, "distance whose arrival is predicted"),
        "l_in_ms": (_auto_float, AUTO, "input latency; auto = sensor latency"),
        "l_out_tactile_ms": (_auto_float, AUTO, "tactile latency; auto = settle + extra"),
        "l_out_audio_ms": (float, 5.0, "audio output latency"),
        "v_min_mm_s": (float, 50.0, "minimum approach speed to arm"),
        "ema_alpha": (float, 0.05, "EMA smoothing factor"),
        "rearm_mm": (float, 3.0, "retreat needed before a new prediction"),
        "estimator": (_choice("linefit", "ema"), "linefit", "velocity/position estimator"),
        "window": (int, 48, "linefit window, samples"),
        "compensate_latency": (_bool, True, "extrapolate over the input latency"),
    },
    "run": {
        "duration_s": (float, REQUIRED, "simulated time"),
        "seed": (int, 0, "seed for all randomness"),
        "decimation": (int, 20, "trace row every N physics ticks"),
        "output": (str, None, "trace path (relative to the scenario file)"),
        "abort_mm": (float, 1000.0, "divergence limit on |d|"),
    },
}


def schema_help() -> str:
    lines = ["scenario file keys (defaults in brackets):"]
    for section, keys in SCHEMA.items():
        lines.append(f"  [{section}]")
        for key, (parser, default, text) in keys.items():
            if default is REQUIRED:
                shown = "required"
            elif default is None:
                shown = "unset"
            else:
                shown = str(default).lower() if isinstance(default, bool) else str(default)
            lines.append(f"    {key} = {getattr(parser, '__name__', '')} [{shown}]  {text}")
    return "\n".join(lines)


@dataclass
class LoadedScenario:
    scenario: Scenario
    output: Path | None
    values: dict


def _read_values(text: str, source: str) -> dict:
    cp = configparser.ConfigParser(delimiters=("=",), comment_prefixes=("#",),
                                   inline_comment_prefixes=("#",), strict=True,
                                   interpolation=None, default_section="\0none")
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError([str(exc).replace("\n", " ")]) from None

    problems = []
    values: dict[str, dict] = {}
    for section in cp.sections():
        if section not in SCHEMA:
            problems.append(f"unknown section [{section}]")
            continue
        for key, raw in cp.items(section):
            if key not in SCHEMA[section]:
                problems.append(f"[{section}] unknown key '{key}'")
                continue
            parser = SCHEMA[section][key][0]
            try:
                values.setdefault(section, {})[key] = parser(raw.strip())
            except ValueError as exc:
                problems.append(f"[{section}] {key} = {raw!r}: {exc}")
    if "run" not in cp.sections():
        problems.append("missing [run] section")
    for section, keys in SCHEMA.items():
        given = values.setdefault(section, {})
        for key, (_, default, _) in keys.items():
            if key in given:
                continue
            if default is REQUIRED:
                if section in cp.sections():
                    problems.append(f"[{section}] missing required key '{key}'")
            else:
                given[key] = default
    if problems:
        raise ConfigError(problems)
    return values


def parse_scenario(text: str, base_dir=".", source: str = "<scenario>") -> LoadedScenario:
    v = _read_values(text, source)
    base = Path(base_dir)
    problems: list[str] = []

    def build(section, fn):
        try:
            return fn()
        except CyclotactorError as exc:
            problems.append(f"[{section}] {exc}")
        except (ValueError, TypeError) as exc:
            problems.append(f"[{section}] {exc}")
        return None

    L = v["landscape"]

    def landscape():
        if L["grid"]:
            path = base / L["grid"]
            if not path.exists():
                raise ValueError(f"grid file not found: {path}")
            return load_landscape(path)
        return generate_synthetic(SyntheticLandscapeParams(
            a=L["a"], b=L["b"], d0=L["d0_mm"], d_step=L["d_step_mm"], i_start=L["i_min_a"],
            i_stop=L["i_max_a"], i_step=L["i_step_a"], noise_sigma=L["noise_n"],
            seed=L["seed"]))

    grid = build("landscape", landscape)

    S = v["sensor"]
    sensor = build("sensor", lambda: SensorModel(
        s_max=S["s_max"], d_s=S["falloff_mm"], range_max=S["range_mm"],
        resolution=S["resolution_mm"], rate=S["rate_hz"], latency=S["latency_ms"] * 1e-3,
        noise_sigma=S["noise_sigma"]))

    A = v["actuator"]
    actuator = build("actuator", lambda: ActuatorModel(
        tau=tau_from_settle(A["settle_ms"] * 1e-3) if A["settle_ms"] > 0 else -1.0,
        i_min=A["i_min_a"], i_max=A["i_max_a"], output_rate=A["output_rate_hz"],
        output_latency_extra=A["latency_extra_ms"] * 1e-3))

    F = v["finger"]
    finger = build("finger", lambda: FingerModel(
        mass=F["mass_kg"], k_f=F["k_f_n_per_mm"], c_f=F["c_f_ns_per_mm"],
        gravity=F["gravity_m_s2"],
        intent=Intent(F["intent"], F["start_mm"], F["end_mm"], F["speed_mm_s"],
                      F["amplitude_mm"], F["frequency_hz"]),
        clamp=F["clamp"], initial=None if F["initial_mm"] == AUTO else F["initial_mm"]))
    contact = build("finger", lambda: ContactModel(F["contact_k_n_per_mm"],
                                                   F["contact_c_ns_per_mm"]))

    C = v["controller"]

    def controller():
        mode = C["mode"]
        if mode == "passive_surface":
            return PassiveSurface()
        if mode == "force_track":
            return ForceTrack.constant(C["force_n"])
        if mode == "vibro":
            return Vibro(C["f_dc_n"], C["amplitude_n"], C["frequency_hz"])
        return OpenLoop.constant(C["current_a"])

    ctrl = build("controller", controller)
    trigger = build("controller", lambda: TriggerMap(
        C["trigger_v_min_mm_s"], C["trigger_v_ref_mm_s"], C["trigger_gamma"]))

    P = v["predictor"]
    predictor = None
    if P["enabled"] and sensor is not None and actuator is not None:
        predictor = build("predictor", lambda: PredictorConfig(
            d_threshold=P["threshold_mm"],
            l_in=sensor.latency if P["l_in_ms"] == AUTO else P["l_in_ms"] * 1e-3,
            l_out_tactile=(actuator.output_latency if P["l_out_tactile_ms"] == AUTO
                           else P["l_out_tactile_ms"] * 1e-3),
            l_out_audio=P["l_out_audio_ms"] * 1e-3, v_min=P["v_min_mm_s"],
            ema_alpha=P["ema_alpha"], rearm_distance=P["rearm_mm"],
            estimator=P["estimator"], window=P["window"],
            min_fit_samples=min(8, P["window"]),
            compensate_input_latency=P["compensate_latency"]))

    R = v["run"]
    if problems:
        raise ConfigError(problems)
    scenario = Scenario(
        landscape=grid, sensor=sensor, actuator=actuator, finger=finger, contact=contact,
        controller=ctrl, controller_estimate=C["estimate"],
        controller_lead=None if C["lead_ms"] == AUTO else C["lead_ms"] * 1e-3,
        trigger=trigger, predictor=predictor, duration=R["duration_s"], seed=R["seed"],
        decimation=R["decimation"], command_delay=A["command_delay_ms"] * 1e-3,
        abort_distance=R["abort_mm"])
    scenario.validate()
    output = base / R["output"] if R["output"] else None
    return LoadedScenario(scenario, output, v)


def load_scenario(path) -> LoadedScenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read scenario {path}: {exc.strerror}"]) from None
    return parse_scenario(text, path.parent, str(path))
