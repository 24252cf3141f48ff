"""Force-landscape inversion, passive-surface control and latency-compensated
event prescheduling for a finger-based electromagnetic tactile device."""

from .landscape import (ForceLandscape, SyntheticLandscapeParams, force_at, generate_synthetic,
                        invert_current, load_landscape, mpsr, save_landscape, zero_force_curve)
from .sim import Scenario, Trace, simulate

__all__ = [
    "ForceLandscape", "SyntheticLandscapeParams", "force_at", "generate_synthetic",
    "invert_current", "load_landscape", "mpsr", "save_landscape", "zero_force_curve",
    "Scenario", "Trace", "simulate",
]
