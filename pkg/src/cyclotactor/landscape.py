"""Tactile output force landscape: vertical force on the keystone as a
function of (vertical distance, coil current).

Sign convention: positive force is repulsive (away from the surface),
negative is attractive (toward the core).

The grid is the authoritative representation. ``generate_synthetic``
produces a desk-scale stand-in with the qualitative shape of a measured
landscape: pure attraction at zero current (the keystone magnetizes the
core), and a fixed-current force that first rises and then falls with
distance.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import FormatError, ParameterError, RangeError, SaturationError

# Vertical proximity range of the device.
MAX_DISTANCE_MM = 35.0
# Residual mismatch tolerated at the ends of the achievable force range.
FORCE_TOL_N = 1e-6
HEADER_CELL = "d_mm\\I_a"


def _axis(start: float, stop: float, step: float) -> tuple[float, ...]:
    n = int(math.floor((stop - start) / step + 1e-9))
    pts = [round(start + k * step, 12) for k in range(n + 1)]
    if not math.isclose(pts[-1], stop, abs_tol=1e-9):
        pts.append(stop)
    return tuple(pts)


def _locate(axis: Sequence[float], x: float) -> tuple[int, float]:
    """Cell index and fractional weight of x inside a sorted axis."""
    i = bisect_right(axis, x) - 1
    i = min(max(i, 0), len(axis) - 2)
    lo, hi = axis[i], axis[i + 1]
    return i, (x - lo) / (hi - lo)


@dataclass(frozen=True)
class ForceLandscape:
    distances: tuple[float, ...]  # mm, ascending
    currents: tuple[float, ...]  # A, ascending
    forces: tuple[tuple[float, ...], ...]  # N, forces[i][j] at (distances[i], currents[j])

    def __post_init__(self):
        d = tuple(float(x) for x in self.distances)
        c = tuple(float(x) for x in self.currents)
        f = tuple(tuple(float(x) for x in row) for row in self.forces)
        object.__setattr__(self, "distances", d)
        object.__setattr__(self, "currents", c)
        object.__setattr__(self, "forces", f)

        if len(d) < 2 or len(c) < 2:
            raise ParameterError("landscape needs at least two distances and two currents")
        if any(b <= a for a, b in zip(d, d[1:])):
            raise ParameterError("distances must be strictly ascending")
        if any(b <= a for a, b in zip(c, c[1:])):
            raise ParameterError("currents must be strictly ascending")
        if d[0] < 0 or d[-1] > MAX_DISTANCE_MM:
            raise ParameterError(f"distances must lie within [0, {MAX_DISTANCE_MM}] mm")
        if len(f) != len(d) or any(len(row) != len(c) for row in f):
            raise ParameterError(
                f"force matrix must be {len(d)}x{len(c)} to match the axes"
            )
        for i, row in enumerate(f):
            if not all(math.isfinite(x) for x in row):
                raise ParameterError(f"non-finite force at d={d[i]} mm")
            for j in range(len(row) - 1):
                if row[j + 1] <= row[j]:
                    raise ParameterError(
                        f"force not strictly increasing in current at d={d[i]} mm "
                        f"between I={c[j]} A and I={c[j + 1]} A"
                    )

    @property
    def d_min(self) -> float:
        return self.distances[0]

    @property
    def d_max(self) -> float:
        return self.distances[-1]

    @property
    def i_min(self) -> float:
        return self.currents[0]

    @property
    def i_max(self) -> float:
        return self.currents[-1]

    def as_array(self) -> np.ndarray:
        return np.array(self.forces)

    def column_at(self, d: float) -> list[float]:
        """Forces at every current node, interpolated along distance."""
        _check(d, self.distances, "distance")
        i, w = _locate(self.distances, d)
        r0, r1 = self.forces[i], self.forces[i + 1]
        return [(1.0 - w) * a + w * b for a, b in zip(r0, r1)]


@dataclass(frozen=True)
class SyntheticLandscapeParams:
    a: float = 100.0  # coil coupling, N*mm^2/A
    b: float = 5000.0  # residual magnetization, N*mm^4
    d0: float = 5.0  # geometric offset, mm
    d_start: float = 0.0
    d_stop: float = 35.0
    d_step: float = 0.5
    i_start: float = -2.0
    i_stop: float = 2.0
    i_step: float = 0.1
    noise_sigma: float = 0.0
    seed: int = 0

    def validate(self):
        problems = []
        if not self.a > 0:
            problems.append("a must be > 0")
        if not self.b >= 0:
            problems.append("b must be >= 0")
        if not self.d0 > 0:
            problems.append("d0 must be > 0")
        if not self.noise_sigma >= 0:
            problems.append("noise_sigma must be >= 0")
        if not (self.d_step > 0 and self.d_stop > self.d_start >= 0):
            problems.append("distance range must be non-empty with positive step")
        elif self.d_stop > MAX_DISTANCE_MM:
            problems.append(f"distance range must end at or below {MAX_DISTANCE_MM} mm")
        if not (self.i_step > 0 and self.i_stop > self.i_start):
            problems.append("current range must be non-empty with positive step")
        if problems:
            raise ParameterError("; ".join(problems))


def synthetic_force(params: SyntheticLandscapeParams, d: float, current: float) -> float:
    """Closed-form generator value, without noise."""
    u = 1.0 / (d + params.d0) ** 2
    return params.a * current * u - params.b * u * u


def generate_synthetic(params: SyntheticLandscapeParams | None = None) -> ForceLandscape:
    params = params or SyntheticLandscapeParams()
    params.validate()
    dist = _axis(params.d_start, params.d_stop, params.d_step)
    curr = _axis(params.i_start, params.i_stop, params.i_step)
    rng = np.random.default_rng(params.seed)
    rows = []
    for d in dist:
        row = [synthetic_force(params, d, i) for i in curr]
        if params.noise_sigma > 0:
            row = list(np.asarray(row) + rng.normal(0.0, params.noise_sigma, len(row)))
        rows.append(row)
    return ForceLandscape(dist, curr, rows)


def _check(x: float, axis: Sequence[float], name: str):
    if not (axis[0] <= x <= axis[-1]):
        raise RangeError(name, x, axis[0], axis[-1])


def force_at(grid: ForceLandscape, d: float, current: float) -> float:
    """Bilinear interpolation of the grid; exact at nodes."""
    _check(d, grid.distances, "distance")
    _check(current, grid.currents, "current")
    i, u = _locate(grid.distances, d)
    j, v = _locate(grid.currents, current)
    f = grid.forces
    return ((1.0 - u) * ((1.0 - v) * f[i][j] + v * f[i][j + 1])
            + u * ((1.0 - v) * f[i + 1][j] + v * f[i + 1][j + 1]))


def achievable_range(grid: ForceLandscape, d: float) -> tuple[float, float]:
    col = grid.column_at(d)
    return col[0], col[-1]


def invert_current(grid: ForceLandscape, d: float, force: float) -> float:
    """Coil current producing ``force`` at distance ``d``.

    At fixed distance the interpolated force is piecewise linear and strictly
    increasing in current, so a bisection over the current nodes finds the
    bracketing cell and the cell is solved exactly.
    """
    col = grid.column_at(d)
    if force > col[-1] + FORCE_TOL_N:
        raise SaturationError(force, grid.i_max, col[-1])
    if force < col[0] - FORCE_TOL_N:
        raise SaturationError(force, grid.i_min, col[0])
    if force >= col[-1]:
        return grid.i_max
    if force <= col[0]:
        return grid.i_min
    lo, hi = 0, len(col) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if col[mid] <= force:
            lo = mid
        else:
            hi = mid
    w = (force - col[lo]) / (col[hi] - col[lo])
    c = grid.currents
    return c[lo] + w * (c[hi] - c[lo])


def invert_current_clamped(grid: ForceLandscape, d: float, force: float) -> tuple[float, bool]:
    """Like invert_current, but returns (boundary current, True) on saturation."""
    try:
        return invert_current(grid, d, force), False
    except SaturationError as exc:
        return exc.current, True


def zero_force_curve(grid: ForceLandscape) -> list[tuple[float, float]]:
    curve = []
    for d in grid.distances:
        try:
            curve.append((d, invert_current(grid, d, 0.0)))
        except SaturationError as exc:
            raise ParameterError(f"zero force unreachable at d={d} mm ({exc})") from exc
    return curve


def mpsr_with_distance(grid: ForceLandscape, d_min: float = 1.0,
                       d_max: float = MAX_DISTANCE_MM) -> tuple[float, float]:
    """Largest repulsive force available everywhere in [d_min, d_max].

    Returns (force, binding distance). The interpolated surface is piecewise
    linear in each axis, so checking grid distances plus the endpoints, and
    current nodes, is exhaustive.
    """
    if not d_max > d_min:
        raise ParameterError(f"empty or inverted distance range [{d_min}, {d_max}]")
    _check(d_min, grid.distances, "distance")
    _check(d_max, grid.distances, "distance")
    probes = [d_min] + [d for d in grid.distances if d_min < d < d_max] + [d_max]
    best, where = math.inf, d_min
    for d in probes:
        rep = max(0.0, max(grid.column_at(d)))
        if rep < best:
            best, where = rep, d
    return best, where


def mpsr(grid: ForceLandscape, d_min: float = 1.0, d_max: float = MAX_DISTANCE_MM) -> float:
    return mpsr_with_distance(grid, d_min, d_max)[0]


def save_landscape(grid: ForceLandscape, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([HEADER_CELL] + [repr(c) for c in grid.currents])
        for d, row in zip(grid.distances, grid.forces):
            w.writerow([repr(d)] + [repr(x) for x in row])


def load_landscape(path) -> ForceLandscape:
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise FormatError("empty landscape file", path=path)
    head = rows[0]
    if not head or head[0].strip() != HEADER_CELL:
        raise FormatError(f"first cell must be {HEADER_CELL!r}", line=1, path=path)
    try:
        currents = [float(x) for x in head[1:]]
    except ValueError as exc:
        raise FormatError(f"bad current value ({exc})", line=1, path=path) from None
    distances, forces = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(currents) + 1:
            raise FormatError(
                f"expected {len(currents) + 1} cells, got {len(row)}", line=lineno, path=path
            )
        try:
            vals = [float(x) for x in row]
        except ValueError as exc:
            raise FormatError(f"bad number ({exc})", line=lineno, path=path) from None
        distances.append(vals[0])
        forces.append(vals[1:])
    return ForceLandscape(tuple(distances), tuple(currents), tuple(map(tuple, forces)))


def save_zero_curve(curve: Sequence[tuple[float, float]], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["d_mm", "I0_a"])
        for d, i0 in curve:
            w.writerow([repr(d), repr(i0)])


def load_zero_curve(path) -> list[tuple[float, float]]:
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["d_mm", "I0_a"]:
        raise FormatError("zero curve header must be 'd_mm,I0_a'", line=1, path=path)
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        try:
            d, i0 = (float(x) for x in row)
        except ValueError:
            raise FormatError("expected two numbers", line=lineno, path=path) from None
        out.append((d, i0))
    return out
