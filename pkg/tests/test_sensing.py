import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cyclotactor.errors import ParameterError, RangeError
from cyclotactor.sensing import (SensorModel, calibrate, distance_of, intensity_of, quantize,
                                 sample_stream)

M = SensorModel()
LUT = calibrate(M)
SLACK = 1e-9  # float rounding only


def test_intensity_hand_values():
    assert intensity_of(M, 0.0) == 1.0
    assert intensity_of(M, 10.0) == pytest.approx(0.25)
    assert intensity_of(M, 35.0) == pytest.approx(1 / 4.5 ** 2)
    assert intensity_of(M, 35.0) == pytest.approx(0.049383, abs=1e-6)


def test_intensity_out_of_range():
    with pytest.raises(RangeError):
        intensity_of(M, 35.1)
    with pytest.raises(RangeError):
        intensity_of(M, -0.1)


def test_noise_requires_rng():
    with pytest.raises(ParameterError):
        intensity_of(SensorModel(noise_sigma=0.01), 5.0)


@given(st.floats(0, 35), st.floats(1e-6, 35))
def test_intensity_strictly_decreasing(d, dd):
    d2 = min(d + dd, 35.0)
    if d2 > d:
        assert intensity_of(M, d2) < intensity_of(M, d)


@pytest.mark.parametrize("kwargs", [dict(d_s=0), dict(resolution=0), dict(rate=0),
                                    dict(latency=-1e-3)])
def test_model_validation(kwargs):
    with pytest.raises(ParameterError):
        SensorModel(**kwargs)


def test_calibrate_requires_noise_free():
    with pytest.raises(ParameterError):
        calibrate(SensorModel(noise_sigma=0.01))


def test_lut_endpoints():
    assert distance_of(LUT, intensity_of(M, 0.0)) == (0.0, False)
    assert distance_of(LUT, intensity_of(M, 35.0)) == (35.0, False)


def test_lut_round_trip_example():
    d, _ = distance_of(LUT, intensity_of(M, 17.3))
    assert 17.2 - SLACK <= d <= 17.4 + SLACK


def test_round_trip_sweep():
    ds = np.linspace(0.0, 35.0, 35001)
    err = max(abs(distance_of(LUT, intensity_of(M, d))[0] - d) for d in ds)
    assert err <= 0.1 + SLACK


def test_distance_of_examples():
    assert distance_of(LUT, 1.0) == (0.0, False)
    assert distance_of(LUT, 0.25) == (10.0, False)
    assert distance_of(LUT, 2.0) == (0.0, True)
    assert distance_of(LUT, 0.01) == (35.0, True)


def test_output_on_resolution_grid():
    for d in np.linspace(0, 35, 777):
        q, _ = distance_of(LUT, intensity_of(M, d))
        assert abs(q / 0.2 - round(q / 0.2)) < 1e-9


@pytest.mark.parametrize("x,expected", [(15.9, 16.0), (0.1, 0.2), (0.3, 0.4), (-0.1, -0.2),
                                        (0.09, 0.0), (17.29, 17.2)])
def test_quantize_ties_away_from_zero(x, expected):
    assert quantize(x, 0.2) == pytest.approx(expected, abs=1e-12)


def test_constant_stream():
    out = sample_stream(M, lambda t: 10.0, 0.01)
    assert all(d == 10.0 for _, d in out)


def test_stream_delay_and_quantization():
    out = dict(sample_stream(M, lambda t: 20.0 - 500.0 * t, 0.011))
    t = 48 / 4800  # 10 ms
    # true distance at t - 1.8 ms is 15.9 mm, a tie between 15.8 and 16.0
    assert out[t] in (pytest.approx(15.8), pytest.approx(16.0))


def test_stream_count_and_spacing():
    out = sample_stream(M, lambda t: 10.0, 1.0)
    assert len(out) == 4800
    for k, (t, _) in enumerate(out[:500]):
        assert t == k / 4800


@pytest.mark.parametrize("duration", [0.0101, 0.2501, 0.3337])
def test_stream_count_off_grid(duration):
    out = sample_stream(M, lambda t: 10.0, duration)
    assert len(out) == math.floor(duration * 4800) + 1


@pytest.mark.parametrize("duration", [0.25, 1.0, 2.0])
def test_stream_window_is_half_open(duration):
    out = sample_stream(M, lambda t: 10.0, duration)
    assert len(out) == round(duration * 4800)
    assert out[-1][0] < duration


def test_noisy_stream_reproducible():
    m = SensorModel(noise_sigma=0.002)
    a = sample_stream(m, lambda t: 12.0, 0.05, seed=5)
    b = sample_stream(m, lambda t: 12.0, 0.05, seed=5)
    c = sample_stream(m, lambda t: 12.0, 0.05, seed=6)
    assert a == b
    assert a != c
