import math

import numpy as np
import pytest

from cyclotactor.errors import ParameterError
from cyclotactor.events import EventQueue
from cyclotactor.predictor import (LineFitEstimator, Predictor, PredictorConfig, PredictorState,
                                   estimate_velocity, extrapolate, predict_impact, preschedule)
from cyclotactor.sensing import quantize

CFG = PredictorConfig()
FS = 4800.0


def quantized_ramp(d0, v, n):
    return [(k / FS, quantize(d0 - v * k / FS, 0.2)) for k in range(n)]


def ema_oracle(samples, alpha):
    """Independent restatement of the filter over a sample list."""
    out, v = [], 0.0
    for k in range(len(samples)):
        if k:
            raw = (samples[k - 1][1] - samples[k][1]) / (samples[k][0] - samples[k - 1][0])
            v = alpha * raw + (1 - alpha) * v
        out.append(v)
    return out


def run_ema(samples, alpha):
    st = PredictorState()
    return [estimate_velocity(st, s, alpha) for s in samples]


def test_first_sample_is_zero():
    assert estimate_velocity(PredictorState(), (0.0, 10.0), 0.5) == 0.0


def test_constant_distance_zero():
    assert all(v == 0.0 for v in run_ema([(k / FS, 7.0) for k in range(50)], 0.05))


def test_retreat_negative():
    samples = [(k / FS, 5.0 + 0.2 * k) for k in range(20)]
    assert run_ema(samples, 0.3)[-1] < 0


def test_unquantized_descent_alpha_one_exact():
    samples = [(k / FS, 20.0 - 500.0 * k / FS) for k in range(10)]
    assert run_ema(samples, 1.0)[-1] == pytest.approx(500.0, rel=1e-9)


def test_matches_oracle():
    samples = quantized_ramp(20.0, 500.0, 200)
    assert run_ema(samples, 0.05) == pytest.approx(ema_oracle(samples, 0.05), rel=1e-12)


def test_quantized_raw_steps_of_960():
    samples = quantized_ramp(20.0, 500.0, 40)
    vs = run_ema(samples, 1.0)[1:]
    assert set(round(v) for v in vs) <= {0, 960}


def test_ema_converges_within_20ms():
    # Brute-force steady-state ripple of alpha=0.05 on this ramp is about
    # [474.5, 526] mm/s, so the bound is 500 +/- 26.
    samples = quantized_ramp(20.0, 500.0, 300)
    vs = np.array(run_ema(samples, 0.05))
    late = vs[int(0.020 * FS):]
    assert np.all(np.abs(late - 500.0) <= 26.0)


def test_nonincreasing_time_rejected():
    st = PredictorState()
    estimate_velocity(st, (0.0, 1.0), 0.5)
    with pytest.raises(ParameterError):
        estimate_velocity(st, (0.0, 1.0), 0.5)


def test_linefit_recovers_ramp_below_quantization():
    fit = LineFitEstimator(48, 8)
    res = None
    for t, d in quantized_ramp(20.0, 500.0, 60):
        res = fit.update(t, d)
    t_last = 59 / FS
    pos, v = res
    assert v == pytest.approx(500.0, abs=15.0)
    assert pos == pytest.approx(20.0 - 500.0 * t_last, abs=0.1)


def test_linefit_waits_for_min_samples():
    fit = LineFitEstimator(48, 8)
    assert all(fit.update(k / FS, 1.0) is None for k in range(7))
    assert fit.update(7 / FS, 1.0) == (1.0, 0.0)


def test_predict_example():
    onset = predict_impact(CFG, PredictorState(), 0.0, 10.0, 500.0)
    assert extrapolate(CFG, 10.0, 500.0) == pytest.approx(9.1)
    assert onset == pytest.approx(18.2e-3, abs=1e-12)


def test_predict_not_approaching():
    assert predict_impact(CFG, PredictorState(), 0.0, 10.0, 0.0) is None
    assert predict_impact(CFG, PredictorState(), 0.0, 10.0, 49.0) is None


def test_predict_overshoot_returns_none():
    assert extrapolate(CFG, 0.5, 500.0) == pytest.approx(-0.4)
    assert predict_impact(CFG, PredictorState(), 0.0, 0.5, 500.0) is None


def test_predict_disarmed():
    assert predict_impact(CFG, PredictorState(armed=False), 0.0, 10.0, 500.0) is None


def test_preschedule_example():
    audio, tactile = preschedule(CFG, 18.2e-3, 0.45)
    assert audio.issue_time == pytest.approx(13.2e-3)
    assert tactile.issue_time == pytest.approx(15.6e-3)
    assert audio.intended_onset == tactile.intended_onset == 18.2e-3
    assert audio.amplitude == tactile.amplitude == 0.45


def test_preschedule_zero_latency():
    cfg = PredictorConfig(l_out_audio=0.0, l_out_tactile=0.0)
    a, t = preschedule(cfg, 0.01, 1.0)
    assert a.issue_time == t.issue_time == 0.01


@pytest.mark.parametrize("onset", [0.0123, 0.0182, 0.5])
def test_preschedule_arithmetic_exact(onset):
    a, t = preschedule(CFG, onset, 1.0)
    assert a.intended_onset - a.issue_time == pytest.approx(CFG.l_out_audio, abs=1e-15)
    assert t.intended_onset - t.issue_time == pytest.approx(CFG.l_out_tactile, abs=1e-15)


def test_insufficient_lead_audio_late_tactile_prescheduled():
    q = EventQueue()
    now = 0.010
    a, t = preschedule(CFG, now + 1e-3, 1.0)
    q.schedule(a, now)
    q.schedule(t, now)
    assert a.late
    assert t.late  # 2.6 ms > 1 ms lead as well
    q2 = EventQueue()
    a, t = preschedule(CFG, now + 3e-3, 1.0)
    q2.schedule(a, now)
    q2.schedule(t, now)
    assert a.late and not t.late


def test_config_validation():
    with pytest.raises(ParameterError):
        PredictorConfig(ema_alpha=0.0)
    with pytest.raises(ParameterError):
        PredictorConfig(l_in=-1.0)
    with pytest.raises(ParameterError):
        PredictorConfig(estimator="kalman")


def drive(pred, samples, queue, dt_tick=1 / 96000):
    """Feed samples while firing due events at each sample time."""
    for t, d in samples:
        fired = queue.due_events(t)
        if fired:
            pred.on_fired(fired)
        pred.on_sample(t, d, queue)


def test_single_fire_per_approach():
    q = EventQueue()
    pred = Predictor(PredictorConfig(estimator="ema", ema_alpha=0.3))
    samples = quantized_ramp(15.0, 500.0, 200)  # runs well past the surface
    drive(pred, samples, q)
    assert pred.state.fires == 1
    assert len(pred.predictions) == 1
    assert len(q.fired) == 2


def test_rearm_after_retreat():
    q = EventQueue()
    pred = Predictor(PredictorConfig(estimator="ema", ema_alpha=0.3))
    down = quantized_ramp(15.0, 500.0, 200)
    t_end, d_end = down[-1]
    up = [(t_end + k / FS, quantize(d_end + 500.0 * k / FS, 0.2)) for k in range(1, 200)]
    t_up, d_up = up[-1]
    down2 = [(t_up + k / FS, quantize(d_up - 500.0 * k / FS, 0.2)) for k in range(1, 250)]
    drive(pred, down, q)
    drive(pred, up, q)
    assert pred.state.armed
    drive(pred, down2, q)
    assert pred.state.fires == 2


def test_no_rearm_without_retreat():
    q = EventQueue()
    pred = Predictor(PredictorConfig(estimator="ema", ema_alpha=0.3))
    down = quantized_ramp(15.0, 500.0, 200)
    drive(pred, down, q)
    t_end, d_end = down[-1]
    # bounce near the bottom, staying within the rearm distance
    wiggle = [(t_end + k / FS, quantize(d_end + 1.0 + 1.0 * math.sin(k / 5), 0.2))
              for k in range(1, 400)]
    drive(pred, wiggle, q)
    assert pred.state.fires == 1 and not pred.state.armed


def test_late_path_flagged():
    q = EventQueue()
    pred = Predictor(PredictorConfig(estimator="ema", ema_alpha=1.0))
    # first sample already close and fast: extrapolation overshoots
    pred.on_sample(0.0, 1.0, q)
    pred.on_sample(1 / FS, 0.8, q)  # raw 960 mm/s -> d_hat < 0
    assert pred.predictions and pred.predictions[0].late
    assert all(ev.late for ev in q.pending())
