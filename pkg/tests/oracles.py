"""Independent reference computations shared by the test modules."""

import numpy as np
from scipy.interpolate import RegularGridInterpolator


def dense_mpsr(grid, d_min, d_max, n_d=3401, n_i=401):
    """Min-over-distance of max-over-current positive force, by brute-force scan."""
    interp = RegularGridInterpolator((grid.distances, grid.currents), grid.as_array())
    ds = np.union1d(np.linspace(d_min, d_max, n_d),
                    [d for d in grid.distances if d_min <= d <= d_max])
    cs = np.union1d(np.linspace(grid.i_min, grid.i_max, n_i), grid.currents)
    D, C = np.meshgrid(ds, cs, indexing="ij")
    f = interp(np.stack([D.ravel(), C.ravel()], axis=-1)).reshape(D.shape)
    return float(np.maximum(f, 0.0).max(axis=1).min())


def sinusoid_gain(t, y, f):
    """Amplitude of the component of y at frequency f (least-squares fit with offset)."""
    w = 2 * np.pi * f
    basis = np.column_stack([np.sin(w * t), np.cos(w * t), np.ones_like(t)])
    coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
    return float(np.hypot(coef[0], coef[1]))


def xcorr_lag(t, measured, truth, lags):
    """Lag maximizing the normalized correlation of measured(t) with truth(t - lag).

    Normalizing matters: the energy of the sampled, shifted reference varies
    with the lag, which biases a raw dot product.
    """
    m = measured - measured.mean()
    best, best_lag = -np.inf, None
    for lag in lags:
        x = truth(t - lag)
        x = x - x.mean()
        c = float(np.dot(m, x) / np.linalg.norm(x))
        if c > best:
            best, best_lag = c, lag
    return best_lag
