"""Independent oracles used across the test suite.

These deliberately re-derive results with a different method than the
library (per-point brute force instead of weight matrices, finite
differences instead of backprop, template matching instead of the CNN) so
agreement is evidence, not tautology.
"""
from __future__ import annotations

import numpy as np

from palmpipe.core_types import pattern_of
from palmpipe.sensor_sim import SimConfig, stripe_profile


def cubic_u(s: float, a: float = -0.5) -> float:
    """Reference cubic convolution kernel, written scalar and piecewise."""
    s = abs(s)
    if s <= 1.0:
        return (a + 2.0) * s**3 - (a + 3.0) * s**2 + 1.0
    if s < 2.0:
        return a * s**3 - 5.0 * a * s**2 + 8.0 * a * s - 4.0 * a
    return 0.0


def bicubic_oracle(grid: np.ndarray, n_out: int = 3) -> np.ndarray:
    """Brute-force cubic-convolution resample: per output point, loop the
    4x4 neighborhood, clamp source indices at the borders."""
    grid = np.asarray(grid, dtype=np.float64)
    n_src = grid.shape[0]
    scale = n_src / n_out
    out = np.zeros((n_out, n_out))
    for i in range(n_out):
        sy = (i + 0.5) * scale - 0.5
        fy = int(np.floor(sy))
        for j in range(n_out):
            sx = (j + 0.5) * scale - 0.5
            fx = int(np.floor(sx))
            acc = 0.0
            for m in range(fy - 1, fy + 3):
                wy = cubic_u(sy - m)
                row = min(max(m, 0), n_src - 1)
                for n in range(fx - 1, fx + 3):
                    wx = cubic_u(sx - n)
                    col = min(max(n, 0), n_src - 1)
                    acc += wy * wx * grid[row, col]
            out[i, j] = acc
    return out


def finite_difference_gradients(params, x, ya, yp, h: float = 1e-5):
    """Central finite differences of the training loss for every
    trainable parameter.  Loss in BN train mode depends only on batch
    statistics, so the running-stat updates do not disturb the probes."""
    from palmpipe.cnn.layers import cross_entropy
    from palmpipe.cnn.model import forward

    def loss_value() -> float:
        al, pl, _ = forward(params, x, train=True)
        la, _ = cross_entropy(al, ya)
        lp, _ = cross_entropy(pl, yp)
        return float(la + lp)

    fd = {}
    for name, arr in params.trainable():
        g = np.zeros_like(arr)
        flat = arr.ravel()
        gflat = g.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = loss_value()
            flat[i] = orig - h
            down = loss_value()
            flat[i] = orig
            gflat[i] = (up - down) / (2.0 * h)
        fd[name] = g
    return fd


def gradient_relative_errors(analytic: dict, numeric: dict) -> dict[str, float]:
    """Worst per-layer relative error |a - f| / max(|a| + |f|, 1e-6)."""
    out = {}
    for name, a in analytic.items():
        f = numeric[name]
        denom = np.maximum(np.abs(a) + np.abs(f), 1e-6)
        out[name] = float((np.abs(a - f) / denom).max())
    return out


def nearest_stripe_label(frame, config: SimConfig) -> int:
    """Brute-force pattern recovery: nearest of the 12 noiseless stripe
    templates by squared distance on the raw finger_a grid (amplitude
    normalized out)."""
    obs = frame.finger_a / max(frame.finger_a.max(), 1e-12)
    best, best_d = 0, np.inf
    for pid in range(12):
        t = stripe_profile(*pattern_of(pid), config)
        t = t / t.max()
        d = float(((obs - t) ** 2).sum())
        if d < best_d:
            best, best_d = pid, d
    return best
