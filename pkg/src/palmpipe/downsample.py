"""Reduction of the 10x10 sensor grids to the 3x3 stimulation grid.

The chain is: merge the two finger arrays, resample 10x10 -> 3x3 with
cubic convolution, normalize to [0, 1], then keep a single stimulation
point per row with a maximum-peak filter.

Resampling convention (pinned so the output is auditable against an
independent brute-force resampler):

* align-centers sampling: output cell i reads the source at coordinate
  ``(i + 0.5) * (10 / 3) - 0.5``;
* separable cubic convolution kernel with a = -0.5;
* edge handling by clamping source indices (replicate border).

The kernel's negative lobes can produce small negative values; those are
clipped to 0 before normalizing by the 9 N force ceiling.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_types import FORCE_MAX_N, GRID_SIZE, STIM_SIZE

KERNEL_A = -0.5


@dataclass(frozen=True)
class RowStimulus:
    """One display row's stimulation point: its column, or inactive."""

    row: int
    column: int | None
    intensity: float


def cubic_kernel(s: np.ndarray, a: float = KERNEL_A) -> np.ndarray:
    """Cubic convolution kernel u(s); u(0)=1, zero at integers, support |s|<2."""
    s = np.abs(np.asarray(s, dtype=np.float64))
    out = np.zeros_like(s)
    near = s <= 1.0
    far = (s > 1.0) & (s < 2.0)
    out[near] = (a + 2.0) * s[near] ** 3 - (a + 3.0) * s[near] ** 2 + 1.0
    out[far] = a * (s[far] ** 3 - 5.0 * s[far] ** 2 + 8.0 * s[far] - 4.0)
    return out


def source_coords(n_out: int = STIM_SIZE, n_src: int = GRID_SIZE) -> np.ndarray:
    """Source-space sample coordinates for each output cell (align centers)."""
    return (np.arange(n_out, dtype=np.float64) + 0.5) * (n_src / n_out) - 0.5


def _weight_matrix(n_out: int = STIM_SIZE, n_src: int = GRID_SIZE) -> np.ndarray:
    """Dense (n_out, n_src) matrix applying the 1-D cubic resample.

    Each output row holds the 4-tap kernel weights, accumulated onto
    clamped source indices so border replication is built in.  Rows sum
    to 1 (the kernel is a partition of unity over integer shifts).
    """
    w = np.zeros((n_out, n_src), dtype=np.float64)
    for i, sx in enumerate(source_coords(n_out, n_src)):
        base = int(np.floor(sx))
        for m in range(base - 1, base + 3):
            w[i, min(max(m, 0), n_src - 1)] += cubic_kernel(sx - m)
    return w


_W = _weight_matrix()
_W.setflags(write=False)


def bicubic_resize_raw(grid: np.ndarray) -> np.ndarray:
    """10x10 -> 3x3 cubic-convolution resample without clipping/normalizing.

    Linear in its input; preserves constants exactly up to float rounding.
    """
    g = np.asarray(grid, dtype=np.float64)
    if g.shape != (GRID_SIZE, GRID_SIZE):
        raise ValueError(f"expected {GRID_SIZE}x{GRID_SIZE} grid, got {g.shape}")
    return _W @ g @ _W.T


def bicubic_resize(grid: np.ndarray) -> np.ndarray:
    """10x10 force grid (newtons) -> 3x3 intensities in [0, 1]."""
    raw = bicubic_resize_raw(grid)
    return np.clip(np.maximum(raw, 0.0) / FORCE_MAX_N, 0.0, 1.0)


def merge_fingers(frame, rule: str = "max") -> np.ndarray:
    """Fuse the two finger grids into one 10x10 array in finger_a's frame.

    ``max``: cellwise maximum of finger_a and the un-mirrored finger_b
    (preserves the 1-9 N calibration; a sum could saturate).
    ``finger_a``: ignore finger_b entirely.
    """
    if rule == "max":
        return np.maximum(frame.finger_a, np.fliplr(frame.finger_b))
    if rule == "finger_a":
        return frame.finger_a.copy()
    raise ValueError(f"unknown merge rule {rule!r} (expected 'max' or 'finger_a')")


def row_peak_filter(grid: np.ndarray) -> np.ndarray:
    """Keep only the per-row maximum cell; ties go to the lowest column.

    A row whose maximum is 0 stays fully inactive, so the output has at
    most one nonzero cell per row.  Idempotent.
    """
    g = np.asarray(grid, dtype=np.float64)
    if g.shape != (STIM_SIZE, STIM_SIZE):
        raise ValueError(f"expected {STIM_SIZE}x{STIM_SIZE} grid, got {g.shape}")
    out = np.zeros_like(g)
    cols = np.argmax(g, axis=1)  # argmax returns the first (lowest) index on ties
    rows = np.arange(STIM_SIZE)
    peaks = g[rows, cols]
    active = peaks > 0.0
    out[rows[active], cols[active]] = peaks[active]
    return out


def row_stimuli(grid: np.ndarray) -> list[RowStimulus]:
    """Decompose a peak-filtered grid into per-row stimulation points."""
    peaked = row_peak_filter(grid)
    out = []
    for r in range(STIM_SIZE):
        if peaked[r].any():
            c = int(np.argmax(peaked[r]))
            out.append(RowStimulus(row=r, column=c, intensity=float(peaked[r, c])))
        else:
            out.append(RowStimulus(row=r, column=None, intensity=0.0))
    return out


def downsize(frame, merge_rule: str = "max") -> np.ndarray:
    """Full direct-rendering chain: merge -> resize -> row peak filter."""
    return row_peak_filter(bicubic_resize(merge_fingers(frame, merge_rule)))
