"""The 12 predefined 3x3 pattern masks and mask gating of the stimulus.

Masks are built geometrically by rasterizing each pattern's line onto the
3x3 grid: a horizontal tilt fills one row, a vertical tilt one column, a
45-degree tilt lies on the main diagonal and a 135-degree tilt on the
anti-diagonal, each shifted one cell sideways for the LEFT/RIGHT
positions.  Shifted diagonals lose their off-grid cell and keep two true
cells; all twelve masks are pairwise distinct.  The frozen table below is
the artifact's ground truth for the pattern layouts.
"""
from __future__ import annotations

import numpy as np

from .core_types import (
    N_PATTERNS,
    STIM_SIZE,
    AngleClass,
    PositionClass,
    pattern_of,
)
from .downsample import row_peak_filter

_SHIFT = {PositionClass.CENTER: 0, PositionClass.LEFT: -1, PositionClass.RIGHT: 1}


def _rasterize(angle: AngleClass, position: PositionClass) -> np.ndarray:
    shift = _SHIFT[position]
    m = np.zeros((STIM_SIZE, STIM_SIZE), dtype=bool)
    if angle == AngleClass.DEG0:
        m[1 + shift, :] = True          # LEFT reads "up": toward row 0
    elif angle == AngleClass.DEG90:
        m[:, 1 + shift] = True
    elif angle == AngleClass.DEG45:
        for r in range(STIM_SIZE):
            c = r + shift
            if 0 <= c < STIM_SIZE:
                m[r, c] = True
    else:  # DEG135
        for r in range(STIM_SIZE):
            c = (STIM_SIZE - 1) - r + shift
            if 0 <= c < STIM_SIZE:
                m[r, c] = True
    if not m.any():
        raise AssertionError("mask rasterization produced an empty mask")
    return m


def _build_table() -> tuple[np.ndarray, ...]:
    table = []
    for pid in range(N_PATTERNS):
        m = _rasterize(*pattern_of(pid))
        m.setflags(write=False)
        table.append(m)
    return tuple(table)


MASK_TABLE: tuple[np.ndarray, ...] = _build_table()


def mask_for(pid: int) -> np.ndarray:
    """Fixed 3x3 boolean mask for a pattern id; out-of-range ids rejected."""
    pattern_of(pid)  # validates the id
    return MASK_TABLE[pid]


def apply_mask(grid: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Boolean-AND gate: pass intensities where the mask is true, else 0."""
    g = np.asarray(grid, dtype=np.float64)
    m = np.asarray(mask, dtype=bool)
    if g.shape != (STIM_SIZE, STIM_SIZE) or m.shape != (STIM_SIZE, STIM_SIZE):
        raise ValueError("apply_mask expects 3x3 grid and 3x3 mask")
    return np.where(m, g, 0.0)


def render_masked(grid: np.ndarray, pid: int, ordering: str = "mask_first") -> np.ndarray:
    """Combine the downsized 3x3 array with the pattern's mask.

    ``mask_first`` (default): gate with the mask, then keep the per-row
    peak.  This keeps a contact whenever any unmasked cell in a row is
    active, which is what suppresses off-pattern noise best.
    ``peak_first``: peak-filter first, then gate; a row whose peak falls
    outside the mask goes fully inactive.
    """
    mask = mask_for(pid)
    if ordering == "mask_first":
        return row_peak_filter(apply_mask(grid, mask))
    if ordering == "peak_first":
        return apply_mask(row_peak_filter(grid), mask)
    raise ValueError(f"unknown ordering {ordering!r} (expected 'mask_first' or 'peak_first')")


def export_mask_table(path) -> None:
    """Write the mask table as 12 lines of 9 '0'/'1' chars, row-major."""
    lines = ["".join("1" if v else "0" for v in mask.ravel()) for mask in MASK_TABLE]
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")
