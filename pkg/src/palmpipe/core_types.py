"""Shared value types: the 12-way tilt/position taxonomy and grid containers.

Every other module builds on the types here.  All values are immutable
(or treated as immutable by convention for numpy arrays) and safe to
share across threads.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

GRID_SIZE = 10      # sensor points per side of one fingertip array
STIM_SIZE = 3       # stimulation cells per side of the palm display
FORCE_MAX_N = 9.0   # top of the per-point force range, newtons

N_ANGLES = 4
N_POSITIONS = 3
N_PATTERNS = N_ANGLES * N_POSITIONS


class AngleClass(IntEnum):
    """Tilt of the grasped object. Serialized as 0..3 in this order."""

    DEG0 = 0
    DEG45 = 1
    DEG90 = 2
    DEG135 = 3

    @property
    def degrees(self) -> int:
        return (0, 45, 90, 135)[self.value]


class PositionClass(IntEnum):
    """Lateral placement of the object in the gripper.

    For horizontal tilt (DEG0) the lateral axis is vertical, so LEFT
    reads as "up" and RIGHT as "down".  Serialized as 0..2.
    """

    CENTER = 0
    LEFT = 1
    RIGHT = 2


# Pattern ids are grouped in blocks of three by angle, position order
# (CENTER, LEFT, RIGHT) inside each block.  The block order below is the
# only one consistent with the anchored assignments id 0 = (DEG0, CENTER),
# id 4 = (DEG45, LEFT), id 5 = (DEG45, RIGHT), id 6 = (DEG135, CENTER).
# Ids 1, 2, 7..11 follow from the block layout and are fixed here.
_BLOCK_OF_ANGLE = {
    AngleClass.DEG0: 0,
    AngleClass.DEG45: 1,
    AngleClass.DEG135: 2,
    AngleClass.DEG90: 3,
}
_ANGLE_OF_BLOCK = {block: angle for angle, block in _BLOCK_OF_ANGLE.items()}


def pattern_id(angle: AngleClass, position: PositionClass) -> int:
    """Map an (angle, position) pair to its pattern id in [0, 11]."""
    return 3 * _BLOCK_OF_ANGLE[AngleClass(angle)] + int(PositionClass(position))


def pattern_of(pid: int) -> tuple[AngleClass, PositionClass]:
    """Inverse of :func:`pattern_id`.  Rejects ids outside [0, 11]."""
    if not isinstance(pid, (int, np.integer)) or isinstance(pid, bool):
        raise TypeError(f"pattern id must be an integer, got {type(pid).__name__}")
    if not 0 <= pid < N_PATTERNS:
        raise ValueError(f"pattern id {pid} outside [0, {N_PATTERNS - 1}]")
    return _ANGLE_OF_BLOCK[pid // 3], PositionClass(pid % 3)


def all_patterns() -> list[tuple[int, AngleClass, PositionClass]]:
    """All 12 (id, angle, position) triples in id order."""
    return [(pid, *pattern_of(pid)) for pid in range(N_PATTERNS)]


def validate_force_grid(values: np.ndarray, name: str = "force grid") -> np.ndarray:
    """Check a 10x10 force array: finite, within [0, FORCE_MAX_N] newtons.

    0 N encodes "no contact"; values in (0, 1) are allowed for synthetic
    sub-threshold contact even though the physical sensor floor is 1 N.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != (GRID_SIZE, GRID_SIZE):
        raise ValueError(f"{name} must be {GRID_SIZE}x{GRID_SIZE}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    if arr.min() < 0.0 or arr.max() > FORCE_MAX_N:
        raise ValueError(
            f"{name} outside [0, {FORCE_MAX_N}] N: min={arr.min()}, max={arr.max()}"
        )
    return arr


@dataclass(frozen=True)
class TactileFrame:
    """One synchronized reading of both fingertip arrays.

    ``finger_b`` faces ``finger_a`` across the gripper, so its columns run
    mirrored relative to finger_a's.
    """

    finger_a: np.ndarray
    finger_b: np.ndarray
    timestamp: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "finger_a", validate_force_grid(self.finger_a, "finger_a"))
        object.__setattr__(self, "finger_b", validate_force_grid(self.finger_b, "finger_b"))
        if not np.isfinite(self.timestamp):
            raise ValueError("timestamp must be finite")


def validate_stimulus(values: np.ndarray, name: str = "stimulus") -> np.ndarray:
    """Check a 3x3 stimulation grid: finite intensities in [0, 1]."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != (STIM_SIZE, STIM_SIZE):
        raise ValueError(f"{name} must be {STIM_SIZE}x{STIM_SIZE}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError(f"{name} outside [0, 1]: min={arr.min()}, max={arr.max()}")
    return arr
