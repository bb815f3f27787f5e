"""Synthetic tactile frames for a grasped flexible pipette, plus dataset plumbing.

The contact of the pipette with a fingertip array is modeled as a stripe:

    p(cell) = A(grip) * exp(-d^2 / (2 * sigma^2)) * (1 + taper * t)

where ``d`` is the perpendicular distance (in cells) from the cell center
to the pipette line, ``A = grip_step * peak_force_per_step``, and ``t``
is the normalized coordinate along the line (-1..1 across the grid).  The
taper models the pressure gradient along the pipette axis (its
cross-section is not constant), and it also guarantees every grid row has
a unique force maximum -- without it the peak filter downstream would be
choosing between exactly equal values.  The line runs through the grid
center, oriented by the angle class and displaced sideways by
``offset_cells`` for non-center positions.  finger_b sees the mirror
image of finger_a (the arrays face each other) plus independent per-cell
Gaussian noise; everything is clipped to the sensor's [0, 9] N range.

Default offset is 1.5 cells: visible at the 10x10 sensor resolution but
below the quantization step of the 3x3 display (one display cell covers
10/3 cells), so direct downsizing collapses shifted patterns onto their
centered siblings while a classifier working on the full grid can still
separate them.  That gap is the whole point of the masked rendering path.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field, replace

import numpy as np

from .core_types import (
    FORCE_MAX_N,
    GRID_SIZE,
    N_PATTERNS,
    AngleClass,
    PositionClass,
    TactileFrame,
    pattern_id,
    pattern_of,
)

GRIP_STEPS = 31  # grip_step runs 0 (no pressure) .. 30 (max pressure)

DATASET_MAGIC = "palmpipe-dataset v1"
_VALUE_FMT = "%.9g"  # >= 6 significant digits required by the file format


@dataclass(frozen=True)
class SimConfig:
    """Stripe-model parameters. All defaults are artifact configuration."""

    line_width_sigma: float = 1.2       # Gaussian cross-section, grid cells
    peak_force_per_step: float = 0.22   # newtons per grip step (30 * 0.22 * 1.35 = 8.91 <= 9)
    noise_sigma: float = 0.15           # per-cell additive noise, newtons
    offset_cells: float = 1.5           # lateral line shift for LEFT/RIGHT
    axial_taper: float = 0.35           # pressure gradient along the pipette axis
    reps_per_config: int = 36           # 12 patterns x 31 grips x 36 = 13392

    def __post_init__(self) -> None:
        if self.line_width_sigma <= 0:
            raise ValueError("line_width_sigma must be positive")
        if self.peak_force_per_step <= 0:
            raise ValueError("peak_force_per_step must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if self.offset_cells <= 0:
            raise ValueError("offset_cells must be positive")
        if not 0.0 <= self.axial_taper < 1.0:
            raise ValueError("axial_taper must lie in [0, 1)")
        if self.reps_per_config <= 0:
            raise ValueError("reps_per_config must be positive")
        if self.peak_force_per_step * (GRIP_STEPS - 1) * (1.0 + self.axial_taper) > FORCE_MAX_N:
            raise ValueError(
                "peak force at max grip exceeds the 9 N sensor ceiling"
            )


@dataclass(frozen=True)
class GripSample:
    frame: TactileFrame
    angle: AngleClass
    position: PositionClass
    grip_step: int

    def __post_init__(self) -> None:
        if not 0 <= self.grip_step < GRIP_STEPS:
            raise ValueError(f"grip_step {self.grip_step} outside [0, {GRIP_STEPS - 1}]")

    @property
    def pattern(self) -> int:
        return pattern_id(self.angle, self.position)


@dataclass(frozen=True)
class Dataset:
    samples: tuple[GripSample, ...]
    seed: int
    config: SimConfig | None = field(default=None)

    def __len__(self) -> int:
        return len(self.samples)


_CELL_ROWS, _CELL_COLS = np.meshgrid(
    np.arange(GRID_SIZE, dtype=np.float64),
    np.arange(GRID_SIZE, dtype=np.float64),
    indexing="ij",
)
_CENTER = (GRID_SIZE - 1) / 2.0  # 4.5
_SQRT2 = np.sqrt(2.0)


def stripe_profile(angle: AngleClass, position: PositionClass, config: SimConfig) -> np.ndarray:
    """Unit-amplitude 10x10 contact profile for one (angle, position).

    LEFT shifts the line toward lower columns (or lower rows for the
    horizontal DEG0 stripe, where LEFT reads "up"); RIGHT the opposite.
    The axial taper runs toward higher column (and, for tilted lines,
    higher row) coordinates.
    """
    off = config.offset_cells * {-1: -1.0, 0: 0.0, 1: 1.0}[
        {PositionClass.CENTER: 0, PositionClass.LEFT: -1, PositionClass.RIGHT: 1}[position]
    ]
    rows_c = _CELL_ROWS - _CENTER
    cols_c = _CELL_COLS - _CENTER
    if angle == AngleClass.DEG0:
        d = rows_c - off
        along = cols_c / _CENTER
    elif angle == AngleClass.DEG90:
        d = cols_c - off
        along = rows_c / _CENTER
    elif angle == AngleClass.DEG45:
        # line: col = row + off (main-diagonal direction)
        d = (cols_c - rows_c - off) / _SQRT2
        along = (rows_c + cols_c) / (2.0 * _CENTER)
    else:  # DEG135, line: row + col = 2*center + off (anti-diagonal direction)
        d = (rows_c + cols_c - off) / _SQRT2
        along = (cols_c - rows_c) / (2.0 * _CENTER)
    gauss = np.exp(-(d**2) / (2.0 * config.line_width_sigma**2))
    return gauss * (1.0 + config.axial_taper * along)


def synth_frame(
    angle: AngleClass,
    position: PositionClass,
    grip_step: int,
    rng: np.random.Generator,
    config: SimConfig = SimConfig(),
    timestamp: float = 0.0,
) -> TactileFrame:
    """One labeled synthetic frame at the given grip step."""
    if not 0 <= grip_step < GRIP_STEPS:
        raise ValueError(f"grip_step {grip_step} outside [0, {GRIP_STEPS - 1}]")
    amplitude = grip_step * config.peak_force_per_step
    clean_a = amplitude * stripe_profile(angle, position, config)
    clean_b = np.fliplr(clean_a)
    if config.noise_sigma > 0:
        clean_a = clean_a + rng.normal(0.0, config.noise_sigma, clean_a.shape)
        clean_b = clean_b + rng.normal(0.0, config.noise_sigma, clean_b.shape)
    finger_a = np.clip(clean_a, 0.0, FORCE_MAX_N)
    finger_b = np.clip(clean_b, 0.0, FORCE_MAX_N)
    return TactileFrame(finger_a=finger_a, finger_b=finger_b, timestamp=timestamp)


def generate_dataset(config: SimConfig = SimConfig(), seed: int = 0) -> Dataset:
    """All 12 x 31 (pattern, grip) configurations, ``reps_per_config`` each.

    Sample order and per-sample RNG streams are fixed by (seed, sample
    index), so identical inputs give identical datasets.
    """
    n = N_PATTERNS * GRIP_STEPS * config.reps_per_config
    streams = np.random.SeedSequence(seed).spawn(n)
    samples = []
    index = 0
    for pid in range(N_PATTERNS):
        angle, position = pattern_of(pid)
        for grip in range(GRIP_STEPS):
            for _ in range(config.reps_per_config):
                rng = np.random.Generator(np.random.PCG64(streams[index]))
                frame = synth_frame(
                    angle, position, grip, rng, config, timestamp=index / 120.0
                )
                samples.append(GripSample(frame, angle, position, grip))
                index += 1
    return Dataset(samples=tuple(samples), seed=seed, config=config)


def split_dataset(
    dataset: Dataset,
    ratios: tuple[float, float, float] = (0.5, 0.25, 0.25),
    seed: int = 0,
) -> tuple[Dataset, Dataset, Dataset]:
    """Stratified train/val/test split.

    Samples are shuffled per pattern class with a seeded generator, each
    class is cut contiguously at the ratio boundaries, and the per-class
    slices are concatenated and reshuffled.  The partitions are disjoint,
    exhaustive, and keep each class within rounding of its global share.
    """
    r_train, r_val, r_test = (float(r) for r in ratios)
    if min(r_train, r_val, r_test) <= 0:
        raise ValueError("all split ratios must be positive")
    if abs(r_train + r_val + r_test - 1.0) > 1e-9:
        raise ValueError(f"split ratios must sum to 1, got {r_train + r_val + r_test}")

    by_class: dict[int, list[GripSample]] = {pid: [] for pid in range(N_PATTERNS)}
    for sample in dataset.samples:
        by_class[sample.pattern].append(sample)

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    parts: tuple[list[GripSample], ...] = ([], [], [])
    for pid in range(N_PATTERNS):
        group = by_class[pid]
        order = rng.permutation(len(group))
        n_train = int(round(r_train * len(group)))
        n_val = int(round(r_val * len(group)))
        n_val = min(n_val, len(group) - n_train)
        bounds = (0, n_train, n_train + n_val, len(group))
        for part, lo, hi in zip(parts, bounds, bounds[1:]):
            part.extend(group[i] for i in order[lo:hi])
    out = []
    for part in parts:
        order = rng.permutation(len(part))
        out.append(
            Dataset(
                samples=tuple(part[i] for i in order),
                seed=dataset.seed,
                config=dataset.config,
            )
        )
    return out[0], out[1], out[2]


def dataset_to_text(dataset: Dataset) -> str:
    """Serialize to the newline-delimited text format.

    Header ``palmpipe-dataset v1,count=N,seed=S``; then one line per
    sample: ``pattern_id,grip_step,`` followed by 200 comma-separated
    force values (finger_a row-major, then finger_b).
    """
    buf = io.StringIO()
    buf.write(f"{DATASET_MAGIC},count={len(dataset)},seed={dataset.seed}\n")
    for s in dataset.samples:
        values = np.concatenate([s.frame.finger_a.ravel(), s.frame.finger_b.ravel()])
        buf.write(f"{s.pattern},{s.grip_step},")
        buf.write(",".join(_VALUE_FMT % v for v in values))
        buf.write("\n")
    return buf.getvalue()


def save_dataset(dataset: Dataset, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dataset_to_text(dataset))


class DatasetFormatError(ValueError):
    """Raised for malformed dataset files; names the offending line."""


def load_dataset(path) -> Dataset:
    """Parse a dataset file.  The sim config is not stored in the file."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().rstrip("\n")
        fields = header.split(",")
        if len(fields) != 3 or fields[0] != DATASET_MAGIC:
            raise DatasetFormatError(f"line 1: bad header {header!r}")
        try:
            count = int(fields[1].removeprefix("count="))
            seed = int(fields[2].removeprefix("seed="))
        except ValueError as exc:
            raise DatasetFormatError(f"line 1: bad header fields: {exc}") from exc

        samples = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2 + 2 * GRID_SIZE * GRID_SIZE:
                raise DatasetFormatError(
                    f"line {lineno}: expected {2 + 2 * GRID_SIZE * GRID_SIZE} fields, "
                    f"got {len(parts)}"
                )
            try:
                pid = int(parts[0])
                grip = int(parts[1])
                values = np.array([float(v) for v in parts[2:]], dtype=np.float64)
            except ValueError as exc:
                raise DatasetFormatError(f"line {lineno}: {exc}") from exc
            try:
                angle, position = pattern_of(pid)
                frame = TactileFrame(
                    finger_a=values[:100].reshape(GRID_SIZE, GRID_SIZE),
                    finger_b=values[100:].reshape(GRID_SIZE, GRID_SIZE),
                    timestamp=(lineno - 2) / 120.0,
                )
                samples.append(GripSample(frame, angle, position, grip))
            except ValueError as exc:
                raise DatasetFormatError(f"line {lineno}: {exc}") from exc
    if len(samples) != count:
        raise DatasetFormatError(
            f"header promises {count} records, file holds {len(samples)}"
        )
    return Dataset(samples=tuple(samples), seed=seed, config=None)


def with_noise(config: SimConfig, noise_sigma: float) -> SimConfig:
    """Copy of ``config`` with a different noise level."""
    return replace(config, noise_sigma=noise_sigma)
