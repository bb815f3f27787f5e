"""The two rendering paths, side by side.

A 10x10 frame is merged and bicubic-resized to 3x3; the direct path
keeps the per-row peak, while the masked path first gates the grid with
the pattern's mask.  For a sub-resolution position shift (1.5 sensor
cells) the direct path collapses LEFT/CENTER/RIGHT onto the same
stimulus -- the mask is what keeps them apart.

Run:  python demos/02_downsize_and_masks.py
"""
import numpy as np

from palmpipe import (
    AngleClass,
    PositionClass,
    SimConfig,
    bicubic_resize,
    mask_for,
    merge_fingers,
    pattern_id,
    render_masked,
    row_peak_filter,
    synth_frame,
)

config = SimConfig(noise_sigma=0.0)
rng = np.random.default_rng(1)


def fmt(grid):
    return ["  ".join(f"{v:4.2f}" for v in row) for row in np.asarray(grid, float)]


def fmt_mask(mask):
    return ["  ".join(" X  " if v else " .  " for v in row) for row in mask]


print("90-degree tilt at each position, grip 30, zero noise:\n")
for position in PositionClass:
    pid = pattern_id(AngleClass.DEG90, position)
    frame = synth_frame(AngleClass.DEG90, position, 30, rng, config)
    downsized = bicubic_resize(merge_fingers(frame))
    direct = row_peak_filter(downsized)
    masked = render_masked(downsized, pid)

    print(f"pattern {pid} (90 deg, {position.name.lower()})")
    blocks = {
        "downsized": fmt(downsized),
        "direct": fmt(direct),
        "mask": fmt_mask(mask_for(pid)),
        "masked": fmt(masked),
    }
    header = "    ".join(f"{name:<22}" for name in blocks)
    print("  " + header)
    for r in range(3):
        print("  " + "    ".join(f"{blocks[name][r]:<22}" for name in blocks))
    print()

print(
    "The three direct stimuli above are identical (the 1.5-cell shift is\n"
    "below the 3x3 quantization step), while the masked stimuli occupy\n"
    "three different columns. That separation is what the classifier buys."
)
