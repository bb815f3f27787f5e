"""palmpipe: desk-scale tactile telemanipulation testbed.

Synthesizes fingertip force grids for a grasped flexible pipette,
classifies tilt and position with a from-scratch two-head CNN, renders
3x3 palm stimuli either directly (bicubic downsize + per-row peak) or
gated through CNN-selected pattern masks, and maps stimuli to five-bar
linkage servo angles inside a 60 Hz loop.
"""
from .core_types import (
    FORCE_MAX_N,
    GRID_SIZE,
    N_PATTERNS,
    STIM_SIZE,
    AngleClass,
    PositionClass,
    TactileFrame,
    pattern_id,
    pattern_of,
)
from .downsample import bicubic_resize, downsize, merge_fingers, row_peak_filter
from .kinematics import (
    ContactCommand,
    DisplayMap,
    LinkageGeometry,
    OutOfWorkspaceError,
    ServoAngles,
    forward_kinematics,
    grid_to_contacts,
    inverse_kinematics,
)
from .masks import apply_mask, mask_for, render_masked
from .pipeline import Mode, Pipeline, ScriptedSource, TickSnapshot, run
from .sensor_sim import (
    Dataset,
    GripSample,
    SimConfig,
    generate_dataset,
    load_dataset,
    save_dataset,
    split_dataset,
    synth_frame,
)

__version__ = "0.1.0"
