"""Two-head tilt/position classifier trained from scratch on float64 numpy."""
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .model import (
    ArchConfig,
    BatchNormState,
    ModelParams,
    backward,
    forward,
    init_model,
    loss,
    loss_and_gradients,
    predict,
)
from .train import (
    EvalReport,
    TrainConfig,
    TrainHistory,
    TrainingDivergedError,
    dataset_to_arrays,
    evaluate,
    evaluate_arrays,
    frame_to_input,
    train,
)

__all__ = [
    "ArchConfig",
    "BatchNormState",
    "CheckpointError",
    "EvalReport",
    "ModelParams",
    "TrainConfig",
    "TrainHistory",
    "TrainingDivergedError",
    "backward",
    "dataset_to_arrays",
    "evaluate",
    "evaluate_arrays",
    "forward",
    "frame_to_input",
    "init_model",
    "load_checkpoint",
    "loss",
    "loss_and_gradients",
    "predict",
    "save_checkpoint",
    "train",
]
