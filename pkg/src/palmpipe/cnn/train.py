"""Training loop: SGD with momentum and plateau-based learning-rate decay.

The reference path is single-threaded and deterministic given the seed;
batch order, weight init, and every numeric op are reproducible.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..core_types import FORCE_MAX_N, N_ANGLES, N_POSITIONS
from ..sensor_sim import Dataset
from . import layers
from .model import ArchConfig, ModelParams, forward, init_model, loss_and_gradients


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite during training."""


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 50
    batch_size: int = 64
    base_lr: float = 0.01
    momentum: float = 0.9
    plateau_patience: int = 5
    plateau_factor: float = 0.1
    min_lr: float = 1e-5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0.0 < self.plateau_factor < 1.0:
            raise ValueError("plateau_factor must lie in (0, 1)")
        if self.base_lr <= 0 or self.min_lr <= 0:
            raise ValueError("learning rates must be positive")
        if self.plateau_patience < 1:
            raise ValueError("plateau_patience must be >= 1")


@dataclass
class TrainHistory:
    """One row per completed epoch."""

    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_angle_acc: list[float] = field(default_factory=list)
    val_pos_acc: list[float] = field(default_factory=list)
    learning_rate: list[float] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["epoch,train_loss,val_loss,val_angle_acc,val_pos_acc,learning_rate"]
        for i in range(len(self.train_loss)):
            lines.append(
                f"{i + 1},{self.train_loss[i]:.8f},{self.val_loss[i]:.8f},"
                f"{self.val_angle_acc[i]:.6f},{self.val_pos_acc[i]:.6f},"
                f"{self.learning_rate[i]:.8g}"
            )
        return "\n".join(lines) + "\n"


def frame_to_input(frame) -> np.ndarray:
    """Stack both finger grids into one (2, 10, 10) input in [0, 1]."""
    return np.stack([frame.finger_a, frame.finger_b]) / FORCE_MAX_N


def dataset_to_arrays(dataset: Dataset) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(X, angle_labels, pos_labels) ready for the network."""
    x = np.stack([frame_to_input(s.frame) for s in dataset.samples])
    ya = np.array([int(s.angle) for s in dataset.samples], dtype=np.int64)
    yp = np.array([int(s.position) for s in dataset.samples], dtype=np.int64)
    return x, ya, yp


def _batched_logits(params: ModelParams, x: np.ndarray, batch: int = 256):
    angle_parts, pos_parts = [], []
    for lo in range(0, len(x), batch):
        a, p, _ = forward(params, x[lo : lo + batch], train=False)
        angle_parts.append(a)
        pos_parts.append(p)
    return np.concatenate(angle_parts), np.concatenate(pos_parts)


@dataclass(frozen=True)
class EvalReport:
    angle_accuracy: float
    pos_accuracy: float
    angle_confusion: np.ndarray  # (4, 4) counts, rows = true class
    pos_confusion: np.ndarray    # (3, 3) counts


def evaluate_arrays(params: ModelParams, x, ya, yp) -> EvalReport:
    if len(x) == 0:
        raise ValueError("evaluation set must be non-empty")
    angle_logits, pos_logits = _batched_logits(params, x)
    pred_a = angle_logits.argmax(axis=1)
    pred_p = pos_logits.argmax(axis=1)
    conf_a = np.zeros((N_ANGLES, N_ANGLES), dtype=np.int64)
    conf_p = np.zeros((N_POSITIONS, N_POSITIONS), dtype=np.int64)
    np.add.at(conf_a, (ya, pred_a), 1)
    np.add.at(conf_p, (yp, pred_p), 1)
    return EvalReport(
        angle_accuracy=float((pred_a == ya).mean()),
        pos_accuracy=float((pred_p == yp).mean()),
        angle_confusion=conf_a,
        pos_confusion=conf_p,
    )


def evaluate(params: ModelParams, test: Dataset) -> EvalReport:
    """Accuracies and per-head confusion matrices on a dataset."""
    return evaluate_arrays(params, *dataset_to_arrays(test))


def _val_loss(params: ModelParams, x, ya, yp) -> float:
    angle_logits, pos_logits = _batched_logits(params, x)
    la, _ = layers.cross_entropy(angle_logits, ya)
    lp, _ = layers.cross_entropy(pos_logits, yp)
    return float(la + lp)


def train(
    init: ModelParams | None,
    train_set: Dataset,
    val_set: Dataset,
    cfg: TrainConfig = TrainConfig(),
    arch: ArchConfig = ArchConfig(),
    log=None,
) -> tuple[ModelParams, TrainHistory]:
    """Minibatch SGD for ``cfg.epochs`` epochs.

    After each epoch the validation loss is checked; once it has failed
    to improve for ``plateau_patience`` consecutive epochs, the learning
    rate is multiplied by ``plateau_factor`` (floored at ``min_lr``).
    """
    if len(train_set) == 0 or len(val_set) == 0:
        raise ValueError("train and validation sets must be non-empty")
    params = init if init is not None else init_model(arch, seed=cfg.seed)

    x_tr, ya_tr, yp_tr = dataset_to_arrays(train_set)
    x_val, ya_val, yp_val = dataset_to_arrays(val_set)

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed)))
    velocity = {name: np.zeros_like(arr) for name, arr in params.trainable()}
    lr = cfg.base_lr
    best_val = np.inf
    stall = 0
    history = TrainHistory()

    for epoch in range(cfg.epochs):
        t0 = time.perf_counter()
        order = rng.permutation(len(x_tr))
        epoch_loss = 0.0
        n_batches = 0
        for lo in range(0, len(order), cfg.batch_size):
            idx = order[lo : lo + cfg.batch_size]
            loss_value, grads = loss_and_gradients(
                params, x_tr[idx], ya_tr[idx], yp_tr[idx], train=True
            )
            if not np.isfinite(loss_value):
                raise TrainingDivergedError(
                    f"non-finite loss {loss_value} at epoch {epoch + 1}, batch {n_batches}"
                )
            for name, arr in params.trainable():
                v = velocity[name]
                v *= cfg.momentum
                v -= lr * grads[name]
                arr += v
            epoch_loss += float(loss_value)
            n_batches += 1

        val_loss = _val_loss(params, x_val, ya_val, yp_val)
        val_report = evaluate_arrays(params, x_val, ya_val, yp_val)
        history.train_loss.append(epoch_loss / n_batches)
        history.val_loss.append(val_loss)
        history.val_angle_acc.append(val_report.angle_accuracy)
        history.val_pos_acc.append(val_report.pos_accuracy)
        history.learning_rate.append(lr)

        if val_loss < best_val - 1e-12:
            best_val = val_loss
            stall = 0
        else:
            stall += 1
            if stall >= cfg.plateau_patience:
                lr = max(lr * cfg.plateau_factor, cfg.min_lr)
                stall = 0
        if log is not None:
            log(
                f"epoch {epoch + 1:>3}/{cfg.epochs}  "
                f"train {history.train_loss[-1]:.4f}  val {val_loss:.4f}  "
                f"acc angle {val_report.angle_accuracy:.4f} pos {val_report.pos_accuracy:.4f}  "
                f"lr {lr:.2g}  ({time.perf_counter() - t0:.1f}s)"
            )
    return params, history
