"""The two-head classifier: conv/BN/ReLU backbone, one head per label axis.

Backbone: two 3x3 convolutions (stride 1, pad 1, spatial size preserved),
each followed by batch normalization and ReLU.  The flattened features
feed two stacks of four affine layers with ReLU between (none after the
last): one stack emits tilt-angle logits, the other position logits.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..core_types import GRID_SIZE, N_ANGLES, N_POSITIONS
from . import layers


@dataclass(frozen=True)
class ArchConfig:
    """Layer sizes.  Defaults keep training fast at desk scale."""

    in_channels: int = 2
    grid: int = GRID_SIZE
    conv_channels: tuple[int, int] = (16, 32)
    head_widths: tuple[int, int, int] = (256, 128, 64)
    n_angle: int = N_ANGLES
    n_position: int = N_POSITIONS

    @property
    def flat_features(self) -> int:
        return self.conv_channels[1] * self.grid * self.grid

    def head_dims(self, n_out: int) -> list[tuple[int, int]]:
        widths = (self.flat_features, *self.head_widths, n_out)
        return list(zip(widths, widths[1:]))


@dataclass
class BatchNormState:
    gamma: np.ndarray
    beta: np.ndarray
    run_mean: np.ndarray
    run_var: np.ndarray


@dataclass
class ModelParams:
    """All weights and batch-norm statistics of the classifier."""

    arch: ArchConfig
    conv1_w: np.ndarray
    conv1_b: np.ndarray
    bn1: BatchNormState
    conv2_w: np.ndarray
    conv2_b: np.ndarray
    bn2: BatchNormState
    angle_head: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    pos_head: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)

    def named_arrays(self):
        """(name, array) pairs in the canonical checkpoint order."""
        yield "conv1.w", self.conv1_w
        yield "conv1.b", self.conv1_b
        yield "bn1.gamma", self.bn1.gamma
        yield "bn1.beta", self.bn1.beta
        yield "bn1.run_mean", self.bn1.run_mean
        yield "bn1.run_var", self.bn1.run_var
        yield "conv2.w", self.conv2_w
        yield "conv2.b", self.conv2_b
        yield "bn2.gamma", self.bn2.gamma
        yield "bn2.beta", self.bn2.beta
        yield "bn2.run_mean", self.bn2.run_mean
        yield "bn2.run_var", self.bn2.run_var
        for head_name, head in (("angle", self.angle_head), ("pos", self.pos_head)):
            for i, (w, b) in enumerate(head):
                yield f"{head_name}.{i}.w", w
                yield f"{head_name}.{i}.b", b

    def trainable(self):
        """Trainable (name, array) pairs: everything but running stats."""
        for name, arr in self.named_arrays():
            if not name.endswith((".run_mean", ".run_var")):
                yield name, arr


def _kaiming_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)


def init_model(arch: ArchConfig = ArchConfig(), seed: int = 0) -> ModelParams:
    """Seeded fan-in-scaled uniform init; biases zero, BN at identity."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    c_in, (c1, c2) = arch.in_channels, arch.conv_channels

    def bn_state(c: int) -> BatchNormState:
        return BatchNormState(
            gamma=np.ones(c), beta=np.zeros(c), run_mean=np.zeros(c), run_var=np.ones(c)
        )

    def head(n_out: int) -> list[tuple[np.ndarray, np.ndarray]]:
        return [
            (_kaiming_uniform(rng, (d_in, d_out), d_in), np.zeros(d_out))
            for d_in, d_out in arch.head_dims(n_out)
        ]

    return ModelParams(
        arch=arch,
        conv1_w=_kaiming_uniform(rng, (c1, c_in, 3, 3), c_in * 9),
        conv1_b=np.zeros(c1),
        bn1=bn_state(c1),
        conv2_w=_kaiming_uniform(rng, (c2, c1, 3, 3), c1 * 9),
        conv2_b=np.zeros(c2),
        bn2=bn_state(c2),
        angle_head=head(arch.n_angle),
        pos_head=head(arch.n_position),
    )


def forward(params: ModelParams, x: np.ndarray, train: bool = False):
    """Run the network.  x: (N, C, H, W) normalized to [0, 1].

    Returns (angle_logits, pos_logits, cache); the cache feeds
    :func:`backward`.  Train mode updates the BN running statistics.
    """
    arch = params.arch
    expected = (arch.in_channels, arch.grid, arch.grid)
    if x.ndim != 4 or x.shape[1:] != expected:
        raise ValueError(f"input must be (N, {expected[0]}, {expected[1]}, {expected[2]}), got {x.shape}")

    h1, c1_cache = layers.conv_forward(x, params.conv1_w, params.conv1_b)
    h1, bn1_cache = layers.batchnorm_forward(
        h1, params.bn1.gamma, params.bn1.beta, params.bn1.run_mean, params.bn1.run_var, train
    )
    h1, r1_cache = layers.relu_forward(h1)

    h2, c2_cache = layers.conv_forward(h1, params.conv2_w, params.conv2_b)
    h2, bn2_cache = layers.batchnorm_forward(
        h2, params.bn2.gamma, params.bn2.beta, params.bn2.run_mean, params.bn2.run_var, train
    )
    h2, r2_cache = layers.relu_forward(h2)

    flat = h2.reshape(x.shape[0], -1)

    def run_head(head):
        h = flat
        caches = []
        for i, (w, b) in enumerate(head):
            h, aff = layers.affine_forward(h, w, b)
            if i < len(head) - 1:
                h, relu = layers.relu_forward(h)
            else:
                relu = None
            caches.append((aff, relu))
        return h, caches

    angle_logits, angle_caches = run_head(params.angle_head)
    pos_logits, pos_caches = run_head(params.pos_head)
    cache = (
        c1_cache, bn1_cache, r1_cache,
        c2_cache, bn2_cache, r2_cache,
        h2.shape, angle_caches, pos_caches,
    )
    return angle_logits, pos_logits, cache


def loss(
    angle_logits: np.ndarray,
    pos_logits: np.ndarray,
    angle_labels: np.ndarray,
    pos_labels: np.ndarray,
) -> float:
    """Sum of the per-head mean cross-entropies."""
    la, _ = layers.cross_entropy(angle_logits, angle_labels)
    lp, _ = layers.cross_entropy(pos_logits, pos_labels)
    return la + lp


def backward(params: ModelParams, cache, dangle: np.ndarray, dpos: np.ndarray) -> dict[str, np.ndarray]:
    """Backpropagate logit gradients to every trainable parameter."""
    (
        c1_cache, bn1_cache, r1_cache,
        c2_cache, bn2_cache, r2_cache,
        h2_shape, angle_caches, pos_caches,
    ) = cache
    grads: dict[str, np.ndarray] = {}

    def head_backward(name, head, caches, dout):
        d = dout
        for i in range(len(head) - 1, -1, -1):
            aff, relu = caches[i]
            if relu is not None:
                d = layers.relu_backward(d, relu)
            d, dw, db = layers.affine_backward(d, aff)
            grads[f"{name}.{i}.w"] = dw
            grads[f"{name}.{i}.b"] = db
        return d

    dflat = head_backward("angle", params.angle_head, angle_caches, dangle)
    dflat = dflat + head_backward("pos", params.pos_head, pos_caches, dpos)

    dh2 = dflat.reshape(h2_shape)
    dh2 = layers.relu_backward(dh2, r2_cache)
    dh2, grads["bn2.gamma"], grads["bn2.beta"] = layers.batchnorm_backward(dh2, bn2_cache)
    dh1, grads["conv2.w"], grads["conv2.b"] = layers.conv_backward(dh2, c2_cache)

    dh1 = layers.relu_backward(dh1, r1_cache)
    dh1, grads["bn1.gamma"], grads["bn1.beta"] = layers.batchnorm_backward(dh1, bn1_cache)
    _, grads["conv1.w"], grads["conv1.b"] = layers.conv_backward(dh1, c1_cache)
    return grads


def loss_and_gradients(
    params: ModelParams,
    x: np.ndarray,
    angle_labels: np.ndarray,
    pos_labels: np.ndarray,
    train: bool = True,
):
    """Forward + backward in one call.  Returns (loss, gradients dict)."""
    angle_logits, pos_logits, cache = forward(params, x, train=train)
    la, dangle = layers.cross_entropy(angle_logits, angle_labels)
    lp, dpos = layers.cross_entropy(pos_logits, pos_labels)
    grads = backward(params, cache, dangle, dpos)
    return la + lp, grads


def predict(params: ModelParams, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eval-mode argmax class indices for both heads."""
    angle_logits, pos_logits, _ = forward(params, x, train=False)
    return angle_logits.argmax(axis=1), pos_logits.argmax(axis=1)
