import copy

import numpy as np
import pytest

from helpers import finite_difference_gradients, gradient_relative_errors
from palmpipe.cnn import layers
from palmpipe.cnn.model import (
    ArchConfig,
    BatchNormState,
    ModelParams,
    forward,
    init_model,
    loss,
    loss_and_gradients,
)

SMALL_ARCH = ArchConfig(in_channels=2, grid=4, conv_channels=(3, 4), head_widths=(8, 6, 5))


def small_batch(n=3, seed=7):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.0, 1.0, (n, 2, 4, 4))
    ya = rng.integers(0, 4, n)
    yp = rng.integers(0, 3, n)
    return x, ya, yp


def test_uniform_logits_loss_value():
    # all-zero logits: each head is a uniform softmax
    angle = np.zeros((5, 4))
    pos = np.zeros((5, 3))
    value = loss(angle, pos, np.zeros(5, dtype=int), np.zeros(5, dtype=int))
    assert value == pytest.approx(np.log(4) + np.log(3), abs=1e-12)


def test_confident_head_leaves_other_heads_loss():
    rng = np.random.default_rng(0)
    pos = rng.normal(size=(4, 3))
    yp = np.array([0, 1, 2, 0])
    angle = np.full((4, 4), -1e3)
    ya = np.array([1, 2, 0, 3])
    angle[np.arange(4), ya] = 1e3  # infinitely confident and correct
    pos_only, _ = layers.cross_entropy(pos, yp)
    assert loss(angle, pos, ya, yp) == pytest.approx(pos_only, abs=1e-12)


def test_loss_matches_independent_logsumexp_oracle():
    rng = np.random.default_rng(5)
    logits_a = rng.normal(size=(6, 4)) * 3
    logits_p = rng.normal(size=(6, 3)) * 3
    ya = rng.integers(0, 4, 6)
    yp = rng.integers(0, 3, 6)

    def naive_ce(logits, labels):
        total = 0.0
        for row, label in zip(logits, labels):
            total += np.log(np.exp(row).sum()) - row[label]
        return total / len(labels)

    expected = naive_ce(logits_a, ya) + naive_ce(logits_p, yp)
    assert loss(logits_a, logits_p, ya, yp) == pytest.approx(expected, abs=1e-12)


def test_cross_entropy_rejects_bad_labels():
    with pytest.raises(ValueError):
        layers.cross_entropy(np.zeros((2, 3)), np.array([0, 3]))
    with pytest.raises(ValueError):
        layers.cross_entropy(np.zeros((2, 3)), np.array([-1, 0]))


def test_softmax_rows_sum_to_one_and_shift_invariance():
    rng = np.random.default_rng(2)
    logits = rng.normal(size=(8, 4)) * 10
    probs = layers.softmax(logits)
    assert np.abs(probs.sum(axis=1) - 1.0).max() < 1e-12
    shifted = layers.softmax(logits + 123.456)
    assert np.abs(probs - shifted).max() < 1e-12
    assert np.array_equal(probs.argmax(axis=1), shifted.argmax(axis=1))


def test_zero_input_gives_symmetric_logits():
    params = init_model(SMALL_ARCH, seed=0)
    x = np.zeros((2, 2, 4, 4))
    angle_logits, pos_logits, _ = forward(params, x, train=True)
    # zero biases and BN beta: every logit in a row is identical
    assert np.abs(angle_logits - angle_logits[:, :1]).max() < 1e-12
    assert np.abs(pos_logits - pos_logits[:, :1]).max() < 1e-12


def test_forward_output_shapes():
    params = init_model(SMALL_ARCH, seed=0)
    x, _, _ = small_batch(n=5)
    a, p, _ = forward(params, x, train=False)
    assert a.shape == (5, 4)
    assert p.shape == (5, 3)
    with pytest.raises(ValueError):
        forward(params, np.zeros((2, 1, 4, 4)))


def test_hand_computed_tiny_forward_fixture():
    # 1-channel 2x2 input, all-ones conv kernels, identity-ish heads:
    # every conv output cell sums the full padded window (value 10, then
    # 40), each BN in eval mode divides by sqrt(1 + eps), heads scale by
    # 0.1 into two units and combine with +/-1 weights and 0.5 biases.
    arch = ArchConfig(
        in_channels=1, grid=2, conv_channels=(1, 1), head_widths=(2, 2, 2),
        n_angle=2, n_position=2,
    )
    params = init_model(arch, seed=0)
    params.conv1_w[:] = 1.0
    params.conv2_w[:] = 1.0
    params.conv1_b[:] = 0.0
    params.conv2_b[:] = 0.0
    for head in (params.angle_head, params.pos_head):
        head[0] = (np.full((4, 2), 0.1), np.zeros(2))
        head[1] = (np.eye(2), np.zeros(2))
        head[2] = (np.eye(2), np.zeros(2))
        head[3] = (np.array([[1.0, -1.0], [1.0, -1.0]]), np.array([0.5, -0.5]))
    x = np.array([[[[1.0, 2.0], [3.0, 4.0]]]])
    angle_logits, pos_logits, _ = forward(params, x, train=False)
    v = 40.0 / (1.0 + layers.BN_EPS)      # two eval-mode BNs with unit stats
    expected = 0.8 * v + 0.5              # 2 units x 0.1 weight x v, then +/-1 and bias
    assert angle_logits[0, 0] == pytest.approx(expected, abs=1e-9)
    assert angle_logits[0, 1] == pytest.approx(-expected, abs=1e-9)
    assert pos_logits[0, 0] == pytest.approx(expected, abs=1e-9)


def test_batchnorm_eval_is_affine_in_input():
    rng = np.random.default_rng(3)
    gamma, beta = rng.uniform(0.5, 2.0, 4), rng.normal(size=4)
    mean, var = rng.normal(size=4), rng.uniform(0.5, 2.0, 4)
    x1 = rng.normal(size=(2, 4, 5, 5))
    x2 = rng.normal(size=(2, 4, 5, 5))
    alpha = 0.613

    def bn(x):
        out, _ = layers.batchnorm_forward(x, gamma, beta, mean.copy(), var.copy(), train=False)
        return out

    # affine: bn(a*x1 + (1-a)*x2) == a*bn(x1) + (1-a)*bn(x2)
    lhs = bn(alpha * x1 + (1 - alpha) * x2)
    rhs = alpha * bn(x1) + (1 - alpha) * bn(x2)
    assert np.abs(lhs - rhs).max() < 1e-10
    assert np.abs(bn(x1) - bn(x1)).max() == 0.0  # deterministic


def test_batchnorm_train_normalizes_batch():
    rng = np.random.default_rng(4)
    x = rng.normal(3.0, 2.5, (8, 3, 4, 4))
    gamma, beta = np.ones(3), np.zeros(3)
    out, _ = layers.batchnorm_forward(x, gamma, beta, np.zeros(3), np.ones(3), train=True)
    assert np.abs(out.mean(axis=(0, 2, 3))).max() < 1e-12
    assert np.abs(out.var(axis=(0, 2, 3)) - 1.0).max() < 1e-3


def test_full_model_gradients_match_finite_differences():
    params = init_model(SMALL_ARCH, seed=1)
    x, ya, yp = small_batch()
    _, grads = loss_and_gradients(params, x, ya, yp, train=True)
    fd = finite_difference_gradients(copy.deepcopy(params), x, ya, yp)
    errors = gradient_relative_errors(grads, fd)
    worst = max(errors.values())
    assert worst < 1e-4, f"worst relative error {worst} in {errors}"


def test_duplicating_batch_keeps_mean_gradients():
    params = init_model(SMALL_ARCH, seed=2)
    x, ya, yp = small_batch(n=4, seed=11)
    _, g1 = loss_and_gradients(copy.deepcopy(params), x, ya, yp, train=True)
    x2 = np.concatenate([x, x])
    _, g2 = loss_and_gradients(
        copy.deepcopy(params), x2, np.concatenate([ya, ya]), np.concatenate([yp, yp]), train=True
    )
    for name in g1:
        assert np.abs(g1[name] - g2[name]).max() < 1e-12, name


def test_conv_backward_input_gradient():
    # isolated conv layer against finite differences on dx
    rng = np.random.default_rng(8)
    x = rng.normal(size=(2, 3, 5, 5))
    w = rng.normal(size=(4, 3, 3, 3)) * 0.3
    b = rng.normal(size=4) * 0.1
    out, cache = layers.conv_forward(x, w, b)
    upstream = rng.normal(size=out.shape)
    dx, dw, db = layers.conv_backward(upstream, cache)

    h = 1e-6
    idxs = [(0, 1, 2, 3), (1, 0, 0, 0), (1, 2, 4, 4)]
    for idx in idxs:
        orig = x[idx]
        x[idx] = orig + h
        up = (layers.conv_forward(x, w, b)[0] * upstream).sum()
        x[idx] = orig - h
        down = (layers.conv_forward(x, w, b)[0] * upstream).sum()
        x[idx] = orig
        fd = (up - down) / (2 * h)
        assert dx[idx] == pytest.approx(fd, rel=1e-5, abs=1e-8)
