"""Numpy building blocks for the classifier: conv, batch norm, affine, losses.

Everything runs in float64 and returns exact analytic gradients; each
backward pass is validated against central finite differences in the test
suite.  Shapes follow the (N, C, H, W) convention.
"""
from __future__ import annotations

import numpy as np

BN_EPS = 1e-5


def im2col(x: np.ndarray, ksize: int = 3, pad: int = 1) -> np.ndarray:
    """(N, C, H, W) -> (N*H*W, C*ksize*ksize) patch matrix, stride 1."""
    n, c, h, w = x.shape
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    s = xp.strides
    windows = np.lib.stride_tricks.as_strided(
        xp,
        shape=(n, c, h, w, ksize, ksize),
        strides=(s[0], s[1], s[2], s[3], s[2], s[3]),
        writeable=False,
    )
    # (N, H, W, C, k, k) so each output row is one spatial location
    return np.ascontiguousarray(windows.transpose(0, 2, 3, 1, 4, 5)).reshape(
        n * h * w, c * ksize * ksize
    )


def col2im(cols: np.ndarray, shape: tuple[int, int, int, int], ksize: int = 3, pad: int = 1) -> np.ndarray:
    """Adjoint of :func:`im2col`: scatter-add patches back onto the image."""
    n, c, h, w = shape
    patches = cols.reshape(n, h, w, c, ksize, ksize).transpose(0, 3, 4, 5, 1, 2)
    xp = np.zeros((n, c, h + 2 * pad, w + 2 * pad), dtype=cols.dtype)
    for i in range(ksize):
        for j in range(ksize):
            xp[:, :, i : i + h, j : j + w] += patches[:, :, i, j]
    return xp[:, :, pad : pad + h, pad : pad + w]


def conv_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray):
    """3x3 convolution, stride 1, pad 1.  weight: (O, C, 3, 3)."""
    n, c, h, w = x.shape
    o = weight.shape[0]
    cols = im2col(x)
    wmat = weight.reshape(o, -1).T  # (C*9, O)
    out = (cols @ wmat + bias).reshape(n, h, w, o).transpose(0, 3, 1, 2)
    return out, (cols, wmat, x.shape, o)


def conv_backward(dout: np.ndarray, cache):
    cols, wmat, x_shape, o = cache
    n, c, h, w = x_shape
    dmat = dout.transpose(0, 2, 3, 1).reshape(-1, o)
    dweight = (cols.T @ dmat).T.reshape(o, c, 3, 3)
    dbias = dmat.sum(axis=0)
    dcols = dmat @ wmat.T
    dx = col2im(dcols, x_shape)
    return dx, dweight, dbias


def batchnorm_forward(
    x: np.ndarray,
    gamma: np.ndarray,
    beta: np.ndarray,
    run_mean: np.ndarray,
    run_var: np.ndarray,
    train: bool,
    momentum: float = 0.1,
):
    """Per-channel batch normalization over (N, H, W).

    Train mode normalizes with batch statistics (biased variance) and
    updates the running estimates in place; eval mode is a fixed affine
    map built from the stored statistics.
    """
    c = x.shape[1]
    gamma_b = gamma.reshape(1, c, 1, 1)
    beta_b = beta.reshape(1, c, 1, 1)
    if train:
        mean = x.mean(axis=(0, 2, 3))
        var = x.var(axis=(0, 2, 3))
        inv_std = 1.0 / np.sqrt(var + BN_EPS)
        xhat = (x - mean.reshape(1, c, 1, 1)) * inv_std.reshape(1, c, 1, 1)
        run_mean *= 1.0 - momentum
        run_mean += momentum * mean
        run_var *= 1.0 - momentum
        run_var += momentum * var
    else:
        inv_std = 1.0 / np.sqrt(run_var + BN_EPS)
        xhat = (x - run_mean.reshape(1, c, 1, 1)) * inv_std.reshape(1, c, 1, 1)
    out = gamma_b * xhat + beta_b
    return out, (xhat, inv_std, gamma)


def batchnorm_backward(dout: np.ndarray, cache):
    """Gradient through the batch-statistics path (train mode)."""
    xhat, inv_std, gamma = cache
    c = dout.shape[1]
    axes = (0, 2, 3)
    m = dout.shape[0] * dout.shape[2] * dout.shape[3]
    dgamma = np.sum(dout * xhat, axis=axes)
    dbeta = np.sum(dout, axis=axes)
    dxhat = dout * gamma.reshape(1, c, 1, 1)
    sum_dxhat = np.sum(dxhat, axis=axes, keepdims=True)
    sum_dxhat_xhat = np.sum(dxhat * xhat, axis=axes, keepdims=True)
    dx = (inv_std.reshape(1, c, 1, 1) / m) * (
        m * dxhat - sum_dxhat - xhat * sum_dxhat_xhat
    )
    return dx, dgamma, dbeta


def relu_forward(x: np.ndarray):
    return np.maximum(x, 0.0), x


def relu_backward(dout: np.ndarray, cache):
    return dout * (cache > 0.0)


def affine_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray):
    """x: (N, D), weight: (D, M)."""
    return x @ weight + bias, (x, weight)


def affine_backward(dout: np.ndarray, cache):
    x, weight = cache
    return dout @ weight.T, x.T @ dout, dout.sum(axis=0)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(logits: np.ndarray, labels: np.ndarray):
    """Mean softmax cross-entropy and its gradient w.r.t. the logits."""
    labels = np.asarray(labels)
    n, k = logits.shape
    if labels.shape != (n,):
        raise ValueError(f"labels must be shape ({n},), got {labels.shape}")
    if labels.min() < 0 or labels.max() >= k:
        raise ValueError(f"label outside [0, {k - 1}]")
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    loss = -log_probs[np.arange(n), labels].mean()
    dlogits = np.exp(log_probs)
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n
    return loss, dlogits
