"""
Forward/backward kernels of the layer types used by the force regressor.

Activations are NCHW. Each forward returns (output, cache); the matching
backward consumes the upstream gradient and the cache.
"""

from __future__ import annotations

import numpy as np

BN_MOMENTUM = 0.1
BN_EPS = 1e-5


def conv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray):
    """Same-padded stride-1 convolution (cross-correlation), w is (F, C, k, k)"""
    n, c, h, wd = x.shape
    f, _, k, _ = w.shape
    p = k // 2
    xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))
    out = np.zeros((n, h, wd, f), dtype=x.dtype)
    for di in range(k):
        for dj in range(k):
            out += np.tensordot(xp[:, :, di : di + h, dj : dj + wd], w[:, :, di, dj], axes=([1], [1]))
    out = out.transpose(0, 3, 1, 2) + b[None, :, None, None]
    return np.ascontiguousarray(out), (xp, w, x.shape)


def conv2d_backward(dout: np.ndarray, cache):
    xp, w, (n, c, h, wd) = cache
    f, _, k, _ = w.shape
    p = k // 2
    db = dout.sum(axis=(0, 2, 3))
    dw = np.zeros_like(w)
    dxp = np.zeros_like(xp)
    for di in range(k):
        for dj in range(k):
            window = xp[:, :, di : di + h, dj : dj + wd]
            dw[:, :, di, dj] = np.tensordot(dout, window, axes=([0, 2, 3], [0, 2, 3]))
            dxp[:, :, di : di + h, dj : dj + wd] += np.tensordot(dout, w[:, :, di, dj], axes=([1], [0])).transpose(0, 3, 1, 2)
    dx = dxp[:, :, p : p + h, p : p + wd]
    return dx, dw, db


def batchnorm_forward(
    x: np.ndarray,
    gamma: np.ndarray,
    beta: np.ndarray,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    train: bool,
):
    """
    Per-channel normalization over (N, H, W).

    In train mode returns updated running moments (unbiased variance);
    in eval mode they are returned unchanged.
    """
    if train:
        mean = x.mean(axis=(0, 2, 3))
        var = x.var(axis=(0, 2, 3))
        count = x.size // x.shape[1]
        unbiased = var * count / max(count - 1, 1)
        new_mean = (1.0 - BN_MOMENTUM) * running_mean + BN_MOMENTUM * mean
        new_var = (1.0 - BN_MOMENTUM) * running_var + BN_MOMENTUM * unbiased
    else:
        mean, var = running_mean, running_var
        new_mean, new_var = running_mean, running_var
    inv_std = 1.0 / np.sqrt(var + BN_EPS)
    x_hat = (x - mean[None, :, None, None]) * inv_std[None, :, None, None]
    out = gamma[None, :, None, None] * x_hat + beta[None, :, None, None]
    moments = (new_mean.astype(x.dtype, copy=False), new_var.astype(x.dtype, copy=False))
    return out, (x_hat, inv_std, gamma, train), moments


def batchnorm_backward(dout: np.ndarray, cache):
    x_hat, inv_std, gamma, train = cache
    dgamma = (dout * x_hat).sum(axis=(0, 2, 3))
    dbeta = dout.sum(axis=(0, 2, 3))
    dx_hat = dout * gamma[None, :, None, None]
    if not train:
        return dx_hat * inv_std[None, :, None, None], dgamma, dbeta
    m = dout.size // dout.shape[1]
    dx = (
        inv_std[None, :, None, None]
        / m
        * (
            m * dx_hat
            - dx_hat.sum(axis=(0, 2, 3))[None, :, None, None]
            - x_hat * (dx_hat * x_hat).sum(axis=(0, 2, 3))[None, :, None, None]
        )
    )
    return dx, dgamma, dbeta


def relu_forward(x: np.ndarray):
    return np.maximum(x, 0.0), x > 0.0


def relu_backward(dout: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return dout * mask


def maxpool2_forward(x: np.ndarray):
    """2x2 stride-2 max pool; odd trailing rows/columns are dropped"""
    n, c, h, w = x.shape
    h2, w2 = h // 2, w // 2
    blocks = (
        x[:, :, : 2 * h2, : 2 * w2]
        .reshape(n, c, h2, 2, w2, 2)
        .transpose(0, 1, 2, 4, 3, 5)
        .reshape(n, c, h2, w2, 4)
    )
    arg = blocks.argmax(axis=-1)
    out = np.take_along_axis(blocks, arg[..., None], axis=-1)[..., 0]
    return out, (arg, x.shape)


def maxpool2_backward(dout: np.ndarray, cache) -> np.ndarray:
    """Route each gradient to the first maximal element of its window"""
    arg, (n, c, h, w) = cache
    h2, w2 = h // 2, w // 2
    routed = np.zeros((n, c, h2, w2, 4), dtype=dout.dtype)
    np.put_along_axis(routed, arg[..., None], dout[..., None], axis=-1)
    dx = np.zeros((n, c, h, w), dtype=dout.dtype)
    dx[:, :, : 2 * h2, : 2 * w2] = (
        routed.reshape(n, c, h2, w2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, 2 * h2, 2 * w2)
    )
    return dx


def dense_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray):
    return x @ w + b, x


def dense_backward(dout: np.ndarray, x: np.ndarray, w: np.ndarray):
    return dout @ w.T, x.T @ dout, dout.sum(axis=0)


def l1_loss(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean absolute error and its subgradient (0 at exact ties)"""
    diff = pred - target
    return float(np.mean(np.abs(diff))), np.sign(diff) / diff.size
