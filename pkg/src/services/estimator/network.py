"""
Convolutional force regressor.

    [conv 3x3 -> BN -> ReLU -> maxpool 2x2] x pooled_convs
    [conv 3x3 -> ReLU]                      x remaining conv layers
    flatten -> [dense -> ReLU] x len(dense_units) -> dense(outputs)

Parameters live in an ordered dict keyed "conv{i}.w", "bn{i}.gamma",
"dense{j}.b", "out.w", ...; batch-norm running moments live in `stats`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from loguru import logger

from ...core.errors import EmptyBatchError
from ...models.estimator import NetworkSpec
from . import layers

STATED_PARAMETER_COUNT = 78_847


@dataclass
class NetworkParams:
    spec: NetworkSpec
    params: dict[str, np.ndarray]
    stats: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def dtype(self):
        return next(iter(self.params.values())).dtype

    def copy(self) -> NetworkParams:
        return NetworkParams(
            self.spec,
            {k: v.copy() for k, v in self.params.items()},
            {k: v.copy() for k, v in self.stats.items()},
        )

    def flat(self) -> np.ndarray:
        return np.concatenate([v.ravel() for v in self.params.values()])

    def flat_stats(self) -> np.ndarray:
        if not self.stats:
            return np.zeros(0, dtype=self.dtype)
        return np.concatenate([v.ravel() for v in self.stats.values()])

    def load_flat(self, values: np.ndarray, stats: np.ndarray) -> None:
        offset = 0
        for v in self.params.values():
            v[...] = values[offset : offset + v.size].reshape(v.shape)
            offset += v.size
        offset = 0
        for v in self.stats.values():
            v[...] = stats[offset : offset + v.size].reshape(v.shape)
            offset += v.size


def _flat_features(spec: NetworkSpec) -> int:
    size = spec.input_size
    for _ in range(spec.pooled_convs):
        size //= 2
    return spec.conv_filters[-1] * size * size


def count_parameters(spec: NetworkSpec) -> int:
    total = 0
    channels = 1
    k2 = spec.kernel_size**2
    for i, filters in enumerate(spec.conv_filters):
        total += filters * channels * k2 + filters
        if i < spec.pooled_convs:
            total += 2 * filters
        channels = filters
    width = _flat_features(spec)
    for units in [*spec.dense_units, spec.outputs]:
        total += width * units + units
        width = units
    return total


def _uniform(rng: np.random.Generator, fan_in: int, shape, dtype) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def init_network(spec: NetworkSpec, seed: int = 0, dtype: str | np.dtype = "float32") -> NetworkParams:
    """He-uniform weights, zero biases, unit BN scales and zero shifts"""
    if spec.pooled_convs > len(spec.conv_filters):
        raise ValueError("pooled_convs cannot exceed the number of conv layers")
    dtype = np.dtype(dtype)
    rng = np.random.default_rng(seed)
    params: dict[str, np.ndarray] = {}
    stats: dict[str, np.ndarray] = {}
    channels = 1
    k = spec.kernel_size
    for i, filters in enumerate(spec.conv_filters):
        params[f"conv{i}.w"] = _uniform(rng, channels * k * k, (filters, channels, k, k), dtype)
        params[f"conv{i}.b"] = np.zeros(filters, dtype=dtype)
        if i < spec.pooled_convs:
            params[f"bn{i}.gamma"] = np.ones(filters, dtype=dtype)
            params[f"bn{i}.beta"] = np.zeros(filters, dtype=dtype)
            stats[f"bn{i}.mean"] = np.zeros(filters, dtype=dtype)
            stats[f"bn{i}.var"] = np.ones(filters, dtype=dtype)
        channels = filters

    width = _flat_features(spec)
    if width == 0:
        raise ValueError("input_size is too small for the number of pooling layers")
    for j, units in enumerate(spec.dense_units):
        params[f"dense{j}.w"] = _uniform(rng, width, (width, units), dtype)
        params[f"dense{j}.b"] = np.zeros(units, dtype=dtype)
        width = units
    params["out.w"] = _uniform(rng, width, (width, spec.outputs), dtype)
    params["out.b"] = np.zeros(spec.outputs, dtype=dtype)

    net = NetworkParams(spec, params, stats)
    n_params = count_parameters(spec)
    logger.info("Network initialised", parameters=n_params, stated=STATED_PARAMETER_COUNT, dtype=str(dtype))
    return net


def _as_batch(images: np.ndarray, net: NetworkParams) -> np.ndarray:
    x = np.asarray(images, dtype=net.dtype)
    if x.ndim == 2:
        x = x[None, None]
    elif x.ndim == 3:
        x = x[:, None]
    if x.shape[0] == 0:
        raise EmptyBatchError("forward pass needs at least one image")
    return x


def _forward(net: NetworkParams, x: np.ndarray, train: bool, update_stats: bool):
    p = net.params
    spec = net.spec
    caches = []
    for i in range(len(spec.conv_filters)):
        x, conv_cache = layers.conv2d_forward(x, p[f"conv{i}.w"], p[f"conv{i}.b"])
        if i < spec.pooled_convs:
            x, bn_cache, (mean, var) = layers.batchnorm_forward(
                x, p[f"bn{i}.gamma"], p[f"bn{i}.beta"], net.stats[f"bn{i}.mean"], net.stats[f"bn{i}.var"], train
            )
            if train and update_stats:
                net.stats[f"bn{i}.mean"] = mean
                net.stats[f"bn{i}.var"] = var
            x, relu_mask = layers.relu_forward(x)
            x, pool_cache = layers.maxpool2_forward(x)
            caches.append((conv_cache, bn_cache, relu_mask, pool_cache))
        else:
            x, relu_mask = layers.relu_forward(x)
            caches.append((conv_cache, None, relu_mask, None))

    flat_shape = x.shape
    x = x.reshape(x.shape[0], -1)
    dense_caches = []
    for j in range(len(spec.dense_units)):
        x, dense_in = layers.dense_forward(x, p[f"dense{j}.w"], p[f"dense{j}.b"])
        x, relu_mask = layers.relu_forward(x)
        dense_caches.append((dense_in, relu_mask))
    out, out_in = layers.dense_forward(x, p["out.w"], p["out.b"])
    return out, (caches, flat_shape, dense_caches, out_in)


def forward(net: NetworkParams, images: np.ndarray, mode: str = "eval", update_stats: bool = True) -> np.ndarray:
    """(N, outputs) predictions; train mode normalizes with batch statistics"""
    if mode not in ("train", "eval"):
        raise ValueError("mode must be 'train' or 'eval'")
    out, _ = _forward(net, _as_batch(images, net), mode == "train", update_stats)
    return out


def loss_and_gradients(
    net: NetworkParams,
    images: np.ndarray,
    labels: np.ndarray,
    update_stats: bool = True,
) -> tuple[float, dict[str, np.ndarray]]:
    """Train-mode L1 loss and the gradient of every parameter"""
    x = _as_batch(images, net)
    out, (caches, flat_shape, dense_caches, out_in) = _forward(net, x, True, update_stats)
    loss, dout = layers.l1_loss(out, np.asarray(labels, dtype=out.dtype).reshape(out.shape))
    dout = dout.astype(out.dtype)
    p = net.params
    grads: dict[str, np.ndarray] = {}

    d, grads["out.w"], grads["out.b"] = layers.dense_backward(dout, out_in, p["out.w"])
    for j in reversed(range(len(net.spec.dense_units))):
        dense_in, relu_mask = dense_caches[j]
        d = layers.relu_backward(d, relu_mask)
        d, grads[f"dense{j}.w"], grads[f"dense{j}.b"] = layers.dense_backward(d, dense_in, p[f"dense{j}.w"])

    d = d.reshape(flat_shape)
    for i in reversed(range(len(net.spec.conv_filters))):
        conv_cache, bn_cache, relu_mask, pool_cache = caches[i]
        if pool_cache is not None:
            d = layers.maxpool2_backward(d, pool_cache)
        d = layers.relu_backward(d, relu_mask)
        if bn_cache is not None:
            d, grads[f"bn{i}.gamma"], grads[f"bn{i}.beta"] = layers.batchnorm_backward(d, bn_cache)
        d, grads[f"conv{i}.w"], grads[f"conv{i}.b"] = layers.conv2d_backward(d, conv_cache)

    return loss, {k: grads[k] for k in p}


def predict_forces(net: NetworkParams, images: np.ndarray) -> np.ndarray:
    """C_1 .. C_7 forces (N): eval-mode outputs without C_0, negatives clamped to 0"""
    single = np.ndim(images) == 2
    out = forward(net, images, mode="eval")[:, 1:]
    out = np.maximum(out, 0.0)
    return out[0] if single else out
