"""Primitive op registry: forward kernels and their vector-Jacobian products.

Every primitive is a pair of pure numpy functions over float64 arrays:

    forward(inputs, attrs)                          -> (output, cache)
    backward(g, inputs, output, cache, attrs, needs) -> one gradient (or None) per input

`needs[i]` is False when input i does not require a gradient; backward may
skip that computation and return None in its slot.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.engine.errors import ShapeMismatchError, UnsupportedOpError

Arrays = Sequence[np.ndarray]
Grads = list[np.ndarray | None]


@dataclass(frozen=True)
class Primitive:
    name: str
    arity: int
    forward: Callable[[Arrays, Mapping[str, Any]], tuple[np.ndarray, Any]]
    backward: Callable[..., Grads]


PRIMITIVES: dict[str, Primitive] = {}


def register(name: str, arity: int):
    """Class decorator: registers a namespace with `forward`/`backward` staticmethods."""

    def wrap(cls):
        PRIMITIVES[name] = Primitive(name, arity, cls.forward, cls.backward)
        return cls

    return wrap


def get_primitive(name: str) -> Primitive:
    try:
        return PRIMITIVES[name]
    except KeyError:
        raise UnsupportedOpError(name) from None


def unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to `shape`."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _broadcast_shape(op: str, a: np.ndarray, b: np.ndarray) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeMismatchError(op, f"{a.shape} vs {b.shape}") from None


# ── elementwise ──────────────────────────────────────────────────────────────


@register("add", 2)
class _Add:
    @staticmethod
    def forward(inputs, attrs):
        a, b = inputs
        _broadcast_shape("add", a, b)
        return a + b, None

    @staticmethod
    def backward(g, inputs, out, cache, attrs, needs):
        a, b = inputs
        return [
            unbroadcast(g, a.shape) if needs[0] else None,
            unbroadcast(g, b.shape) if needs[1] else None,
        ]


@register("sub", 2)
class _Sub:
    @staticmethod
    def forward(inputs, attrs):
        a, b = inputs
        _broadcast_shape("sub", a, b)
        return a - b, None

    @staticmethod
    def backward(g, inputs, out, cache, attrs, needs):
        a, b = inputs
        return [
            unbroadcast(g, a.shape) if needs[0] else None,
            unbroadcast(-g, b.shape) if needs[1] else None,
        ]


@register("multiply", 2)
class _Multiply:
    @staticmethod
    def forward(inputs, attrs):
        a, b = inputs
        _broadcast_shape("multiply", a, b)
        return a * b, None

    @staticmethod
    def backward(g, inputs, out, cache, attrs, needs):
        a, b = inputs
        return [
            unbroadcast(g * b, a.shape) if needs[0] else None,
            unbroadcast(g * a, b.shape) if needs[1] else None,
        ]


@register("relu", 1)
class _Relu:
    # Subgradient at exactly 0 is 0.
    @staticmethod
    def forward(inputs, attrs):
        (x,) = inputs
        mask = x > 0
        return np.where(mask, x, 0.0), mask

    @staticmethod
    def backward(g, inputs, out, mask, attrs, needs):
        return [g * mask]


@register("tanh", 1)
class _Tanh:
    @staticmethod
    def forward(inputs, attrs):
        return np.tanh(inputs[0]), None

    @staticmethod
    def backward(g, inputs, out, cache, attrs, needs):
        return [g * (1.0 - out * out)]


# ── reductions and layout ────────────────────────────────────────────────────


def _expand_reduced(g: np.ndarray, shape: tuple[int, ...], axis, keepdims: bool) -> np.ndarray:
    if axis is not None and not keepdims:
        g = np.expand_dims(g, axis)
    return np.broadcast_to(g, shape)


@register("sum", 1)
class _Sum:
    @staticmethod
    def forward(inputs, attrs):
        axis = attrs.get("axis")
        return np.sum(inputs[0], axis=axis, keepdims=attrs.get("keepdims", False)), None

    @staticmethod
    def backward(g, inputs, out, cache, attrs, needs):
        x = inputs[0]
        return [_expand_reduced(g, x.shape, attrs.get("axis"), attrs.get("keepdims", False)).copy()]


@register("mean_pool", 1)
class _MeanPool:
    """Mean over one axis (token pooling in the attention classifier)."""

    @staticmethod
    def forward(inputs, attrs):
        x = inputs[0]
        axis = attrs["axis"]
        if not -x.ndim <= axis < x.ndim:
            raise ShapeMismatchError("mean_pool", f"axis {axis} out of range for {x.shape}")
        return np.mean(x, axis=axis), None

    @staticmethod
    def backward(g, inputs, out, cache, attrs, needs):
        x = inputs[0]
        axis = attrs["axis"]
        return [_expand_reduced(g, x.shape, axis, False) / x.shape[axis]]


@register("reshape", 1)
class _Reshape:
    @staticmethod
    def forward(inputs, attrs):
        x = inputs[0]
        shape = tuple(attrs["shape"])
        try:
            return x.reshape(shape), None
        except ValueError:
            raise ShapeMismatchError("reshape", f"cannot reshape {x.shape} into {shape}") from None

    @staticmethod
    def backward(g, inputs, out, cache, attrs, needs):
        return [g.reshape(inputs[0].shape)]


@register("transpose", 1)
class _Transpose:
    @staticmethod
    def forward(inputs, attrs):
        x = inputs[0]
        axes = tuple(attrs["axes"])
        if sorted(axes) != list(range(x.ndim)):
            raise ShapeMismatchError("transpose", f"axes {axes} invalid for {x.shape}")
        return np.transpose(x, axes), None

    @staticmethod
    def backward(g, inputs, out, cache, attrs, needs):
        return [np.transpose(g, np.argsort(attrs["axes"]))]


# ── linear algebra ───────────────────────────────────────────────────────────


@register("matmul", 2)
class _Matmul:
    @staticmethod
    def forward(inputs, attrs):
        a, b = inputs
        if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
            raise ShapeMismatchError("matmul", f"inner dims of {a.shape} and {b.shape} disagree")
        return np.matmul(a, b), None

    @staticmethod
    def backward(g, inputs, out, cache, attrs, needs):
        a, b = inputs
        ga = np.matmul(g, np.swapaxes(b, -1, -2)) if needs[0] else None
        gb = unbroadcast(np.matmul(np.swapaxes(a, -1, -2), g), b.shape) if needs[1] else None
        if ga is not None:
            ga = unbroadcast(ga, a.shape)
        return [ga, gb]


@register("conv2d", 2)
class _Conv2d:
    """Direct cross-correlation over sliding windows: x (N,C,H,W), w (O,C,kh,kw)."""

    @staticmethod
    def forward(inputs, attrs):
        x, w = inputs
        stride = int(attrs.get("stride", 1))
        pad = int(attrs.get("padding", 0))
        if x.ndim != 4 or w.ndim != 4:
            raise ShapeMismatchError("conv2d", f"expected 4-D input and kernel, got {x.shape}, {w.shape}")
        if x.shape[1] != w.shape[1]:
            raise ShapeMismatchError(
                "conv2d", f"input channels {x.shape[1]} != kernel channels {w.shape[1]}"
            )
        kh, kw = w.shape[2:]
        if x.shape[2] + 2 * pad < kh or x.shape[3] + 2 * pad < kw:
            raise ShapeMismatchError("conv2d", f"kernel {kh}x{kw} larger than padded input {x.shape[2:]}")

        xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x
        windows = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride]
        out = np.tensordot(windows, w, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
        return np.ascontiguousarray(out), (xp.shape, windows)

    @staticmethod
    def backward(g, inputs, out, cache, attrs, needs):
        x, w = inputs
        stride = int(attrs.get("stride", 1))
        pad = int(attrs.get("padding", 0))
        padded_shape, windows = cache
        kh, kw = w.shape[2:]
        ho, wo = g.shape[2:]

        gw = np.tensordot(g, windows, axes=([0, 2, 3], [0, 2, 3])) if needs[1] else None

        gx = None
        if needs[0]:
            gxp = np.zeros(padded_shape)
            for i in range(kh):
                for j in range(kw):
                    contrib = np.tensordot(g, w[:, :, i, j], axes=([1], [0])).transpose(0, 3, 1, 2)
                    gxp[:, :, i : i + stride * (ho - 1) + 1 : stride, j : j + stride * (wo - 1) + 1 : stride] += contrib
            gx = gxp[:, :, pad : pad + x.shape[2], pad : pad + x.shape[3]] if pad else gxp
        return [gx, gw]


@register("max_pool2d", 1)
class _MaxPool2d:
    """Non-overlapping k×k max pooling; ties route to the first row-major maximum."""

    @staticmethod
    def _blocks(x: np.ndarray, k: int) -> np.ndarray:
        n, c, h, w = x.shape
        return x.reshape(n, c, h // k, k, w // k, k).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h // k, w // k, k * k)

    @staticmethod
    def forward(inputs, attrs):
        (x,) = inputs
        k = int(attrs.get("size", 2))
        if x.ndim != 4 or x.shape[2] % k or x.shape[3] % k:
            raise ShapeMismatchError("max_pool2d", f"{x.shape} not divisible into {k}x{k} blocks")
        blocks = _MaxPool2d._blocks(x, k)
        idx = np.argmax(blocks, axis=-1)
        out = np.take_along_axis(blocks, idx[..., None], axis=-1)[..., 0]
        return out, idx

    @staticmethod
    def backward(g, inputs, out, idx, attrs, needs):
        (x,) = inputs
        k = int(attrs.get("size", 2))
        n, c, h, w = x.shape
        routed = np.zeros((n, c, h // k, w // k, k * k))
        np.put_along_axis(routed, idx[..., None], g[..., None], axis=-1)
        gx = routed.reshape(n, c, h // k, w // k, k, k).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h, w)
        return [gx]


@register("layer_norm", 3)
class _LayerNorm:
    """Normalise over the last axis: inputs x (..., D), gamma (D,), beta (D,)."""

    @staticmethod
    def forward(inputs, attrs):
        x, gamma, beta = inputs
        d = x.shape[-1]
        if gamma.shape != (d,) or beta.shape != (d,):
            raise ShapeMismatchError("layer_norm", f"gamma {gamma.shape}/beta {beta.shape} vs feature dim {d}")
        eps = float(attrs.get("eps", 1e-5))
        mu = x.mean(axis=-1, keepdims=True)
        centered = x - mu
        var = (centered * centered).mean(axis=-1, keepdims=True)
        inv = 1.0 / np.sqrt(var + eps)
        xhat = centered * inv
        return xhat * gamma + beta, (xhat, inv)

    @staticmethod
    def backward(g, inputs, out, cache, attrs, needs):
        x, gamma, beta = inputs
        xhat, inv = cache
        lead = tuple(range(x.ndim - 1))
        ggamma = (g * xhat).sum(axis=lead) if needs[1] else None
        gbeta = g.sum(axis=lead) if needs[2] else None
        gx = None
        if needs[0]:
            dxhat = g * gamma
            gx = inv * (
                dxhat
                - dxhat.mean(axis=-1, keepdims=True)
                - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
            )
        return [gx, ggamma, gbeta]


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


@register("softmax_cross_entropy", 1)
class _SoftmaxCrossEntropy:
    """Cross-entropy of logits (B, K) against attrs['labels']; mean or sum over the batch."""

    @staticmethod
    def forward(inputs, attrs):
        (z,) = inputs
        labels = np.asarray(attrs["labels"], dtype=np.int64)
        if z.ndim != 2 or labels.shape != (z.shape[0],):
            raise ShapeMismatchError("softmax_cross_entropy", f"logits {z.shape} vs labels {labels.shape}")
        if labels.size and (labels.min() < 0 or labels.max() >= z.shape[1]):
            raise ShapeMismatchError("softmax_cross_entropy", f"labels outside [0, {z.shape[1]})")
        m = z.max(axis=-1, keepdims=True)
        lse = np.log(np.exp(z - m).sum(axis=-1, keepdims=True)) + m
        logp = z - lse
        per_sample = -logp[np.arange(z.shape[0]), labels]
        total = per_sample.sum() if attrs.get("reduction", "mean") == "sum" else per_sample.mean()
        return np.asarray(total), np.exp(logp)

    @staticmethod
    def backward(g, inputs, out, probs, attrs, needs):
        (z,) = inputs
        labels = np.asarray(attrs["labels"], dtype=np.int64)
        d = probs.copy()
        d[np.arange(z.shape[0]), labels] -= 1.0
        if attrs.get("reduction", "mean") != "sum":
            d /= z.shape[0]
        return [d * g]


@register("attention", 3)
class _Attention:
    """Single-head scaled dot-product attention over (B, T, D) queries/keys/values."""

    @staticmethod
    def forward(inputs, attrs):
        q, k, v = inputs
        if q.ndim != 3 or q.shape != k.shape or k.shape[:2] != v.shape[:2]:
            raise ShapeMismatchError("attention", f"q {q.shape}, k {k.shape}, v {v.shape}")
        scale = 1.0 / np.sqrt(q.shape[-1])
        weights = _softmax(np.matmul(q, np.swapaxes(k, -1, -2)) * scale)
        return np.matmul(weights, v), (weights, scale)

    @staticmethod
    def backward(g, inputs, out, cache, attrs, needs):
        q, k, v = inputs
        weights, scale = cache
        gv = np.matmul(np.swapaxes(weights, -1, -2), g) if needs[2] else None
        gw = np.matmul(g, np.swapaxes(v, -1, -2))
        gs = weights * (gw - (gw * weights).sum(axis=-1, keepdims=True)) * scale
        gq = np.matmul(gs, k) if needs[0] else None
        gk = np.matmul(np.swapaxes(gs, -1, -2), q) if needs[1] else None
        return [gq, gk, gv]
