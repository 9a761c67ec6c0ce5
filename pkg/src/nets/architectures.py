"""Weight layouts and forward passes for the desk-scale classifiers.

tiny_convnet: 3 × (conv3×3 pad 1 → relu → maxpool 2×2), channels 16/32/64, dense head.
tiny_attn:    4×4 patch embedding, learned position embeddings, 2 pre-LN blocks
              (single-head attention, width 64, relu MLP ×2), final LN, mean-pool head.
linear:       flatten → dense.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from src.engine.errors import InvalidShapeError
from src.engine.tensor import Tensor, forward_op
from src.nets.models import Architecture

CONV_CHANNELS = (16, 32, 64)
PATCH = 4
WIDTH = 64
MLP_HIDDEN = 128
DEPTH = 2


@dataclass(frozen=True)
class WeightSpec:
    shape: tuple[int, ...]
    fan_in: int
    init: str  # "uniform" | "zeros" | "ones"


def _dense(specs: dict, name: str, fan_in: int, fan_out: int) -> None:
    specs[f"{name}.w"] = WeightSpec((fan_in, fan_out), fan_in, "uniform")
    specs[f"{name}.b"] = WeightSpec((fan_out,), fan_in, "zeros")


def _norm(specs: dict, name: str, dim: int) -> None:
    specs[f"{name}.g"] = WeightSpec((dim,), dim, "ones")
    specs[f"{name}.b"] = WeightSpec((dim,), dim, "zeros")


def weight_specs(
    arch: Architecture | str,
    input_shape: tuple[int, int, int],
    num_classes: int,
) -> dict[str, WeightSpec]:
    """Every named weight an architecture needs for this input shape."""
    arch = Architecture(arch)
    c, h, w = input_shape
    if h < 8 or w < 8 or c < 1:
        raise InvalidShapeError(f"input shape {input_shape}: need C >= 1 and H, W >= 8")
    if num_classes < 2:
        raise InvalidShapeError(f"num_classes must be >= 2, got {num_classes}")

    specs: dict[str, WeightSpec] = {}
    if arch is Architecture.TINY_CONVNET:
        if h % 8 or w % 8:
            raise InvalidShapeError(f"tiny_convnet needs H, W divisible by 8 (three 2x2 pools), got {h}x{w}")
        in_ch = c
        for i, out_ch in enumerate(CONV_CHANNELS, 1):
            fan_in = in_ch * 9
            specs[f"conv{i}.w"] = WeightSpec((out_ch, in_ch, 3, 3), fan_in, "uniform")
            specs[f"conv{i}.b"] = WeightSpec((out_ch,), fan_in, "zeros")
            in_ch = out_ch
        _dense(specs, "head", in_ch * (h // 8) * (w // 8), num_classes)

    elif arch is Architecture.TINY_ATTN:
        if h % PATCH or w % PATCH:
            raise InvalidShapeError(f"tiny_attn needs H, W divisible by patch size {PATCH}, got {h}x{w}")
        tokens = (h // PATCH) * (w // PATCH)
        _dense(specs, "patch", c * PATCH * PATCH, WIDTH)
        specs["pos"] = WeightSpec((tokens, WIDTH), WIDTH, "uniform")
        for i in range(DEPTH):
            p = f"blocks.{i}"
            _norm(specs, f"{p}.ln1", WIDTH)
            for proj in ("wq", "wk", "wv", "wo"):
                specs[f"{p}.attn.{proj}"] = WeightSpec((WIDTH, WIDTH), WIDTH, "uniform")
            _norm(specs, f"{p}.ln2", WIDTH)
            _dense(specs, f"{p}.mlp1", WIDTH, MLP_HIDDEN)
            _dense(specs, f"{p}.mlp2", MLP_HIDDEN, WIDTH)
        _norm(specs, "ln_f", WIDTH)
        _dense(specs, "head", WIDTH, num_classes)

    else:
        _dense(specs, "head", c * h * w, num_classes)

    return specs


def token_count(input_shape: tuple[int, int, int]) -> int:
    _, h, w = input_shape
    return (h // PATCH) * (w // PATCH)


# ── forward passes ───────────────────────────────────────────────────────────

Weights = Mapping[str, Tensor]


def _affine(x: Tensor, weights: Weights, name: str) -> Tensor:
    return x @ weights[f"{name}.w"] + weights[f"{name}.b"]


def _convnet(weights: Weights, x: Tensor, **_) -> Tensor:
    n = x.shape[0]
    for i, out_ch in enumerate(CONV_CHANNELS, 1):
        x = forward_op("conv2d", [x, weights[f"conv{i}.w"]], {"stride": 1, "padding": 1})
        x = x + weights[f"conv{i}.b"].reshape(out_ch, 1, 1)
        x = forward_op("max_pool2d", [x.relu()], {"size": 2})
    return _affine(x.reshape(n, -1), weights, "head")


def _layer_norm(x: Tensor, weights: Weights, name: str) -> Tensor:
    return forward_op("layer_norm", [x, weights[f"{name}.g"], weights[f"{name}.b"]])


def patchify(x: Tensor) -> Tensor:
    """(N, C, H, W) → (N, T, C·P·P) with tokens in row-major patch order."""
    n, c, h, w = x.shape
    x = x.reshape(n, c, h // PATCH, PATCH, w // PATCH, PATCH)
    x = x.transpose(0, 2, 4, 1, 3, 5)
    return x.reshape(n, (h // PATCH) * (w // PATCH), c * PATCH * PATCH)


def _attention_net(weights: Weights, x: Tensor, position_embeddings: bool = True, **_) -> Tensor:
    h = _affine(patchify(x), weights, "patch")
    if position_embeddings:
        h = h + weights["pos"]

    for i in range(DEPTH):
        p = f"blocks.{i}"
        z = _layer_norm(h, weights, f"{p}.ln1")
        q = z @ weights[f"{p}.attn.wq"]
        k = z @ weights[f"{p}.attn.wk"]
        v = z @ weights[f"{p}.attn.wv"]
        h = h + forward_op("attention", [q, k, v]) @ weights[f"{p}.attn.wo"]

        z = _layer_norm(h, weights, f"{p}.ln2")
        h = h + _affine(_affine(z, weights, f"{p}.mlp1").relu(), weights, f"{p}.mlp2")

    pooled = _layer_norm(h, weights, "ln_f").mean(axis=1)
    return _affine(pooled, weights, "head")


def _linear(weights: Weights, x: Tensor, **_) -> Tensor:
    return _affine(x.reshape(x.shape[0], -1), weights, "head")


FORWARD: dict[Architecture, Callable[..., Tensor]] = {
    Architecture.TINY_CONVNET: _convnet,
    Architecture.TINY_ATTN: _attention_net,
    Architecture.LINEAR: _linear,
}


def initial_weights(specs: Mapping[str, WeightSpec], seed: int) -> dict[str, np.ndarray]:
    """Fan-in-scaled uniform init U(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases 0, norm gains 1."""
    rng = np.random.default_rng(seed)
    weights = {}
    for name in sorted(specs):
        spec = specs[name]
        if spec.init == "zeros":
            weights[name] = np.zeros(spec.shape)
        elif spec.init == "ones":
            weights[name] = np.ones(spec.shape)
        else:
            bound = 1.0 / np.sqrt(spec.fan_in)
            weights[name] = rng.uniform(-bound, bound, size=spec.shape)
    return weights
