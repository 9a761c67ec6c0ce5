"""Shared fixtures: seeded generators, tiny datasets and models, finite differences."""

from __future__ import annotations

from typing import Callable

import numpy as np
import pytest

from src.engine.tensor import GradTape, Tensor, forward_op, grad
from src.harness.datasets import Split, synth_dataset
from src.nets.classifier import init_model

SMALL_SHAPE = (3, 8, 8)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def small_dataset():
    """48 synthetic 3×8×8 images, 4 balanced classes."""
    return synth_dataset(seed=5, n=48, num_classes=4, shape=SMALL_SHAPE, split=Split.TEST)


@pytest.fixture
def linear_model():
    return init_model("linear", SMALL_SHAPE, num_classes=4, seed=0)


@pytest.fixture
def convnet_model():
    return init_model("tiny_convnet", SMALL_SHAPE, num_classes=4, seed=0)


@pytest.fixture
def attn_model():
    return init_model("tiny_attn", SMALL_SHAPE, num_classes=4, seed=0)


def numerical_grad(f: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """Central differences of a scalar function, one coordinate at a time."""
    x = np.array(x, dtype=np.float64)
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        up = f(x)
        flat[i] = orig - h
        down = f(x)
        flat[i] = orig
        gflat[i] = (up - down) / (2 * h)
    return g


def op_gradcheck(op: str, inputs: list[np.ndarray], attrs: dict | None = None, seed: int = 0) -> None:
    """Analytic vs. central-difference gradients of sum(op(inputs) ⊙ R) for every input."""
    attrs = attrs or {}
    out_shape = forward_op(op, inputs, attrs).shape
    projection = np.random.default_rng(seed).standard_normal(out_shape)

    def scalar(values: list[np.ndarray]) -> float:
        return float(np.sum(forward_op(op, values, attrs).data * projection))

    with GradTape() as tape:
        watched = [tape.watch(x) for x in inputs]
        loss = (forward_op(op, watched, attrs) * Tensor(projection)).sum()
    analytic = grad(loss, watched)

    for i, x in enumerate(inputs):
        def f(xi: np.ndarray, i: int = i) -> float:
            values = list(inputs)
            values[i] = xi
            return scalar(values)

        numeric = numerical_grad(f, x)
        np.testing.assert_allclose(analytic[i], numeric, rtol=1e-3, atol=1e-6, err_msg=f"{op} input {i}")
