import struct

import numpy as np
import pytest

from src.engine.errors import CheckpointError
from src.nets.checkpoint import MAGIC, deserialize, load_checkpoint, save_checkpoint, serialize


def test_round_trip_is_bit_identical(tmp_path, attn_model):
    path = save_checkpoint(attn_model, tmp_path / "attn.ckpt")
    loaded = load_checkpoint(path, expect_arch="tiny_attn", expect_shape=(3, 8, 8))
    assert loaded.arch is attn_model.arch
    assert loaded.num_classes == attn_model.num_classes
    for name, w in attn_model.weights.items():
        assert loaded.weights[name].tobytes() == w.tobytes()


def test_serialization_is_deterministic(convnet_model):
    assert serialize(convnet_model) == serialize(convnet_model)
    assert serialize(convnet_model).startswith(MAGIC)


def test_bad_magic(convnet_model):
    raw = b"NOTACKPT" + serialize(convnet_model)[8:]
    with pytest.raises(CheckpointError, match="magic"):
        deserialize(raw)


def test_truncated(convnet_model):
    with pytest.raises(CheckpointError):
        deserialize(serialize(convnet_model)[:-5])


def test_trailing_bytes(convnet_model):
    with pytest.raises(CheckpointError):
        deserialize(serialize(convnet_model) + b"\x00")


def test_arch_mismatch(tmp_path, linear_model):
    path = save_checkpoint(linear_model, tmp_path / "linear.ckpt")
    with pytest.raises(CheckpointError, match="arch"):
        load_checkpoint(path, expect_arch="tiny_convnet")


def test_shape_mismatch(tmp_path, linear_model):
    path = save_checkpoint(linear_model, tmp_path / "linear.ckpt")
    with pytest.raises(CheckpointError, match="shape"):
        load_checkpoint(path, expect_shape=(3, 32, 32))


def test_missing_file(tmp_path):
    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "nope.ckpt")


@pytest.mark.parametrize("offset,value", [(18, 1), (26, 4)])
def test_header_outside_architecture_limits(linear_model, offset, value):
    # linear tag: 8 magic + 2 version + 2 length + 6 bytes, then num_classes and C, H, W
    raw = bytearray(serialize(linear_model))
    raw[offset : offset + 4] = struct.pack("<I", value)
    with pytest.raises(CheckpointError):
        deserialize(bytes(raw))
