import numpy as np
import pytest

from src.engine.errors import EmptySetError, InvalidShapeError, ShapeMismatchError
from src.harness.datasets import Split, synth_dataset
from src.nets.architectures import patchify, token_count
from src.nets.classifier import evaluate, forward_logits, init_model, loss_ce, predict
from src.nets.models import Architecture, LabeledBatch, ModelParams
from src.engine.tensor import Tensor


@pytest.mark.parametrize("arch", list(Architecture))
def test_init_is_deterministic(arch):
    a = init_model(arch, (3, 8, 8), 4, seed=11)
    b = init_model(arch, (3, 8, 8), 4, seed=11)
    assert a.weights.keys() == b.weights.keys()
    for name in a.weights:
        np.testing.assert_array_equal(a.weights[name], b.weights[name])


def test_different_seeds_differ():
    a = init_model("tiny_convnet", (3, 8, 8), 4, seed=1)
    b = init_model("tiny_convnet", (3, 8, 8), 4, seed=2)
    assert not np.array_equal(a.weights["conv1.w"], b.weights["conv1.w"])


def test_attention_token_count():
    assert token_count((3, 32, 32)) == 64
    params = init_model("tiny_attn", (3, 32, 32), 10, seed=0)
    assert params.weights["pos"].shape == (64, 64)


@pytest.mark.parametrize(
    "arch,shape,classes",
    [
        ("tiny_convnet", (3, 4, 4), 4),
        ("tiny_convnet", (3, 12, 12), 4),
        ("tiny_attn", (3, 10, 10), 4),
        ("linear", (3, 8, 8), 1),
    ],
)
def test_invalid_shapes_rejected(arch, shape, classes):
    with pytest.raises(InvalidShapeError):
        init_model(arch, shape, classes, seed=0)


def test_weights_are_frozen(convnet_model):
    with pytest.raises(ValueError):
        convnet_model.weights["head.w"][0, 0] = 1.0


def test_wrong_weight_shape_rejected(linear_model):
    bad = dict(linear_model.weights)
    bad["head.w"] = np.zeros((3, 3))
    with pytest.raises(ValueError):
        linear_model.replace_weights(bad)


@pytest.mark.parametrize("model", ["linear_model", "convnet_model", "attn_model"])
def test_logits_shape_and_batch_independence(model, small_dataset, request):
    params: ModelParams = request.getfixturevalue(model)
    batch = small_dataset.images[:8]
    logits = forward_logits(params, batch).data
    assert logits.shape == (8, 4)
    assert np.all(np.isfinite(logits))
    single = forward_logits(params, batch[3:4]).data
    np.testing.assert_allclose(single[0], logits[3], atol=1e-9)


def test_permutation_permutes_rows(attn_model, small_dataset):
    batch = small_dataset.images[:6]
    perm = np.array([5, 2, 0, 1, 4, 3])
    logits = forward_logits(attn_model, batch).data
    np.testing.assert_allclose(forward_logits(attn_model, batch[perm]).data, logits[perm], atol=1e-9)


def test_zero_image_gives_equal_convnet_logits(convnet_model):
    logits = forward_logits(convnet_model, np.zeros((1, 3, 8, 8))).data
    np.testing.assert_allclose(logits, logits[0, 0], atol=1e-9)


def test_position_embeddings_break_patch_permutation_invariance(attn_model, rng):
    x = rng.uniform(size=(1, 3, 8, 8))
    # swap the top-left and bottom-right 4x4 patches
    swapped = x.copy()
    swapped[..., :4, :4], swapped[..., 4:, 4:] = x[..., 4:, 4:], x[..., :4, :4]

    plain = forward_logits(attn_model, x, position_embeddings=False).data
    plain_swapped = forward_logits(attn_model, swapped, position_embeddings=False).data
    np.testing.assert_allclose(plain, plain_swapped, atol=1e-9)

    with_pos = forward_logits(attn_model, x).data
    with_pos_swapped = forward_logits(attn_model, swapped).data
    assert not np.allclose(with_pos, with_pos_swapped, atol=1e-9)


def test_patchify_orders_tokens_row_major():
    x = np.arange(1 * 1 * 8 * 8, dtype=float).reshape(1, 1, 8, 8)
    tokens = patchify(Tensor(x)).data
    assert tokens.shape == (1, 4, 16)
    np.testing.assert_array_equal(tokens[0, 1], x[0, 0, :4, 4:].reshape(-1))


def test_forward_rejects_wrong_shape(linear_model):
    with pytest.raises(ShapeMismatchError):
        forward_logits(linear_model, np.zeros((2, 3, 16, 16)))


def test_labeled_batch_validates():
    with pytest.raises(ValueError):
        LabeledBatch(images=np.full((2, 3, 8, 8), 1.5), labels=np.array([0, 1]))
    with pytest.raises(ValueError):
        LabeledBatch(images=np.zeros((2, 3, 8, 8)), labels=np.array([0]))
    batch = LabeledBatch(images=np.zeros((2, 3, 8, 8)), labels=np.array([0, 1]))
    assert len(batch) == 2


def test_labeled_batch_accepts_plain_lists():
    batch = LabeledBatch(images=np.zeros((2, 3, 8, 8)).tolist(), labels=[0, 1])
    assert batch.images.dtype == np.float64
    assert batch.labels.tolist() == [0, 1]


@pytest.mark.parametrize("arch", list(Architecture))
def test_untrained_accuracy_is_near_chance(arch):
    data = synth_dataset(seed=11, n=200, num_classes=4, shape=(3, 8, 8), split=Split.TEST)
    accs = [evaluate(init_model(arch, data.shape, 4, seed=s), data) for s in range(10)]
    assert 0.15 <= np.mean(accs) <= 0.35


def test_uniform_logits_loss_is_log_classes():
    loss = loss_ce(Tensor(np.zeros((3, 5))), np.array([0, 1, 4])).item()
    assert loss == pytest.approx(np.log(5), abs=1e-12)


def test_confident_logits_loss_below_log_classes():
    logits = np.zeros((1, 4))
    logits[0, 2] = 3.0
    assert 0.0 <= loss_ce(Tensor(logits), np.array([2])).item() < np.log(4)


def test_evaluate_matches_argmax_labels(convnet_model, small_dataset):
    preds = predict(convnet_model, small_dataset.images)
    relabeled = LabeledBatch(images=small_dataset.images, labels=preds)
    assert evaluate(convnet_model, relabeled) == 1.0


def test_evaluate_single_misclassified(linear_model, small_dataset):
    x = small_dataset.images[:1]
    wrong = (predict(linear_model, x) + 1) % 4
    batch = LabeledBatch(images=x, labels=wrong)
    assert evaluate(linear_model, batch) == 0.0


def test_evaluate_is_side_effect_free_and_thread_independent(convnet_model, small_dataset):
    a = evaluate(convnet_model, small_dataset)
    b = evaluate(convnet_model, small_dataset, threads=3)
    assert a == b == evaluate(convnet_model, small_dataset)


def test_evaluate_empty_raises(linear_model):
    with pytest.raises(EmptySetError):
        evaluate(linear_model, LabeledBatch(images=np.zeros((0, 3, 8, 8)), labels=np.zeros(0)))


def test_predict_ties_go_to_lowest_class(linear_model):
    zeroed = linear_model.replace_weights({name: np.zeros_like(w) for name, w in linear_model.weights.items()})
    np.testing.assert_array_equal(predict(zeroed, np.zeros((3, 3, 8, 8))), [0, 0, 0])
