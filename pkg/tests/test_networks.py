import numpy as np
import pytest

from app.models.networks import (
    AdamState,
    Head,
    MlpNet,
    adam_step,
    flat_params,
    hard_copy,
    load_checkpoint,
    save_checkpoint,
    soft_update,
)
from app.utils.errors import InputValidationError, OutputError
from app.utils.numerics import RngStream

MIXED_HEADS = (Head(1, "linear"), Head(1, "sigmoid"), Head(1, "phase"))


def randomized(np_rng, widths, heads=None) -> MlpNet:
    net = MlpNet(widths, heads)
    for p in net.params:
        p[...] = np_rng.normal(0.0, 0.5, p.shape)
    return net


def numeric_gradients(net, x, upstream, step=1e-6):
    grads = []
    for p in net.params:
        grad = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            original = p[idx]
            p[idx] = original + step
            plus = np.sum(upstream * net.forward(x))
            p[idx] = original - step
            minus = np.sum(upstream * net.forward(x))
            p[idx] = original
            grad[idx] = (plus - minus) / (2 * step)
        grads.append(grad)
    return grads


def relative_error(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(a) + np.linalg.norm(b), 1e-12)


def test_zero_network_outputs_zero():
    net = MlpNet([3, 4, 2])
    np.testing.assert_array_equal(net.forward(np.array([1.0, -2.0, 3.0])), [0.0, 0.0])
    sigmoid = MlpNet([3, 2], (Head(2, "sigmoid"),))
    np.testing.assert_array_equal(sigmoid.forward(np.ones(3)), [0.5, 0.5])


def test_identity_layer():
    net = MlpNet([2, 2])
    net.weights[0][...] = np.eye(2)
    x = np.array([[0.3, -1.7], [2.0, 0.0]])
    np.testing.assert_array_equal(net.forward(x), x)


def test_hand_computed_forward():
    net = MlpNet([2, 2, 1])
    net.weights[0][...] = [[1.0, -1.0], [2.0, 0.5]]
    net.biases[0][...] = [0.1, -0.2]
    net.weights[1][...] = [[0.5], [-1.5]]
    net.biases[1][...] = [0.3]
    assert net.forward(np.array([1.0, 2.0]))[0] == pytest.approx(2.85, abs=1e-12)


def test_output_heads_ranges(np_rng):
    net = randomized(np_rng, [4, 8, 3], MIXED_HEADS)
    out = net.forward(np_rng.normal(0, 3, (200, 4)))
    assert np.all((out[:, 1] > 0) & (out[:, 1] < 1))
    assert np.all((out[:, 2] >= 0) & (out[:, 2] <= 2 * np.pi))


def test_backprop_matches_finite_differences(np_rng):
    for _ in range(100):
        net = randomized(np_rng, [3, 6, 3], MIXED_HEADS)
        x = np_rng.normal(0, 1, (4, 3))
        upstream = np_rng.normal(0, 1, (4, 3))
        grads, input_grad = net.backprop(x, upstream)
        for analytic, numeric in zip(grads, numeric_gradients(net, x, upstream)):
            assert relative_error(analytic, numeric) < 1e-4

        numeric_input = np.zeros_like(x)
        for idx in np.ndindex(x.shape):
            shifted = x.copy()
            shifted[idx] += 1e-6
            plus = np.sum(upstream * net.forward(shifted))
            shifted[idx] -= 2e-6
            minus = np.sum(upstream * net.forward(shifted))
            numeric_input[idx] = (plus - minus) / 2e-6
        assert relative_error(input_grad, numeric_input) < 1e-4


def test_zero_upstream_gives_zero_gradients(np_rng):
    net = randomized(np_rng, [3, 5, 2])
    grads, input_grad = net.backprop(np.ones(3), np.zeros(2))
    assert all(not np.any(g) for g in grads)
    assert not np.any(input_grad)


def test_linear_layer_gradient_is_outer_product(np_rng):
    net = randomized(np_rng, [3, 2])
    x = np.array([1.0, -2.0, 0.5])
    upstream = np.array([0.3, -0.7])
    (grad_W, grad_b), input_grad = net.backprop(x, upstream)
    np.testing.assert_allclose(grad_W, np.outer(x, upstream))
    np.testing.assert_allclose(grad_b, upstream)
    np.testing.assert_allclose(input_grad, net.weights[0] @ upstream)


def test_shape_mismatch_raises(np_rng):
    net = randomized(np_rng, [3, 5, 2])
    with pytest.raises(InputValidationError):
        net.forward(np.ones(4))
    with pytest.raises(InputValidationError):
        net.backprop(np.ones(3), np.ones(3))
    with pytest.raises(InputValidationError):
        MlpNet([3, 2], (Head(3),))


def test_initialization_is_seeded():
    a = MlpNet([4, 8, 2], rng=RngStream(5, 1))
    b = MlpNet([4, 8, 2], rng=RngStream(5, 1))
    np.testing.assert_array_equal(flat_params(a), flat_params(b))
    assert np.abs(a.weights[-1]).max() <= 3e-3
    assert a.n_params == 4 * 8 + 8 + 8 * 2 + 2


def test_copy_is_independent(np_rng):
    net = randomized(np_rng, [2, 3, 1])
    clone = net.copy()
    clone.weights[0][0, 0] += 1.0
    assert net.weights[0][0, 0] != clone.weights[0][0, 0]
    assert clone.same_architecture(net)


def test_adam_zero_gradient_keeps_parameters():
    params = [np.array([1.0, -2.0])]
    adam_step(params, [np.zeros(2)], AdamState(), lr=0.1)
    np.testing.assert_array_equal(params[0], [1.0, -2.0])


def test_adam_first_step_is_signed_learning_rate():
    params = [np.array([1.0, 1.0, 1.0])]
    adam_step(params, [np.array([0.3, -2.0, 1e-3])], AdamState(), lr=0.01)
    np.testing.assert_allclose(params[0], [0.99, 1.01, 0.99], rtol=1e-6)


def test_adam_two_hand_steps():
    lr, b1, b2, eps = 0.1, 0.9, 0.999, 1e-8
    params = [np.array([1.0])]
    state = AdamState.like(params)
    expected, m, v = 1.0, 0.0, 0.0
    for t, g in enumerate((0.5, -0.25), start=1):
        adam_step(params, [np.array([g])], state, lr=lr)
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        expected -= lr * (m / (1 - b1**t)) / (np.sqrt(v / (1 - b2**t)) + eps)
    assert state.t == 2
    assert params[0][0] == pytest.approx(expected, abs=1e-12)


def test_soft_update_extremes_and_average(np_rng):
    online = randomized(np_rng, [3, 4, 2])
    target = randomized(np_rng, [3, 4, 2])
    before = flat_params(target).copy()

    soft_update(target, online, 0.0)
    np.testing.assert_array_equal(flat_params(target), before)

    soft_update(target, online, 0.5)
    np.testing.assert_allclose(flat_params(target), 0.5 * (before + flat_params(online)))

    hard_copy(target, online)
    np.testing.assert_array_equal(flat_params(target), flat_params(online))


def test_soft_update_distance_shrinks(np_rng):
    online = randomized(np_rng, [3, 4, 2])
    target = randomized(np_rng, [3, 4, 2])
    distances = []
    for _ in range(50):
        soft_update(target, online, 0.05)
        distances.append(np.linalg.norm(flat_params(target) - flat_params(online)))
    assert all(b <= a for a, b in zip(distances, distances[1:]))


def test_soft_update_rejects_mismatch(np_rng):
    with pytest.raises(InputValidationError):
        soft_update(MlpNet([3, 4, 2]), MlpNet([3, 5, 2]), 0.1)
    with pytest.raises(InputValidationError):
        soft_update(MlpNet([3, 2]), MlpNet([3, 2]), 1.5)


def test_checkpoint_round_trip(np_rng, tmp_path):
    net = randomized(np_rng, [3, 6, 3], MIXED_HEADS)
    path = save_checkpoint(net, tmp_path / "actor.bin")
    header = path.read_bytes().split(b"\n", 1)[0].decode("ascii")
    assert header == "irs-odrl-mlp v1 widths=3,6,3 heads=linear:1,sigmoid:1,phase:1"

    restored = load_checkpoint(path)
    assert restored.same_architecture(net)
    np.testing.assert_array_equal(flat_params(restored), flat_params(net))
    x = np_rng.normal(0, 1, (5, 3))
    np.testing.assert_array_equal(restored.forward(x), net.forward(x))


def test_checkpoint_rejects_bad_files(tmp_path):
    bad_header = tmp_path / "bad.bin"
    bad_header.write_bytes(b"something-else v1 widths=2,1 heads=linear:1\n")
    with pytest.raises(InputValidationError):
        load_checkpoint(bad_header)

    truncated = tmp_path / "short.bin"
    truncated.write_bytes(b"irs-odrl-mlp v1 widths=2,1 heads=linear:1\n" + bytes(8))
    with pytest.raises(InputValidationError):
        load_checkpoint(truncated)


def test_checkpoint_unwritable_path(tmp_path):
    with pytest.raises(OutputError):
        save_checkpoint(MlpNet([2, 1]), tmp_path / "missing" / "net.bin")
