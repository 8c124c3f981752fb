import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teamcurriculum.approximator import (
    GradientSet,
    NonFiniteError,
    OptimizerState,
    QNetwork,
    apply_update,
    backward,
    backward_batch,
    clone_parameters,
    copy_into,
    deserialize,
    forward,
    n_parameters,
    serialize,
)


def loop_forward(net, x):
    """Scalar-loop oracle: relu hidden layers, identity output."""
    h = [float(v) for v in x]
    n_layers = len(net.weights)
    for li, (w, b) in enumerate(zip(net.weights, net.biases)):
        out = []
        for j in range(w.shape[0]):
            z = b[j] + sum(w[j, k] * h[k] for k in range(w.shape[1]))
            out.append(max(z, 0.0) if li < n_layers - 1 else z)
        h = out
    return np.array(h)


class TestForward:
    def test_zero_network_outputs_zero(self):
        net = QNetwork.zeros((44, 64, 64, 6))
        np.testing.assert_array_equal(forward(net, np.ones(44)), np.zeros(6))

    def test_identity_linear_layer(self):
        net = QNetwork((3, 3), [np.eye(3)], [np.zeros(3)])
        x = np.array([1.0, -2.0, 0.5])
        np.testing.assert_array_equal(forward(net, x), x)

    def test_linear_layer_with_bias(self):
        w = np.array([[1.0, 2.0], [0.0, -1.0]])
        net = QNetwork((2, 2), [w], [np.array([0.5, 0.25])])
        np.testing.assert_allclose(forward(net, np.array([1.0, 1.0])), [3.5, -0.75])

    def test_relu_only_on_hidden_layers(self):
        net = QNetwork((1, 1, 1), [np.array([[-1.0]]), np.array([[1.0]])], [np.zeros(1), np.array([-3.0])])
        # hidden relu(-x) = 0 for x > 0, output identity keeps the negative bias
        assert forward(net, np.array([2.0]))[0] == -3.0

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_loop_oracle(self, seed):
        rng = np.random.default_rng(seed)
        net = QNetwork.init((7, 9, 5, 4), rng)
        x = rng.normal(size=7)
        np.testing.assert_allclose(forward(net, x), loop_forward(net, x), rtol=1e-12, atol=1e-12)

    def test_batch_matches_rows(self):
        rng = np.random.default_rng(0)
        net = QNetwork.init((5, 8, 3), rng)
        xs = rng.normal(size=(6, 5))
        batch = forward(net, xs)
        for i in range(6):
            np.testing.assert_allclose(batch[i], forward(net, xs[i]), rtol=1e-12, atol=1e-14)

    def test_wrong_input_length(self):
        with pytest.raises(ValueError, match="length 4"):
            forward(QNetwork.zeros((5, 3)), np.zeros(4))

    def test_init_range_and_size(self):
        net = QNetwork.init((44, 64, 64, 6), np.random.default_rng(0))
        assert net.flat.size == n_parameters((44, 64, 64, 6)) == 44 * 64 + 64 + 64 * 64 + 64 + 64 * 6 + 6
        for w, b in zip(net.weights, net.biases):
            bound = 1.0 / math.sqrt(w.shape[1])
            assert np.abs(w).max() <= bound and np.abs(b).max() <= bound


class TestBackward:
    def test_single_linear_weight(self):
        # loss (y - w x)^2 -> d/dw = -2 (y - w x) x
        w, x, y = 0.7, 1.5, 2.0
        net = QNetwork((1, 1), [np.array([[w]])], [np.zeros(1)])
        loss, g = backward(net, np.array([x]), 0, y)
        assert loss == pytest.approx((y - w * x) ** 2)
        assert g.weights[0][0, 0] == pytest.approx(-2 * (y - w * x) * x)
        assert g.biases[0][0] == pytest.approx(-2 * (y - w * x))

    def test_target_equal_to_q_gives_zero(self):
        net = QNetwork.init((4, 5, 3), np.random.default_rng(0))
        x = np.ones(4)
        loss, g = backward(net, x, 2, forward(net, x)[2])
        assert loss == 0.0 and not g.flat.any()

    def test_forward_is_pure(self):
        net = QNetwork.init((4, 5, 3), np.random.default_rng(0))
        before = serialize(net)
        forward(net, np.ones(4))
        backward(net, np.ones(4), 0, 1.0)
        assert serialize(net) == before

    def test_only_chosen_action_carries_error(self):
        net = QNetwork((2, 3), [np.ones((3, 2))], [np.zeros(3)])
        _, g = backward(net, np.array([1.0, 1.0]), 1, 0.0)
        assert np.all(g.weights[0][[0, 2]] == 0.0) and np.all(g.weights[0][1] != 0.0)

    def test_finite_differences_100_configs(self):
        h = 1e-5
        rng = np.random.default_rng(123)
        worst = 0.0
        for _ in range(100):
            depth = int(rng.integers(1, 4))
            dims = tuple(int(d) for d in rng.integers(2, 7, size=depth + 1))
            net = QNetwork.init(dims, rng)
            batch = int(rng.integers(1, 4))
            obs = rng.normal(size=(batch, dims[0]))
            acts = rng.integers(dims[-1], size=batch)
            targets = rng.normal(size=batch)
            _, grads = backward_batch(net, obs, acts, targets)
            numeric = np.empty_like(net.flat)
            for i in range(net.flat.size):
                old = net.flat[i]
                net.flat[i] = old + h
                up, _ = backward_batch(net, obs, acts, targets)
                net.flat[i] = old - h
                down, _ = backward_batch(net, obs, acts, targets)
                net.flat[i] = old
                numeric[i] = (up - down) / (2 * h)
            scale = max(np.linalg.norm(grads.flat), np.linalg.norm(numeric), 1e-12)
            worst = max(worst, np.linalg.norm(grads.flat - numeric) / scale)
        assert worst < 1e-4

    def test_mismatched_lengths(self):
        net = QNetwork.zeros((2, 2))
        with pytest.raises(ValueError):
            backward_batch(net, np.zeros((2, 2)), np.array([0]), np.array([0.0, 1.0]))
        with pytest.raises(ValueError):
            backward(net, np.zeros(2), 2, 0.0)


class TestOptimizers:
    def test_sgd_step(self):
        net = QNetwork((1, 1), [np.array([[1.0]])], [np.zeros(1)])
        opt = OptimizerState.for_network(net, "sgd", lr=0.1)
        grads = GradientSet(net.layer_dims)
        grads.weights[0][0, 0] = 2.0
        apply_update(net, opt, grads)
        assert net.weights[0][0, 0] == pytest.approx(0.8)

    def test_zero_gradient_leaves_parameters(self):
        net = QNetwork.init((4, 3, 2), np.random.default_rng(0))
        before = net.flat.copy()
        for algo in ("sgd", "adam"):
            apply_update(net, OptimizerState.for_network(net, algo), GradientSet(net.layer_dims))
        np.testing.assert_array_equal(net.flat, before)

    def test_adam_matches_textbook_scalar_reference(self):
        def textbook(w, target, steps, lr=1e-3, b1=0.9, b2=0.999, eps=1e-8):
            m = v = 0.0
            out = []
            for t in range(1, steps + 1):
                g = 2 * (w - target)
                m = b1 * m + (1 - b1) * g
                v = b2 * v + (1 - b2) * g * g
                w -= lr * (m / (1 - b1**t)) / (math.sqrt(v / (1 - b2**t)) + eps)
                out.append(w)
            return out

        net = QNetwork((1, 1), [np.array([[0.5]])], [np.zeros(1)])
        opt = OptimizerState.for_network(net, "adam")
        reference = textbook(0.5, 1.0, 2000)
        grads = GradientSet(net.layer_dims)
        for ref in reference:
            grads.weights[0][0, 0] = 2 * (net.weights[0][0, 0] - 1.0)
            apply_update(net, opt, grads)
            assert net.weights[0][0, 0] == pytest.approx(ref, rel=1e-9, abs=1e-12)
        assert abs(net.weights[0][0, 0] - 1.0) < 1e-3
        assert net.biases[0][0] == 0.0

    @pytest.mark.parametrize("bad", [np.nan, np.inf])
    def test_non_finite_gradient_rejected(self, bad):
        net = QNetwork.init((3, 2), np.random.default_rng(0))
        before = net.flat.copy()
        grads = GradientSet(net.layer_dims)
        grads.biases[0][1] = bad
        with pytest.raises(NonFiniteError, match=r"\[1\]"):
            apply_update(net, OptimizerState.for_network(net), grads)
        np.testing.assert_array_equal(net.flat, before)

    def test_unknown_optimizer(self):
        with pytest.raises(ValueError):
            OptimizerState.for_network(QNetwork.zeros((2, 2)), "rmsprop")


class TestCopies:
    def test_clone_is_independent(self):
        net = QNetwork.init((3, 4, 2), np.random.default_rng(0))
        twin = clone_parameters(net)
        x = np.array([0.3, -1.0, 2.0])
        np.testing.assert_array_equal(forward(twin, x), forward(net, x))
        assert serialize(twin) == serialize(net)
        out = forward(twin, x)
        net.flat += 1.0
        np.testing.assert_array_equal(forward(twin, x), out)

    def test_copy_into(self):
        a = QNetwork.init((3, 2), np.random.default_rng(0))
        b = QNetwork.zeros((3, 2))
        copy_into(b, a)
        np.testing.assert_array_equal(a.flat, b.flat)
        with pytest.raises(ValueError):
            copy_into(QNetwork.zeros((3, 3)), a)

    def test_views_share_flat(self):
        net = QNetwork.zeros((2, 3, 1))
        net.flat[:] = np.arange(net.flat.size)
        assert net.weights[0][0, 1] == 1.0
        assert net.biases[0][0] == 6.0

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.integers(1, 9), min_size=2, max_size=4), st.integers(0, 2**32 - 1))
    def test_serialization_round_trip(self, dims, seed):
        net = QNetwork.init(tuple(dims), np.random.default_rng(seed))
        blob = serialize(net)
        back = deserialize(blob)
        assert back.layer_dims == net.layer_dims
        np.testing.assert_array_equal(back.flat, net.flat)
        assert serialize(back) == blob

    def test_header_layout(self):
        blob = serialize(QNetwork.zeros((2, 3)))
        assert blob[:4] == b"QNET"
        assert int.from_bytes(blob[4:8], "little") == 1
        assert int.from_bytes(blob[8:12], "little") == 2
        assert len(blob) == 12 + 8 + 8 * 9

    def test_corrupt_snapshots(self):
        blob = serialize(QNetwork.zeros((2, 3)))
        with pytest.raises(ValueError, match="magic"):
            deserialize(b"XNET" + blob[4:])
        with pytest.raises(ValueError, match="version"):
            deserialize(blob[:4] + (2).to_bytes(4, "little") + blob[8:])
        with pytest.raises(ValueError):
            deserialize(blob[:-8])
