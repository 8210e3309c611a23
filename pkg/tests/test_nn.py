import math

import numpy as np
import pytest

from claimcheck.errors import CheckpointError, ShapeError
from claimcheck.nn import (
    AdamWState,
    Parameter,
    StepSchedule,
    Tape,
    adamw_step,
    add,
    concat,
    cross_entropy,
    gcn_layer,
    glorot_uniform,
    grad_check,
    linear,
    load_checkpoint,
    masked_softmax,
    matmul,
    mean_rows,
    normalized_adjacency,
    relu,
    save_checkpoint,
    scale,
    scaled_dot_attention,
    softmax,
    step_lr,
)

from oracles import dense_attention, dense_gcn

RNG = np.random.default_rng(1234)


def weighted_sum(tape, t, weights=None):
    """sum(t * linspace weights) as a scalar tape node."""
    from claimcheck.nn import reshape

    if weights is None:
        weights = np.linspace(0.5, 1.5, t.data.size).reshape((t.data.size, 1))
    flat = reshape(t, (1, t.data.size))
    return reshape(matmul(flat, t.tape.tensor(weights)), ())


class TestLinear:
    def test_identity(self):
        tape = Tape()
        x = tape.tensor(RNG.standard_normal((3, 4)))
        w = tape.tensor(np.eye(4))
        b = tape.tensor(np.zeros((1, 4)))
        y = linear(x, w, b)
        assert np.allclose(y.data, x.data)

    def test_rows_processed_independently(self):
        tape = Tape()
        x1 = RNG.standard_normal((2, 3))
        x2 = x1.copy()
        x2[1] += 10.0
        w = RNG.standard_normal((3, 2))
        b = RNG.standard_normal((1, 2))
        y1 = linear(tape.tensor(x1), tape.tensor(w), tape.tensor(b))
        y2 = linear(tape.tensor(x2), tape.tensor(w), tape.tensor(b))
        assert np.allclose(y1.data[0], y2.data[0])

    def test_gradients_vs_finite_differences(self):
        x0 = RNG.standard_normal((3, 4))
        w0 = RNG.standard_normal((4, 2))
        b0 = RNG.standard_normal((1, 2))

        def fn(tape, leaves):
            x, w, b = leaves
            return weighted_sum(tape, linear(x, w, b))

        assert grad_check(fn, [x0, w0, b0], h=1e-5) <= 1e-6

    def test_shape_mismatch(self):
        tape = Tape()
        with pytest.raises(ShapeError):
            matmul(tape.tensor(np.ones((2, 3))), tape.tensor(np.ones((4, 2))))


class TestSoftmaxAndCrossEntropy:
    def test_symmetric_two_logits(self):
        tape = Tape()
        y = softmax(tape.tensor(np.array([[0.0, 0.0]])))
        assert np.allclose(y.data, [[0.5, 0.5]])

    def test_rows_sum_to_one(self):
        tape = Tape()
        y = softmax(tape.tensor(RNG.standard_normal((5, 7))))
        assert np.allclose(y.data.sum(axis=1), 1.0, atol=1e-12)

    def test_cross_entropy_analytic(self):
        tape = Tape()
        probs = tape.tensor(np.array([0.5, 0.5]))
        loss = cross_entropy(probs, 0)
        assert float(loss.data) == pytest.approx(math.log(2.0))

    def test_softmax_ce_composite_gradient_is_probs_minus_onehot(self):
        tape = Tape()
        logits = tape.tensor(RNG.standard_normal((1, 4)))
        probs = softmax(logits)
        loss = cross_entropy(probs, 2)
        tape.backward(loss)
        onehot = np.zeros((1, 4))
        onehot[0, 2] = 1.0
        assert np.allclose(logits.grad, probs.data - onehot, atol=1e-12)

    def test_softmax_ce_gradient_vs_finite_differences(self):
        z0 = RNG.standard_normal((1, 5))

        def fn(tape, leaves):
            return cross_entropy(softmax(leaves[0]), 3)

        assert grad_check(fn, [z0], h=1e-6) <= 1e-6

    def test_invalid_target(self):
        tape = Tape()
        probs = softmax(tape.tensor(np.zeros((1, 3))))
        with pytest.raises(ShapeError):
            cross_entropy(probs, 5)

    def test_invalid_axis(self):
        tape = Tape()
        with pytest.raises(ShapeError):
            softmax(tape.tensor(np.zeros((2, 2))), axis=3)


class TestAttention:
    def test_uniform_attention_when_keys_identical(self):
        tape = Tape()
        q = tape.tensor(RNG.standard_normal((1, 3)))
        k = tape.tensor(np.tile(RNG.standard_normal(3), (4, 1)))
        v = tape.tensor(RNG.standard_normal((4, 2)))
        out = scaled_dot_attention(q, k, v)
        assert np.allclose(out.data, v.data.mean(axis=0, keepdims=True), atol=1e-12)

    def test_hand_case_against_dense_oracle(self):
        q = np.array([[0.3, -0.7]])
        k = np.array([[1.0, 0.5], [-0.2, 0.9]])
        v = np.array([[2.0, 0.0, 1.0], [0.5, -1.0, 3.0]])
        tape = Tape()
        out = scaled_dot_attention(tape.tensor(q), tape.tensor(k), tape.tensor(v))
        assert np.allclose(out.data, dense_attention(q, k, v), atol=1e-12)

    def test_oracle_equivalence_random(self):
        for _ in range(30):
            n_q, n_k, d, dv = RNG.integers(1, 6, size=4)
            q = RNG.standard_normal((n_q, d))
            k = RNG.standard_normal((n_k, d))
            v = RNG.standard_normal((n_k, dv))
            tape = Tape()
            out = scaled_dot_attention(tape.tensor(q), tape.tensor(k), tape.tensor(v))
            assert np.allclose(out.data, dense_attention(q, k, v), atol=1e-10)

    def test_output_in_convex_hull_of_values(self):
        tape = Tape()
        v_data = RNG.standard_normal((6, 3))
        out = scaled_dot_attention(
            tape.tensor(RNG.standard_normal((2, 4))),
            tape.tensor(RNG.standard_normal((6, 4))),
            tape.tensor(v_data),
        )
        assert np.all(out.data <= v_data.max(axis=0) + 1e-12)
        assert np.all(out.data >= v_data.min(axis=0) - 1e-12)

    def test_all_parameter_gradient_check(self):
        q0 = RNG.standard_normal((2, 3))
        k0 = RNG.standard_normal((4, 3))
        v0 = RNG.standard_normal((4, 2))

        def fn(tape, leaves):
            return weighted_sum(tape, scaled_dot_attention(*leaves))

        assert grad_check(fn, [q0, k0, v0], h=1e-5) <= 1e-5

    def test_masked_attention_zeroes_fully_masked_query(self):
        tape = Tape()
        q = tape.tensor(RNG.standard_normal((1, 3)))
        k = tape.tensor(RNG.standard_normal((2, 3)))
        v = tape.tensor(RNG.standard_normal((2, 2)))
        out = scaled_dot_attention(q, k, v, mask=np.array([False, False]))
        assert np.allclose(out.data, 0.0)

    def test_masked_attention_matches_submatrix(self):
        q = RNG.standard_normal((1, 3))
        k = RNG.standard_normal((4, 3))
        v = RNG.standard_normal((4, 2))
        mask = np.array([True, False, True, True])
        tape = Tape()
        out = scaled_dot_attention(tape.tensor(q), tape.tensor(k), tape.tensor(v), mask=mask)
        assert np.allclose(out.data, dense_attention(q, k[mask], v[mask]), atol=1e-12)

    def test_masked_softmax_gradcheck(self):
        mask = np.array([[True, True, False, True]])
        x0 = RNG.standard_normal((1, 4))

        def fn(tape, leaves):
            return weighted_sum(tape, masked_softmax(leaves[0], mask))

        assert grad_check(fn, [x0], h=1e-6) <= 1e-6

    def test_shape_validation(self):
        tape = Tape()
        with pytest.raises(ShapeError):
            scaled_dot_attention(
                tape.tensor(np.ones((1, 3))),
                tape.tensor(np.ones((2, 4))),
                tape.tensor(np.ones((2, 2))),
            )
        with pytest.raises(ShapeError):
            scaled_dot_attention(
                tape.tensor(np.ones((1, 3))),
                tape.tensor(np.ones((2, 3))),
                tape.tensor(np.ones((3, 2))),
            )


class TestGcn:
    def test_single_node_no_edges_is_plain_linear(self):
        tape = Tape()
        x = tape.tensor(RNG.standard_normal((1, 4)))
        w = tape.tensor(RNG.standard_normal((4, 2)))
        out = gcn_layer(x, np.zeros((1, 1)), w)
        assert np.allclose(out.data, x.data @ w.data, atol=1e-12)

    def test_two_nodes_one_edge_average(self):
        tape = Tape()
        x_data = RNG.standard_normal((2, 3))
        w_data = RNG.standard_normal((3, 2))
        a = np.array([[0.0, 1.0], [1.0, 0.0]])
        out = gcn_layer(tape.tensor(x_data), a, tape.tensor(w_data))
        expected_row = ((x_data[0] + x_data[1]) / 2.0) @ w_data
        assert np.allclose(out.data[0], expected_row, atol=1e-12)
        assert np.allclose(out.data[1], expected_row, atol=1e-12)

    def test_edgeless_graph_is_per_node_linear(self):
        tape = Tape()
        x = tape.tensor(RNG.standard_normal((5, 3)))
        w = tape.tensor(RNG.standard_normal((3, 4)))
        out = gcn_layer(x, np.zeros((5, 5)), w)
        assert np.allclose(out.data, x.data @ w.data, atol=1e-12)

    def random_adjacency(self, n, rng):
        a = np.triu((rng.random((n, n)) < 0.4).astype(float), k=1)
        return a + a.T

    def test_random_graphs_match_dense_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(30):
            n = int(rng.integers(1, 13))
            f, c = int(rng.integers(1, 6)), int(rng.integers(1, 6))
            x = rng.standard_normal((n, f))
            w = rng.standard_normal((f, c))
            a = self.random_adjacency(n, rng)
            tape = Tape()
            out = gcn_layer(tape.tensor(x), a, tape.tensor(w))
            assert np.allclose(out.data, dense_gcn(x, a, w), atol=1e-10)

    def test_gradient_check(self):
        rng = np.random.default_rng(3)
        a = self.random_adjacency(5, rng)
        x0 = rng.standard_normal((5, 3))
        w0 = rng.standard_normal((3, 2))

        def fn(tape, leaves):
            return weighted_sum(tape, gcn_layer(leaves[0], a, leaves[1]))

        assert grad_check(fn, [x0, w0], h=1e-5) <= 1e-5

    def test_non_symmetric_rejected(self):
        tape = Tape()
        a = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(ValueError):
            gcn_layer(tape.tensor(np.ones((2, 2))), a, tape.tensor(np.ones((2, 2))))

    def test_nonzero_diagonal_rejected(self):
        with pytest.raises(ValueError):
            normalized_adjacency(np.eye(3))

    def test_self_loop_keeps_degree_positive(self):
        norm = normalized_adjacency(np.zeros((4, 4)))
        assert np.allclose(norm, np.eye(4))


class TestTapeMechanics:
    def test_gradient_accumulates_over_reused_tensor(self):
        tape = Tape()
        x = tape.tensor(np.array([[1.0, 2.0]]))
        y = add(x, x)
        loss = weighted_sum(tape, y, weights=np.ones((2, 1)))
        tape.backward(loss)
        assert np.allclose(x.grad, 2.0 * np.ones((1, 2)))

    def test_param_links_accumulate_into_parameter(self):
        p = Parameter("w", np.array([[1.0], [2.0]]))
        for _ in range(3):
            tape = Tape()
            w = tape.param(p)
            loss = weighted_sum(tape, w, weights=np.ones((2, 1)))
            tape.backward(loss)
        assert np.allclose(p.grad, 3.0 * np.ones((2, 1)))
        p.zero_grad()
        assert np.allclose(p.grad, 0.0)

    def test_backward_seed_scales_gradients(self):
        p = Parameter("w", np.array([[4.0]]))
        tape = Tape()
        w = tape.param(p)
        loss = weighted_sum(tape, w, weights=np.ones((1, 1)))
        tape.backward(loss, seed=0.25)
        assert np.allclose(p.grad, 0.25)

    def test_non_scalar_backward_rejected(self):
        tape = Tape()
        x = tape.tensor(np.ones((2, 2)))
        with pytest.raises(ShapeError):
            tape.backward(x)

    def test_cross_tape_operands_rejected(self):
        t1, t2 = Tape(), Tape()
        with pytest.raises(ValueError):
            add(t1.tensor(np.ones(2)), t2.tensor(np.ones(2)))

    def test_concat_mean_relu_scale_gradcheck(self):
        a0 = RNG.standard_normal((2, 3))
        b0 = RNG.standard_normal((4, 3))

        def fn(tape, leaves):
            joined = concat(leaves, axis=0)
            return weighted_sum(tape, mean_rows(relu(scale(joined, 1.7))))

        assert grad_check(fn, [a0, b0], h=1e-6) <= 1e-5


class TestAdamW:
    def make_param(self, value):
        return Parameter("p", np.array(value, dtype=np.float64))

    def test_zero_gradient_pure_decay(self):
        p = self.make_param([[2.0, -3.0]])
        state = AdamWState(schedule=StepSchedule(0.5), weight_decay=0.01)
        before = p.data.copy()
        adamw_step([p], state, lr=0.5)
        assert np.allclose(p.data, before * (1.0 - 0.5 * 0.01), atol=1e-15)

    def test_first_step_closed_form(self):
        lr, eps, wd = 0.1, 1e-8, 0.01
        p = self.make_param([[1.0]])
        p.grad[...] = 1.0
        state = AdamWState(schedule=StepSchedule(lr), eps=eps, weight_decay=wd)
        adamw_step([p], state, lr=lr)
        # bias-corrected m_hat = v_hat = 1 after one unit-gradient step
        expected = 1.0 - lr * (1.0 / (1.0 + eps) + wd * 1.0)
        assert float(p.data[0, 0]) == pytest.approx(expected, abs=1e-15)

    def test_moments_shaped_like_parameters(self):
        p = Parameter("w", np.zeros((3, 2)))
        state = AdamWState(schedule=StepSchedule(0.1))
        adamw_step([p], state, lr=0.1)
        assert state.m["w"].shape == (3, 2)
        assert state.v["w"].shape == (3, 2)
        assert state.step == 1

    def test_step_lr_boundary(self):
        sched = StepSchedule(1e-4, boundary=100, factor=0.1)
        assert step_lr(sched, 99) == pytest.approx(1e-4)
        assert step_lr(sched, 100) == pytest.approx(1e-5)
        assert step_lr(sched, 150) == pytest.approx(1e-5)
        assert step_lr(StepSchedule(1e-4), 500) == pytest.approx(1e-4)

    def test_shape_mismatch_rejected(self):
        p = Parameter("w", np.zeros((2, 2)))
        p.grad = np.zeros((3, 3))
        with pytest.raises(ValueError):
            adamw_step([p], AdamWState(schedule=StepSchedule(0.1)), lr=0.1)


class TestCheckpoint:
    def test_round_trip(self, tmp_path):
        params = [
            Parameter("layer.w", RNG.standard_normal((3, 4))),
            Parameter("layer.b", RNG.standard_normal(4)),
            Parameter("scalar", np.array(2.5)),
        ]
        path = tmp_path / "head.ckpt"
        save_checkpoint(params, path, meta={"kind": "test", "dim": 4})
        meta, arrays = load_checkpoint(path)
        assert meta == {"kind": "test", "dim": 4}
        for p in params:
            assert np.array_equal(arrays[p.name], p.data)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "x.ckpt"
        path.write_bytes(b"JUNKJUNKJUNK")
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_unknown_version(self, tmp_path):
        path = tmp_path / "v.ckpt"
        save_checkpoint([Parameter("a", np.ones(2))], path)
        data = bytearray(path.read_bytes())
        data[4:8] = (9).to_bytes(4, "little")
        path.write_bytes(bytes(data))
        with pytest.raises(CheckpointError):
            load_checkpoint(path)


def test_glorot_bounds():
    rng = np.random.default_rng(0)
    w = glorot_uniform(rng, 10, 20)
    limit = (6.0 / 30.0) ** 0.5
    assert w.shape == (10, 20)
    assert np.all(np.abs(w) <= limit)
