# pyright: strict

from dataclasses import dataclass
from typing import Callable

import numpy as np

from spikefraud.core import ops
from spikefraud.core.ops import LifParams
from spikefraud.core.tensor import Array, Tape, Tensor, backward
from spikefraud.errors import DimensionError, InputError
from test.datasets import datasets
from test.test_case import TestCase


RELAXED = LifParams(beta=0.8, theta=0.5, sigma=2.0, relaxed=True)


def _check_gradients(
    test: TestCase,
    build: Callable[[Tape | None], Tensor],
    leaves: list[Tensor],
) -> None:
    """Compare tape gradients of a scalar graph with central differences."""

    tape = Tape()
    backward(tape, build(tape))

    for leaf in leaves:
        expected = ops.numerical_gradient(lambda: build(None).item(), leaf, step=1e-6)
        assert leaf.grad is not None
        test.assertArrayClose(leaf.grad.reshape(-1), expected, rtol=1e-4, atol=1e-7)


class TestConv1d(TestCase):

    def test_forward_values(self) -> None:
        # Arrange
        x = Tensor([[1.0, 2.0, 3.0, 4.0]])
        w = Tensor([[[1.0, -1.0]]])
        b = Tensor([0.5])

        # Act
        y = ops.conv1d(x, w, b)

        # Assert
        self.assertArrayEqual(y.data, [[-0.5, -0.5, -0.5]])

    def test_batched_output_shape(self) -> None:
        # Arrange
        rng = np.random.default_rng(0)
        x = Tensor(rng.standard_normal((5, 3, 10)))
        w = Tensor(rng.standard_normal((4, 3, 2)))
        b = Tensor(np.zeros(4))

        # Act
        y = ops.conv1d(x, w, b)

        # Assert
        self.assertEqual(y.shape, (5, 4, 9))

    def test_gradients_match_finite_differences(self) -> None:
        # Arrange
        rng = np.random.default_rng(1)
        x = Tensor(rng.standard_normal((2, 3, 6)), requires_grad=True)
        w = Tensor(rng.standard_normal((4, 3, 2)), requires_grad=True)
        b = Tensor(rng.standard_normal(4), requires_grad=True)
        weights = rng.standard_normal((2, 4, 5))

        def build(tape: Tape | None) -> Tensor:
            y = ops.conv1d(x, w, b, tape)
            return ops.tensor_sum(_weighted(y, weights, tape), tape=tape)

        # Act & Assert
        _check_gradients(self, build, [x, w, b])

    @dataclass
    class ShapeErrorDataset:
        x_shape: tuple[int, ...]
        w_shape: tuple[int, ...]
        b_shape: tuple[int, ...]

    @datasets({
        'channel mismatch': ShapeErrorDataset((2, 5), (1, 3, 2), (1,)),
        'bias mismatch': ShapeErrorDataset((3, 5), (2, 3, 2), (3,)),
        'input shorter than kernel': ShapeErrorDataset((1, 1), (1, 1, 2), (1,)),
        'weight rank': ShapeErrorDataset((1, 5), (1, 2), (1,)),
    })
    def test_shape_errors(self, dataset: ShapeErrorDataset) -> None:
        # Arrange
        x = Tensor(np.zeros(dataset.x_shape))
        w = Tensor(np.zeros(dataset.w_shape))
        b = Tensor(np.zeros(dataset.b_shape))

        # Act & Assert
        with self.assertRaises(DimensionError):
            ops.conv1d(x, w, b)


def _weighted(y: Tensor, weights: Array, tape: Tape | None) -> Tensor:
    """`y * weights` built from recorded ops so every output gets its own adjoint."""

    flat = ops.reshape(y, (y.size,), tape)
    w = Tensor(np.diag(weights.reshape(-1)))
    return ops.linear(flat, w, Tensor(np.zeros(y.size)), tape)


class TestMaxpool1d(TestCase):

    def test_forward_drops_odd_tail(self) -> None:
        # Arrange
        x = Tensor([[1.0, 3.0, 2.0, 0.0, 9.0]])

        # Act
        y = ops.maxpool1d(x)

        # Assert
        self.assertArrayEqual(y.data, [[3.0, 2.0]])

    def test_gradient_routes_to_maximum(self) -> None:
        # Arrange
        tape = Tape()
        x = Tensor([[1.0, 3.0, 2.0, 0.0, 9.0]], requires_grad=True)
        total = ops.tensor_sum(ops.maxpool1d(x, tape), tape=tape)

        # Act
        backward(tape, total)

        # Assert
        self.assertArrayEqual(x.grad, [[0.0, 1.0, 1.0, 0.0, 0.0]])  # pyright: ignore[reportArgumentType]

    def test_ties_go_to_earlier_index(self) -> None:
        # Arrange
        tape = Tape()
        x = Tensor([[2.0, 2.0]], requires_grad=True)
        total = ops.tensor_sum(ops.maxpool1d(x, tape), tape=tape)

        # Act
        backward(tape, total)

        # Assert
        self.assertArrayEqual(x.grad, [[1.0, 0.0]])  # pyright: ignore[reportArgumentType]

    def test_too_short_raises(self) -> None:
        # Act & Assert
        with self.assertRaises(DimensionError):
            ops.maxpool1d(Tensor([[1.0]]))


class TestLinear(TestCase):

    def test_forward_values(self) -> None:
        # Arrange
        x = Tensor([1.0, 2.0])
        w = Tensor([[1.0, 1.0], [2.0, -1.0], [0.0, 3.0]])
        b = Tensor([0.0, 1.0, -1.0])

        # Act
        y = ops.linear(x, w, b)

        # Assert
        self.assertArrayEqual(y.data, [3.0, 1.0, 5.0])

    def test_gradients_match_finite_differences(self) -> None:
        # Arrange
        rng = np.random.default_rng(2)
        x = Tensor(rng.standard_normal((3, 4)), requires_grad=True)
        w = Tensor(rng.standard_normal((2, 4)), requires_grad=True)
        b = Tensor(rng.standard_normal(2), requires_grad=True)
        weights = rng.standard_normal((3, 2))

        def build(tape: Tape | None) -> Tensor:
            return ops.tensor_sum(_weighted(ops.linear(x, w, b, tape), weights, tape), tape=tape)

        # Act & Assert
        _check_gradients(self, build, [x, w, b])

    def test_width_mismatch_raises(self) -> None:
        # Act & Assert
        with self.assertRaises(DimensionError):
            ops.linear(Tensor([1.0, 2.0, 3.0]), Tensor(np.zeros((2, 2))), Tensor(np.zeros(2)))


class TestLif(TestCase):

    @dataclass
    class StepDataset:
        current: float
        u_prev: float
        s_prev: float
        expected_membrane: float
        expected_spike: float

    @datasets({
        'below threshold': StepDataset(0.2, 0.0, 0.0, 0.2, 0.0),
        'reaches threshold': StepDataset(0.5, 0.0, 0.0, 0.5, 1.0),
        'leak accumulates': StepDataset(0.3, 0.5, 0.0, 0.7, 1.0),
        'subtractive reset': StepDataset(0.3, 0.5, 1.0, 0.2, 0.0),
    })
    def test_step(self, dataset: StepDataset) -> None:
        # Arrange
        p = LifParams(beta=0.8, theta=0.5, sigma=10.0)

        # Act
        spikes, membrane = ops.lif_step(
            Tensor([dataset.current]),
            Tensor([dataset.u_prev]),
            Tensor([dataset.s_prev]),
            p,
        )

        # Assert
        self.assertArrayClose(membrane.data, [dataset.expected_membrane])
        self.assertArrayEqual(spikes.data, [dataset.expected_spike])

    def test_surrogate_peaks_on_threshold(self) -> None:
        # Arrange
        p = LifParams(beta=0.5, theta=1.0, sigma=4.0)

        # Act
        grad = ops.surrogate_grad(Tensor([1.0, 1.5, 0.5]), p)

        # Assert
        self.assertArrayClose(grad.data, [1.0, 1.0 / 9.0, 1.0 / 9.0])

    def test_spike_gradient_is_surrogate(self) -> None:
        # Arrange
        p = LifParams(beta=0.5, theta=1.0, sigma=4.0)
        tape = Tape()
        current = Tensor([1.5], requires_grad=True)
        zeros = Tensor([0.0])
        spikes, _ = ops.lif_step(current, zeros, zeros, p, tape)

        # Act
        backward(tape, ops.tensor_sum(spikes, tape=tape))

        # Assert
        self.assertArrayClose(current.grad, [1.0 / 9.0])  # pyright: ignore[reportArgumentType]

    @datasets({
        'integrates below threshold': StepDataset(0.2, 0.5, 0.0, 0.65, 0.0),
        'crosses threshold': StepDataset(0.6, 0.5, 0.0, 1.05, 1.0),
        'reset after spike': StepDataset(0.0, 1.0, 1.0, -0.1, 0.0),
    })
    def test_unit_threshold_steps(self, dataset: StepDataset) -> None:
        # Arrange
        p = LifParams(beta=0.9, theta=1.0, sigma=10.0)

        # Act
        spikes, membrane = ops.lif_step(
            Tensor([dataset.current]),
            Tensor([dataset.u_prev]),
            Tensor([dataset.s_prev]),
            p,
        )

        # Assert
        self.assertArrayClose(membrane.data, [dataset.expected_membrane], rtol=0.0, atol=1e-12)
        self.assertArrayEqual(spikes.data, [dataset.expected_spike])

    def test_trace_matches_recurrence(self) -> None:
        # Arrange
        p = LifParams(beta=0.9, theta=1.0, sigma=10.0)
        currents = [0.6, 0.6, 0.0, 0.9, 0.2]
        u = s = Tensor([0.0])
        expected_u = expected_s = 0.0
        expected: list[tuple[float, float]] = []
        for current in currents:
            expected_u = 0.9 * expected_u + current - expected_s
            expected_s = 1.0 if expected_u >= 1.0 else 0.0
            expected.append((expected_u, expected_s))

        # Act
        trace: list[tuple[float, float]] = []
        for current in currents:
            s, u = ops.lif_step(Tensor([current]), u, s, p)
            trace.append((float(u.data[0]), float(s.data[0])))

        # Assert
        for (u_value, s_value), (expected_u, expected_s) in zip(trace, expected):
            self.assertAlmostEqual(u_value, expected_u, delta=1e-12)
            self.assertEqual(s_value, expected_s)

    def test_membrane_gradient_through_previous_state_is_beta(self) -> None:
        # Arrange
        p = LifParams(beta=0.9, theta=1.0, sigma=10.0)
        tape = Tape()
        u_prev = Tensor([0.3, 1.7], requires_grad=True)
        s_prev = Tensor([0.0, 1.0], requires_grad=True)
        _, membrane = ops.lif_step(Tensor([0.4, 0.2]), u_prev, s_prev, p, tape)

        # Act
        backward(tape, ops.tensor_sum(membrane, tape=tape))

        # Assert
        self.assertArrayClose(u_prev.grad, [0.9, 0.9], rtol=0.0, atol=1e-12)  # pyright: ignore[reportArgumentType]
        self.assertArrayClose(s_prev.grad, [-1.0, -1.0], rtol=0.0, atol=1e-12)  # pyright: ignore[reportArgumentType]

    def test_unrolled_relaxed_gradients_match_finite_differences(self) -> None:
        # Arrange
        rng = np.random.default_rng(3)
        currents = [Tensor(rng.uniform(0.0, 1.0, 4), requires_grad=True) for _ in range(3)]

        def build(tape: Tape | None) -> Tensor:
            u = s = Tensor(np.zeros(4))
            total: Tensor | None = None
            for current in currents:
                s, u = ops.lif_step(current, u, s, RELAXED, tape)
                total = s if total is None else ops.add(total, s, tape)
            assert total is not None
            return ops.tensor_sum(total, tape=tape)

        # Act & Assert
        _check_gradients(self, build, currents)

    @dataclass
    class InvalidParamsDataset:
        beta: float
        theta: float
        sigma: float

    @datasets({
        'beta 0': InvalidParamsDataset(0.0, 1.0, 1.0),
        'beta 1': InvalidParamsDataset(1.0, 1.0, 1.0),
        'theta 0': InvalidParamsDataset(0.5, 0.0, 1.0),
        'sigma negative': InvalidParamsDataset(0.5, 1.0, -1.0),
    })
    def test_invalid_params(self, dataset: InvalidParamsDataset) -> None:
        # Act & Assert
        with self.assertRaises(InputError):
            LifParams(beta=dataset.beta, theta=dataset.theta, sigma=dataset.sigma)

    def test_state_shape_mismatch_raises(self) -> None:
        # Arrange
        p = LifParams(beta=0.5, theta=1.0, sigma=1.0)

        # Act & Assert
        with self.assertRaises(DimensionError):
            ops.lif_step(Tensor([1.0, 2.0]), Tensor([0.0]), Tensor([0.0, 0.0]), p)


class TestWeightedCe(TestCase):

    def test_equal_counts_give_log_two(self) -> None:
        # Act
        loss = ops.weighted_ce(Tensor([3.0, 3.0]), 1, (1.0, 1.0))

        # Assert
        self.assertAlmostEqual(loss.item(), float(np.log(2.0)))

    def test_weight_scales_loss(self) -> None:
        # Arrange
        counts = Tensor([[1.0, 4.0], [2.0, 0.0]])
        labels = np.array([1, 0], dtype=np.int64)

        # Act
        plain = ops.weighted_ce(counts, labels, (1.0, 1.0))
        weighted = ops.weighted_ce(counts, labels, (2.0, 2.0))

        # Assert
        self.assertAlmostEqual(weighted.item(), 2.0 * plain.item())

    def test_gradients_match_finite_differences(self) -> None:
        # Arrange
        rng = np.random.default_rng(4)
        counts = Tensor(rng.uniform(0.0, 5.0, (4, 2)), requires_grad=True)
        labels = np.array([0, 1, 1, 0], dtype=np.int64)

        def build(tape: Tape | None) -> Tensor:
            return ops.weighted_ce(counts, labels, (0.6, 3.0), tape)

        # Act & Assert
        _check_gradients(self, build, [counts])

    @dataclass
    class InvalidDataset:
        counts: list[list[float]]
        labels: list[int]
        weights: tuple[float, ...]
        expected_error: type[Exception]

    @datasets({
        'label 2': InvalidDataset([[1.0, 2.0]], [2], (1.0, 1.0), InputError),
        'zero weight': InvalidDataset([[1.0, 2.0]], [0], (0.0, 1.0), InputError),
        'three weights': InvalidDataset([[1.0, 2.0]], [0], (1.0, 1.0, 1.0), DimensionError),
        'three classes': InvalidDataset([[1.0, 2.0, 3.0]], [0], (1.0, 1.0), DimensionError),
        'label count': InvalidDataset([[1.0, 2.0], [1.0, 2.0]], [0], (1.0, 1.0), DimensionError),
    })
    def test_invalid_arguments(self, dataset: InvalidDataset) -> None:
        # Act & Assert
        with self.assertRaises(dataset.expected_error):
            ops.weighted_ce(Tensor(dataset.counts), np.array(dataset.labels), dataset.weights)


class TestPopulationSum(TestCase):

    def test_halves_vote_for_each_class(self) -> None:
        # Act
        counts = ops.population_sum(Tensor([[1.0, 0.0, 1.0, 1.0, 0.0, 1.0]]))

        # Assert
        self.assertArrayEqual(counts.data, [[2.0, 2.0]])

    def test_odd_population_raises(self) -> None:
        # Act & Assert
        with self.assertRaises(DimensionError):
            ops.population_sum(Tensor([1.0, 0.0, 1.0]))
