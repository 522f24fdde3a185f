# pyright: strict

import numpy as np

from spikefraud.core.optim import AdamState, adam_step
from spikefraud.errors import InputError
from test.test_case import TestCase


class TestAdamStep(TestCase):

    def test_first_step_moves_by_learning_rate(self) -> None:
        # Arrange
        params = {'w': np.array([1.0, -1.0])}
        grads = {'w': np.array([0.5, -2.0])}

        # Act
        updated, state = adam_step(params, grads, AdamState(), lr=0.01, beta1=0.9, beta2=0.999)

        # Assert
        # bias corrected moments make the first step sign(grad) * lr
        self.assertArrayClose(updated['w'], [0.99, -0.99], rtol=1e-6)
        self.assertEqual(state.step, 1)

    def test_inputs_are_not_mutated(self) -> None:
        # Arrange
        params = {'w': np.array([1.0])}
        grads = {'w': np.array([1.0])}
        state = AdamState()

        # Act
        adam_step(params, grads, state, lr=0.1, beta1=0.9, beta2=0.99)

        # Assert
        self.assertArrayEqual(params['w'], [1.0])
        self.assertEqual(state.step, 0)
        self.assertEqual(state.first_moments, {})

    def test_weight_retention_scales_parameters(self) -> None:
        # Arrange
        params = {'w': np.array([2.0]), 'b': np.array([4.0])}
        grads = {'w': np.array([0.0])}

        # Act
        updated, _ = adam_step(params, grads, AdamState(), lr=0.1, beta1=0.9, beta2=0.99, weight=0.5)

        # Assert
        self.assertArrayClose(updated['w'], [1.0])
        self.assertArrayClose(updated['b'], [2.0])

    def test_descends_a_quadratic(self) -> None:
        # Arrange
        params = {'w': np.array([3.0])}
        state = AdamState()

        # Act
        for _ in range(500):
            grads = {'w': 2.0 * params['w']}
            params, state = adam_step(params, grads, state, lr=0.05, beta1=0.9, beta2=0.999)

        # Assert
        self.assertLess(abs(float(params['w'][0])), 0.1)

    def test_invalid_settings_raise(self) -> None:
        # Arrange
        params = {'w': np.array([1.0])}

        # Act & Assert
        with self.assertRaises(InputError):
            adam_step(params, params, AdamState(), lr=0.0, beta1=0.9, beta2=0.99)
        with self.assertRaises(InputError):
            adam_step(params, params, AdamState(), lr=0.1, beta1=1.0, beta2=0.99)
