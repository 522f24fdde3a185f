# pyright: strict

from typing import Callable, Iterable, Sequence

import numpy as np
import numpy.typing as npt

from spikefraud.errors import InputError


Array = npt.NDArray[np.float64]

# maps the gradient of a node's output to one gradient per operand
# (None where an operand receives no gradient)
BackwardRule = Callable[[Array], Sequence[Array | None]]


class Tensor:
    """
    A dense float64 array with an optional gradient buffer.

    Notes:
    - `data` is always a float64 ndarray, `shape` is derived from it
    - `grad` is allocated lazily by `backward` and has the shape of `data`
    - Only tensors flagged `requires_grad` receive gradients from `backward`,
      either directly (leaves) or by propagating through them (op outputs)
    """

    def __init__(
        self,
        data: npt.ArrayLike,
        requires_grad: bool = False,
    ) -> None:
        super().__init__()

        self.data: Array = np.asarray(data, dtype=np.float64)
        self.grad: Array | None = None
        self.requires_grad = requires_grad

    def __repr__(self) -> str:
        return f'Tensor(shape={self.shape}, requires_grad={self.requires_grad})'

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def size(self) -> int:
        return int(self.data.size)

    def item(self) -> float:
        assert self.size == 1, f'item() on a tensor of shape {self.shape}'

        return float(self.data.reshape(()))

    def zero_grad(self) -> None:
        self.grad = None

    def accumulate_grad(self, grad: Array) -> None:
        assert grad.shape == self.data.shape, \
            f'Gradient shape {grad.shape} does not match tensor shape {self.shape}'

        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += grad


class TapeNode:
    """
    One recorded operation: its output, its operands and its backward rule.
    """

    def __init__(
        self,
        op: str,
        output: Tensor,
        operands: tuple[Tensor, ...],
        backward_rule: BackwardRule,
    ) -> None:
        super().__init__()

        self.op = op
        self.output = output
        self.operands = operands
        self.backward_rule = backward_rule


class Tape:
    """
    Records operations in execution order so gradients can be replayed in
    reverse.

    Nodes are appended as ops run, so every node's operands were produced
    by an earlier node or are leaves. One tape per thread; tapes share no
    state.
    """

    def __init__(self) -> None:
        super().__init__()

        self.nodes: list[TapeNode] = []
        self._outputs: set[int] = set()

    def __len__(self) -> int:
        return len(self.nodes)

    def record(
        self,
        op: str,
        output: Tensor,
        operands: Iterable[Tensor],
        backward_rule: BackwardRule,
    ) -> None:
        assert id(output) not in self._outputs, \
            f'{op}: output tensor recorded twice'

        self.nodes.append(TapeNode(op, output, tuple(operands), backward_rule))
        self._outputs.add(id(output))

    def is_recorded_output(self, tensor: Tensor) -> bool:
        return id(tensor) in self._outputs


def backward(tape: Tape, seed: Tensor) -> None:
    """
    Fill the gradient buffers of every leaf tensor flagged `requires_grad`
    with d(seed)/d(leaf).

    Notes:
    - `seed` must be a scalar (size 1) produced on `tape`
    - Gradients accumulate: calling this twice doubles every leaf gradient
    - Intermediate adjoints live only for the duration of the call
    - An empty tape is a no-op
    """

    if len(tape) == 0:
        return

    if seed.size != 1:
        raise InputError(
            f'backward seed must be a scalar tensor, got shape {seed.shape}',
        )

    adjoints: dict[int, Array] = {id(seed): np.ones_like(seed.data)}
    leaves: dict[int, Tensor] = {}

    for node in reversed(tape.nodes):
        output_grad = adjoints.pop(id(node.output), None)
        if output_grad is None:
            continue

        operand_grads = node.backward_rule(output_grad)
        assert len(operand_grads) == len(node.operands), \
            f'{node.op}: backward rule returned {len(operand_grads)} gradients ' \
            + f'for {len(node.operands)} operands'

        for operand, grad in zip(node.operands, operand_grads):
            if grad is None or not operand.requires_grad:
                continue

            key = id(operand)
            if key in adjoints:
                adjoints[key] = adjoints[key] + grad
            else:
                adjoints[key] = grad

            if not tape.is_recorded_output(operand):
                leaves[key] = operand

    for key, leaf in leaves.items():
        leaf.accumulate_grad(adjoints[key])
