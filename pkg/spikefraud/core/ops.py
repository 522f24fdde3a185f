# pyright: strict

"""
Differentiable operations of the spiking network graph.

Each op computes its forward value eagerly and, when given a tape and at
least one operand that requires a gradient, records a backward rule on that
tape. All ops accept optional leading batch dimensions; the trailing axes
carry the per-sample layout (`[C, L]` for convolution and pooling, `[N]`
for linear layers, `[2]` for the loss).
"""

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import numpy.typing as npt

from spikefraud.core.tensor import Array, BackwardRule, Tape, Tensor
from spikefraud.errors import DimensionError, InputError


@dataclass(frozen=True)
class LifParams:
    """
    Parameters of one layer of leaky integrate-and-fire neurons.

    Attributes:
        beta: membrane decay per step, in (0, 1)
        theta: firing threshold, > 0
        sigma: slope of the surrogate spike derivative, > 0
        relaxed: emit the smooth spike `0.5 + (u - theta) / (1 + sigma |u - theta|)`
            instead of a binary one. Its exact derivative is the surrogate,
            which makes the graph checkable against finite differences.
    """

    beta: float
    theta: float
    sigma: float
    relaxed: bool = False

    def __post_init__(self) -> None:
        violations: list[str] = []
        if not 0.0 < self.beta < 1.0:
            violations.append(f'beta must be in (0, 1), got {self.beta}')
        if not self.theta > 0.0:
            violations.append(f'theta must be > 0, got {self.theta}')
        if not self.sigma > 0.0:
            violations.append(f'sigma must be > 0, got {self.sigma}')
        if violations:
            raise InputError('Invalid LIF parameters: ' + '; '.join(violations))


def _record(
    tape: Tape | None,
    op: str,
    output: Tensor,
    operands: Sequence[Tensor],
    backward_rule: BackwardRule,
) -> Tensor:
    if tape is not None and any(operand.requires_grad for operand in operands):
        output.requires_grad = True
        tape.record(op, output, operands, backward_rule)

    return output


def _require_rank(op: str, tensor: Tensor, name: str, rank: int) -> None:
    if tensor.data.ndim < rank:
        raise DimensionError(op, f'{name}.rank', f'>= {rank}', tensor.data.ndim)


def conv1d(
    x: Tensor,
    w: Tensor,
    b: Tensor,
    tape: Tape | None = None,
) -> Tensor:
    """
    Valid 1D convolution with stride 1: `y[c, i] = b[c] + sum_{d,k} w[c, d, k] x[d, i + k]`.

    Shapes: x `[..., C_in, L]`, w `[C_out, C_in, K]`, b `[C_out]` -> `[..., C_out, L - K + 1]`.
    """

    _require_rank('conv1d', x, 'x', 2)
    if w.data.ndim != 3:
        raise DimensionError('conv1d', 'w.rank', 3, w.data.ndim)

    c_out, c_in, kernel = w.shape
    if x.shape[-2] != c_in:
        raise DimensionError('conv1d', 'C_in', c_in, x.shape[-2])
    if b.shape != (c_out,):
        raise DimensionError('conv1d', 'C_out', (c_out,), b.shape)

    length = x.shape[-1]
    if length < kernel:
        raise DimensionError('conv1d', 'L', f'>= {kernel}', length)
    out_length = length - kernel + 1

    windows = [x.data[..., k:k + out_length] for k in range(kernel)]
    y = np.zeros(x.shape[:-2] + (c_out, out_length)) + b.data[:, None]
    for k, window in enumerate(windows):
        y = y + np.matmul(w.data[:, :, k], window)

    def backward_rule(grad: Array) -> Sequence[Array | None]:
        grad_x: Array | None = None
        grad_w: Array | None = None
        grad_b: Array | None = None

        if x.requires_grad:
            grad_x = np.zeros_like(x.data)
            for k in range(kernel):
                grad_x[..., k:k + out_length] += np.matmul(w.data[:, :, k].T, grad)

        flat_grad = grad.reshape(-1, c_out, out_length)
        if w.requires_grad:
            grad_w = np.empty_like(w.data)
            for k, window in enumerate(windows):
                flat_window = window.reshape(-1, c_in, out_length)
                grad_w[:, :, k] = np.tensordot(
                    flat_grad, flat_window, axes=([0, 2], [0, 2]),
                )
        if b.requires_grad:
            grad_b = flat_grad.sum(axis=(0, 2))

        return grad_x, grad_w, grad_b

    return _record(tape, 'conv1d', Tensor(y), (x, w, b), backward_rule)


def maxpool1d(x: Tensor, tape: Tape | None = None) -> Tensor:
    """
    Max pooling with kernel 2 and stride 2 over the last axis.

    Notes:
    - A trailing element of an odd-length axis is dropped
    - The gradient is routed to the maximum of each pair; ties go to the
      earlier index
    """

    _require_rank('maxpool1d', x, 'x', 2)
    length = x.shape[-1]
    if length < 2:
        raise DimensionError('maxpool1d', 'L', '>= 2', length)

    half = length // 2
    pairs = x.data[..., :2 * half].reshape(x.shape[:-1] + (half, 2))
    winners = np.argmax(pairs, axis=-1)
    y = np.take_along_axis(pairs, winners[..., None], axis=-1)[..., 0]

    def backward_rule(grad: Array) -> Sequence[Array | None]:
        grad_pairs = np.zeros_like(pairs)
        np.put_along_axis(grad_pairs, winners[..., None], grad[..., None], axis=-1)

        grad_x = np.zeros_like(x.data)
        grad_x[..., :2 * half] = grad_pairs.reshape(x.shape[:-1] + (2 * half,))
        return (grad_x,)

    return _record(tape, 'maxpool1d', Tensor(y), (x,), backward_rule)


def linear(
    x: Tensor,
    w: Tensor,
    b: Tensor,
    tape: Tape | None = None,
) -> Tensor:
    """
    Fully connected projection `y = w x + b`.

    Shapes: x `[..., N]`, w `[M, N]`, b `[M]` -> `[..., M]`.
    """

    _require_rank('linear', x, 'x', 1)
    if w.data.ndim != 2:
        raise DimensionError('linear', 'w.rank', 2, w.data.ndim)

    m, n = w.shape
    if x.shape[-1] != n:
        raise DimensionError('linear', 'N', n, x.shape[-1])
    if b.shape != (m,):
        raise DimensionError('linear', 'M', (m,), b.shape)

    y = np.matmul(x.data, w.data.T) + b.data

    def backward_rule(grad: Array) -> Sequence[Array | None]:
        flat_grad = grad.reshape(-1, m)
        grad_x = np.matmul(grad, w.data) if x.requires_grad else None
        grad_w = np.matmul(flat_grad.T, x.data.reshape(-1, n)) \
            if w.requires_grad else None
        grad_b = flat_grad.sum(axis=0) if b.requires_grad else None

        return grad_x, grad_w, grad_b

    return _record(tape, 'linear', Tensor(y), (x, w, b), backward_rule)


def _surrogate(u: Array, p: LifParams) -> Array:
    return 1.0 / (1.0 + p.sigma * np.abs(u - p.theta)) ** 2


def surrogate_grad(u: Tensor, p: LifParams) -> Tensor:
    """
    Fast-sigmoid surrogate of the spike derivative:
    `1 / (1 + sigma |u - theta|)^2`, peaking at 1 on the threshold.
    """

    return Tensor(_surrogate(u.data, p))


def _spikes(u: Array, p: LifParams) -> Array:
    if p.relaxed:
        distance = u - p.theta
        return 0.5 + distance / (1.0 + p.sigma * np.abs(distance))

    return (u >= p.theta).astype(np.float64)


def lif_step(
    current: Tensor,
    u_prev: Tensor,
    s_prev: Tensor,
    p: LifParams,
    tape: Tape | None = None,
) -> tuple[Tensor, Tensor]:
    """
    Advance a layer of LIF neurons by one step.

    `u = beta u_prev + I - s_prev theta`, `s = [u >= theta]` (subtractive
    reset). The membrane recurrence is differentiated exactly; only the
    derivative of the spike indicator is replaced by `surrogate_grad`.

    Returns:
        (spikes, membrane)
    """

    for name, tensor in (('u_prev', u_prev), ('s_prev', s_prev)):
        if tensor.shape != current.shape:
            raise DimensionError('lif_step', name, current.shape, tensor.shape)

    membrane = Tensor(p.beta * u_prev.data + current.data - s_prev.data * p.theta)

    def membrane_rule(grad: Array) -> Sequence[Array | None]:
        return grad, p.beta * grad, -p.theta * grad

    _record(tape, 'lif_membrane', membrane, (current, u_prev, s_prev), membrane_rule)

    spikes = Tensor(_spikes(membrane.data, p))

    def spike_rule(grad: Array) -> Sequence[Array | None]:
        return (grad * _surrogate(membrane.data, p),)

    _record(tape, 'lif_spike', spikes, (membrane,), spike_rule)

    return spikes, membrane


def weighted_ce(
    spike_counts: Tensor,
    label: int | npt.NDArray[np.int64],
    weights: npt.ArrayLike,
    tape: Tape | None = None,
) -> Tensor:
    """
    Class-weighted cross entropy over the per-class spike counts:
    `weights[label] * -log softmax(counts)[label]`.

    Notes:
    - counts `[2]` with an integer label, or `[B, 2]` with a label array of
      length B; the batch loss is the mean of the per-sample losses
    - weights are constants, no gradient flows into them
    """

    class_weights = np.asarray(weights, dtype=np.float64)
    if class_weights.shape != (2,):
        raise DimensionError('weighted_ce', 'weights', (2,), class_weights.shape)
    if not np.all(class_weights > 0.0):
        raise InputError(f'Class weights must be positive, got {class_weights.tolist()}')

    if spike_counts.data.ndim not in (1, 2) or spike_counts.shape[-1] != 2:
        raise DimensionError('weighted_ce', 'classes', '[2] or [B, 2]', spike_counts.shape)

    counts = spike_counts.data.reshape(-1, 2)
    labels = np.asarray(label, dtype=np.int64).reshape(-1)
    if labels.shape[0] != counts.shape[0]:
        raise DimensionError('weighted_ce', 'batch', counts.shape[0], labels.shape[0])
    if np.any((labels < 0) | (labels > 1)):
        raise InputError(f'Labels must be 0 or 1, got {np.unique(labels).tolist()}')

    rows = np.arange(counts.shape[0])
    shifted = counts - counts.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    log_probs = shifted[rows, labels] - log_norm
    sample_weights = class_weights[labels]
    loss = float(np.mean(-sample_weights * log_probs))

    def backward_rule(grad: Array) -> Sequence[Array | None]:
        probs = np.exp(shifted - log_norm[:, None])
        probs[rows, labels] -= 1.0
        grad_counts = probs * (sample_weights / counts.shape[0])[:, None]
        return (float(grad.reshape(())) * grad_counts.reshape(spike_counts.shape),)

    return _record(tape, 'weighted_ce', Tensor(loss), (spike_counts,), backward_rule)


def add(a: Tensor, b: Tensor, tape: Tape | None = None) -> Tensor:
    if a.shape != b.shape:
        raise DimensionError('add', 'shape', a.shape, b.shape)

    def backward_rule(grad: Array) -> Sequence[Array | None]:
        return grad, grad

    return _record(tape, 'add', Tensor(a.data + b.data), (a, b), backward_rule)


def scale(a: Tensor, factor: float, tape: Tape | None = None) -> Tensor:
    def backward_rule(grad: Array) -> Sequence[Array | None]:
        return (factor * grad,)

    return _record(tape, 'scale', Tensor(factor * a.data), (a,), backward_rule)


def reshape(a: Tensor, shape: tuple[int, ...], tape: Tape | None = None) -> Tensor:
    def backward_rule(grad: Array) -> Sequence[Array | None]:
        return (grad.reshape(a.shape),)

    return _record(tape, 'reshape', Tensor(a.data.reshape(shape)), (a,), backward_rule)


def tensor_sum(a: Tensor, axis: int | None = None, tape: Tape | None = None) -> Tensor:
    """Sum over one axis, or over every element when `axis` is None."""

    total = a.data.sum(axis=axis)

    def backward_rule(grad: Array) -> Sequence[Array | None]:
        if axis is None:
            return (np.full_like(a.data, float(grad.reshape(()))),)
        return (np.broadcast_to(np.expand_dims(grad, axis), a.shape).copy(),)

    return _record(tape, 'sum', Tensor(total), (a,), backward_rule)


def population_sum(spikes: Tensor, tape: Tape | None = None) -> Tensor:
    """
    Sum an output population `[..., P]` into per-class counts `[..., 2]`.

    Neurons `0 .. P/2 - 1` vote for class 0, `P/2 .. P - 1` for class 1.
    """

    population = spikes.shape[-1]
    if population % 2 != 0 or population == 0:
        raise DimensionError('population_sum', 'P', 'even and positive', population)

    halves = spikes.data.reshape(spikes.shape[:-1] + (2, population // 2))

    def backward_rule(grad: Array) -> Sequence[Array | None]:
        expanded = np.broadcast_to(grad[..., None], halves.shape)
        return (expanded.reshape(spikes.shape).copy(),)

    return _record(tape, 'population_sum', Tensor(halves.sum(axis=-1)), (spikes,), backward_rule)


def numerical_gradient(
    f: Callable[[], float],
    tensor: Tensor,
    indices: Sequence[int] | None = None,
    step: float = 1e-5,
) -> Array:
    """
    Central finite difference estimate of df/d(tensor) at flat `indices`
    (all elements by default). `tensor.data` is perturbed in place and
    restored.
    """

    flat = tensor.data.reshape(-1)
    assert np.shares_memory(flat, tensor.data), \
        'numerical_gradient needs a contiguous tensor'

    selected = range(flat.size) if indices is None else indices
    estimates: list[float] = []

    for index in selected:
        original = flat[index]
        flat[index] = original + step
        upper = f()
        flat[index] = original - step
        lower = f()
        flat[index] = original
        estimates.append((upper - lower) / (2.0 * step))

    return np.asarray(estimates, dtype=np.float64)
