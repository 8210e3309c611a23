"""Reverse-mode autodiff on an explicit recorded tape.

A :class:`Tape` is scoped to one forward pass: operations append
(output, parents, backward_fn) entries in execution order, and
``backward`` walks the entries in reverse, accumulating gradients into
``Tensor.grad`` arrays and finally into any bound :class:`Parameter`
accumulators. Everything is dense float64; the heads this kernel serves
are tiny, so auditability beats throughput.
"""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from ..errors import ShapeError


class Tensor:
    __slots__ = ("data", "grad", "tape")

    def __init__(self, data: np.ndarray, tape: "Tape"):
        self.data = np.asarray(data, dtype=np.float64)
        if not np.all(np.isfinite(self.data)):
            raise ValueError("tensor values must be finite")
        self.grad: np.ndarray | None = None
        self.tape = tape

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def add_grad(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64)
        else:
            self.grad = self.grad + g


class Parameter:
    """Named trainable array with a persistent gradient accumulator."""

    def __init__(self, name: str, data: np.ndarray):
        self.name = name
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = np.zeros_like(self.data)

    def zero_grad(self) -> None:
        self.grad[...] = 0.0

    def __repr__(self) -> str:
        return f"Parameter({self.name!r}, shape={self.data.shape})"


class Tape:
    def __init__(self):
        self._records: list[tuple[Tensor, tuple[Tensor, ...], Callable]] = []
        self._param_links: list[tuple[Parameter, Tensor]] = []

    def tensor(self, data) -> Tensor:
        return Tensor(data, self)

    def param(self, p: Parameter) -> Tensor:
        t = Tensor(p.data, self)
        self._param_links.append((p, t))
        return t

    def record(self, out: Tensor, parents: Sequence[Tensor], backward: Callable) -> None:
        self._records.append((out, tuple(parents), backward))

    def backward(self, loss: Tensor, seed: float = 1.0) -> None:
        """Seed d(loss)/d(loss) and sweep the tape in reverse.

        After the sweep, gradients of bound parameters are added into
        their accumulators (so per-example backward calls inside a batch
        accumulate naturally).
        """
        if loss.tape is not self:
            raise ValueError("loss does not belong to this tape")
        if loss.data.size != 1:
            raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
        loss.add_grad(np.full_like(loss.data, seed))
        for out, parents, backward_fn in reversed(self._records):
            if out.grad is None:
                continue
            grads = backward_fn(out.grad)
            for parent, g in zip(parents, grads):
                if g is not None:
                    parent.add_grad(g)
        for p, t in self._param_links:
            if t.grad is not None:
                p.grad += t.grad


def _same_tape(*tensors: Tensor) -> Tape:
    tape = tensors[0].tape
    for t in tensors[1:]:
        if t.tape is not tape:
            raise ValueError("operands live on different tapes")
    return tape


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum-reduce a broadcast gradient back to the original shape."""
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def matmul(a: Tensor, b: Tensor) -> Tensor:
    tape = _same_tape(a, b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.data.shape[1] != b.data.shape[0]:
        raise ShapeError(f"matmul shapes {a.shape} x {b.shape} incompatible")
    out = tape.tensor(a.data @ b.data)

    def backward(g):
        return g @ b.data.T, a.data.T @ g

    tape.record(out, (a, b), backward)
    return out


def add(a: Tensor, b: Tensor) -> Tensor:
    tape = _same_tape(a, b)
    try:
        out = tape.tensor(a.data + b.data)
    except ValueError as exc:
        raise ShapeError(f"add shapes {a.shape} + {b.shape}: {exc}") from exc

    def backward(g):
        return _unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)

    tape.record(out, (a, b), backward)
    return out


def scale(a: Tensor, factor: float) -> Tensor:
    tape = a.tape
    out = tape.tensor(a.data * factor)
    tape.record(out, (a,), lambda g: (g * factor,))
    return out


def relu(a: Tensor) -> Tensor:
    tape = a.tape
    out = tape.tensor(np.maximum(a.data, 0.0))
    mask = a.data > 0.0
    tape.record(out, (a,), lambda g: (g * mask,))
    return out


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    tape = a.tape
    if not -a.data.ndim <= axis < a.data.ndim:
        raise ShapeError(f"softmax axis {axis} invalid for shape {a.shape}")
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axis, keepdims=True)
    out = tape.tensor(y)

    def backward(g):
        inner = (g * y).sum(axis=axis, keepdims=True)
        return (y * (g - inner),)

    tape.record(out, (a,), backward)
    return out


def masked_softmax(a: Tensor, mask: np.ndarray, axis: int = -1) -> Tensor:
    """Softmax over unmasked positions; fully-masked rows come out all-zero
    (by convention: no attention contribution, zero gradient)."""
    tape = a.tape
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != a.data.shape:
        raise ShapeError(f"mask shape {mask.shape} != input shape {a.shape}")
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.where(mask, np.exp(shifted), 0.0)
    denom = e.sum(axis=axis, keepdims=True)
    y = np.divide(e, denom, out=np.zeros_like(e), where=denom > 0.0)
    out = tape.tensor(y)

    def backward(g):
        inner = (g * y).sum(axis=axis, keepdims=True)
        return (y * (g - inner),)

    tape.record(out, (a,), backward)
    return out


def cross_entropy(probs: Tensor, target: int) -> Tensor:
    """Negative log-likelihood of the target class, from probabilities.

    Composed after :func:`softmax` this pair backpropagates the familiar
    ``probs - onehot(target)`` into the logits.
    """
    tape = probs.tape
    flat = probs.data.reshape(-1)
    if not 0 <= target < flat.size:
        raise ShapeError(f"target {target} out of range for {flat.size} classes")
    p = flat[target]
    if p <= 0.0:
        raise ValueError("target probability must be positive for cross-entropy")
    out = tape.tensor(np.array(-math.log(p)))

    def backward(g):
        gp = np.zeros_like(probs.data)
        gp.reshape(-1)[target] = -float(g) / p
        return (gp,)

    tape.record(out, (probs,), backward)
    return out


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not tensors:
        raise ValueError("concat needs at least one tensor")
    tape = _same_tape(*tensors)
    out = tape.tensor(np.concatenate([t.data for t in tensors], axis=axis))
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def backward(g):
        return tuple(np.split(g, splits, axis=axis))

    tape.record(out, tuple(tensors), backward)
    return out


def mean_rows(a: Tensor) -> Tensor:
    """Mean over axis 0, keeping a (1, f) row for downstream layers."""
    tape = a.tape
    n = a.data.shape[0]
    out = tape.tensor(a.data.mean(axis=0, keepdims=True))

    def backward(g):
        return (np.repeat(g / n, n, axis=0),)

    tape.record(out, (a,), backward)
    return out


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    tape = a.tape
    out = tape.tensor(a.data.reshape(shape))
    tape.record(out, (a,), lambda g: (g.reshape(a.data.shape),))
    return out


def transpose(a: Tensor) -> Tensor:
    tape = a.tape
    out = tape.tensor(a.data.T)
    tape.record(out, (a,), lambda g: (g.T,))
    return out


def linear(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    """Affine map y = x @ w (+ b). Rows of x are independent examples."""
    y = matmul(x, w)
    return y if b is None else add(y, b)


def scaled_dot_attention(
    q: Tensor, k: Tensor, v: Tensor, mask: np.ndarray | None = None
) -> Tensor:
    """softmax(q k^T / sqrt(d)) v, with an optional key-position mask.

    ``mask`` flags valid key/value rows; fully-masked queries produce a
    zero output row rather than NaN.
    """
    if q.data.ndim != 2 or k.data.ndim != 2 or v.data.ndim != 2:
        raise ShapeError("attention operands must be 2-d")
    if q.data.shape[1] != k.data.shape[1]:
        raise ShapeError(f"query dim {q.shape} != key dim {k.shape}")
    if k.data.shape[0] != v.data.shape[0]:
        raise ShapeError(f"key count {k.shape} != value count {v.shape}")
    d = q.data.shape[1]
    scores = scale(matmul(q, transpose(k)), 1.0 / math.sqrt(d))
    if mask is None:
        weights = softmax(scores, axis=-1)
    else:
        mask = np.asarray(mask, dtype=bool).reshape(-1)
        if mask.shape[0] != k.data.shape[0]:
            raise ShapeError(f"mask length {mask.shape[0]} != key count {k.data.shape[0]}")
        weights = masked_softmax(scores, np.broadcast_to(mask, scores.data.shape))
    return matmul(weights, v)


def normalized_adjacency(adjacency: np.ndarray) -> np.ndarray:
    """D^{-1/2} (A + I) D^{-1/2} for a symmetric 0/1 adjacency without
    self-loops. The inserted self-loop keeps every degree >= 1."""
    a = np.asarray(adjacency, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"adjacency must be square, got {a.shape}")
    if not np.array_equal(a, a.T):
        raise ValueError("adjacency must be symmetric")
    if np.any(np.diag(a) != 0.0):
        raise ValueError("adjacency must have a zero diagonal (self-loops are inserted here)")
    a_hat = a + np.eye(a.shape[0])
    inv_sqrt = 1.0 / np.sqrt(a_hat.sum(axis=1))
    return a_hat * inv_sqrt[:, None] * inv_sqrt[None, :]


def gcn_layer(x: Tensor, adjacency: np.ndarray, w: Tensor) -> Tensor:
    """One normalized graph convolution: D^{-1/2}(A+I)D^{-1/2} x w."""
    tape = _same_tape(x, w)
    if x.data.shape[0] != adjacency.shape[0]:
        raise ShapeError(f"{x.shape[0]} feature rows vs {adjacency.shape[0]} nodes")
    norm = tape.tensor(normalized_adjacency(adjacency))
    return matmul(matmul(norm, x), w)
