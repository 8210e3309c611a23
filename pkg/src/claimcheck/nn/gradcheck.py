"""Finite-difference verification of tape gradients."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .tape import Tape, Tensor


def grad_check(
    fn: Callable[[Tape, list[Tensor]], Tensor],
    inputs: Sequence[np.ndarray],
    h: float = 1e-5,
) -> float:
    """Max relative error between tape gradients and central differences.

    ``fn`` must build a scalar loss on the given tape from the given leaf
    tensors and be a pure function of them. Relative error per coordinate
    is |analytic - numeric| / max(1, |numeric|).
    """
    if h <= 0.0:
        raise ValueError("h must be positive")
    inputs = [np.array(x, dtype=np.float64) for x in inputs]

    def run() -> float:
        tape = Tape()
        loss = fn(tape, [tape.tensor(x) for x in inputs])
        value = float(loss.data.reshape(()))
        if not math.isfinite(value):
            raise ValueError("non-finite loss during finite differencing")
        return value

    tape = Tape()
    leaves = [tape.tensor(x) for x in inputs]
    loss = fn(tape, leaves)
    tape.backward(loss)
    analytic = [
        leaf.grad if leaf.grad is not None else np.zeros_like(leaf.data) for leaf in leaves
    ]
    if any(not np.all(np.isfinite(g)) for g in analytic):
        raise ValueError("non-finite analytic gradient")

    worst = 0.0
    for x, grads in zip(inputs, analytic):
        flat = x.reshape(-1)
        gflat = grads.reshape(-1)
        for i in range(flat.size):
            original = flat[i]
            flat[i] = original + h
            plus = run()
            flat[i] = original - h
            minus = run()
            flat[i] = original
            numeric = (plus - minus) / (2.0 * h)
            err = abs(gflat[i] - numeric) / max(1.0, abs(numeric))
            if err > worst:
                worst = err
    return worst
