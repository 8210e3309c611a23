"""AdamW with decoupled weight decay, plus a one-boundary step schedule."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tape import Parameter


@dataclass(frozen=True)
class StepSchedule:
    """Constant rate, multiplied by ``factor`` from ``boundary`` onward."""

    base_lr: float
    boundary: int | None = None
    factor: float = 0.1


def step_lr(schedule: StepSchedule, epoch: int) -> float:
    if schedule.boundary is not None and epoch >= schedule.boundary:
        return schedule.base_lr * schedule.factor
    return schedule.base_lr


@dataclass
class AdamWState:
    schedule: StepSchedule
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.01
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adamw_step(params: list[Parameter], state: AdamWState, lr: float) -> None:
    """One optimizer step over ``params`` using their accumulated gradients.

    Weight decay is decoupled: it is applied directly to the parameter
    (scaled by lr), never folded into the moment estimates.
    """
    state.step += 1
    t = state.step
    bc1 = 1.0 - state.beta1**t
    bc2 = 1.0 - state.beta2**t
    for p in params:
        if p.grad.shape != p.data.shape:
            raise ValueError(f"{p.name}: gradient shape {p.grad.shape} != {p.data.shape}")
        m = state.m.get(p.name)
        if m is None:
            m = np.zeros_like(p.data)
            state.m[p.name] = m
            state.v[p.name] = np.zeros_like(p.data)
        v = state.v[p.name]
        m[...] = state.beta1 * m + (1.0 - state.beta1) * p.grad
        v[...] = state.beta2 * v + (1.0 - state.beta2) * p.grad**2
        m_hat = m / bc1
        v_hat = v / bc2
        p.data -= lr * (m_hat / (np.sqrt(v_hat) + state.eps) + state.weight_decay * p.data)
