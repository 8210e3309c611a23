"""Minimal dense numeric kernel with exact backward passes."""

from .checkpoint import load_checkpoint, save_checkpoint
from .gradcheck import grad_check
from .optim import AdamWState, StepSchedule, adamw_step, step_lr
from .tape import (
    Parameter,
    Tape,
    Tensor,
    add,
    concat,
    cross_entropy,
    gcn_layer,
    linear,
    masked_softmax,
    matmul,
    mean_rows,
    normalized_adjacency,
    relu,
    reshape,
    scale,
    scaled_dot_attention,
    softmax,
    transpose,
)


def glorot_uniform(rng, fan_in: int, fan_out: int):
    """Uniform init in +-sqrt(6 / (fan_in + fan_out))."""
    limit = (6.0 / (fan_in + fan_out)) ** 0.5
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


__all__ = [
    "AdamWState",
    "Parameter",
    "StepSchedule",
    "Tape",
    "Tensor",
    "adamw_step",
    "add",
    "concat",
    "cross_entropy",
    "gcn_layer",
    "glorot_uniform",
    "grad_check",
    "linear",
    "load_checkpoint",
    "masked_softmax",
    "matmul",
    "mean_rows",
    "normalized_adjacency",
    "relu",
    "reshape",
    "save_checkpoint",
    "scale",
    "scaled_dot_attention",
    "softmax",
    "step_lr",
    "transpose",
]
