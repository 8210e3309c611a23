"""Mini-batch training harness and cross-validated evaluation.

Training is deterministic given the seed: the whole run draws from one
generator (epoch shuffles), batches accumulate per-example gradients in
fixed order, and the optimizer is plain AdamW with an optional one-step
learning-rate drop. Encoder outputs are fixed inputs; only head
parameters train.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from ..errors import TrainingError
from ..nn import AdamWState, StepSchedule, Tape, adamw_step, cross_entropy, step_lr
from .metrics import FoldMetrics, MetricsReport, classification_metrics


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 30
    learning_rate: float = 1e-4
    decay_boundary: int | None = None
    decay_factor: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    weight_decay: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if min(self.epochs, self.batch_size) < 1 or self.learning_rate < 0:
            raise ValueError("epochs/batch_size must be >= 1, learning_rate >= 0")


# default settings per head family: graph-family trains twice as long with
# a x0.1 rate drop halfway
DEFAULT_TRAIN_CONFIGS: dict[str, TrainConfig] = {
    "nli": TrainConfig(epochs=100, learning_rate=1e-2),
    "nli-sent": TrainConfig(epochs=100, learning_rate=1e-4),
    "nli-psent": TrainConfig(epochs=100, learning_rate=1e-5, decay_boundary=100),
    "nli-san": TrainConfig(epochs=100, learning_rate=1e-4),
    "nli-graph": TrainConfig(epochs=200, learning_rate=1e-4, decay_boundary=100),
    "nli-graph-abl": TrainConfig(epochs=200, learning_rate=1e-3, decay_boundary=100),
}


def default_config(kind: str) -> TrainConfig:
    try:
        return DEFAULT_TRAIN_CONFIGS[kind]
    except KeyError:
        raise ValueError(f"no default training config for head kind {kind!r}") from None


@dataclass
class TrainResult:
    loss_curve: list[float]
    epochs: int
    seed: int

    @property
    def final_loss(self) -> float:
        return self.loss_curve[-1]


def train(
    head,
    dataset: Sequence[tuple[object, int]],
    config: TrainConfig,
    seed: int | None = None,
) -> TrainResult:
    """Train a head in place; returns the per-epoch mean loss curve."""
    if not dataset:
        raise TrainingError("dataset is empty")
    for _, label in dataset:
        if label not in (0, 1):
            raise TrainingError(f"labels must be 0 or 1, got {label!r}")
    run_seed = config.seed if seed is None else seed
    rng = np.random.default_rng(run_seed)
    schedule = StepSchedule(config.learning_rate, config.decay_boundary, config.decay_factor)
    state = AdamWState(schedule=schedule, beta1=config.beta1, beta2=config.beta2,
                       weight_decay=config.weight_decay)
    params = head.parameters()
    loss_curve: list[float] = []
    n = len(dataset)
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        lr = step_lr(schedule, epoch)
        total = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            for p in params:
                p.zero_grad()
            for idx in batch:
                example, label = dataset[int(idx)]
                tape = Tape()
                probs = head.forward(tape, example)
                loss = cross_entropy(probs, label)
                value = float(loss.data.reshape(()))
                if not math.isfinite(value):
                    raise TrainingError(
                        f"non-finite loss at epoch {epoch}, example index {int(idx)}"
                    )
                tape.backward(loss, seed=1.0 / len(batch))
                total += value
            adamw_step(params, state, lr)
        loss_curve.append(total / n)
    return TrainResult(loss_curve, config.epochs, run_seed)


def stable_fold_assignment(ids: Sequence[str], k: int, seed: int = 0) -> list[list[int]]:
    """Partition indices into k folds by a stable content hash of each id.

    Membership depends only on (id, seed, k): shuffling the dataset order
    leaves every fold's membership unchanged. Fold sizes differ by at
    most one.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(ids) < k:
        raise ValueError(f"dataset of {len(ids)} items cannot split into {k} folds")
    if len(set(ids)) != len(ids):
        raise ValueError("item ids must be unique")
    keyed = sorted(
        range(len(ids)),
        key=lambda i: (hashlib.sha256(f"{seed}:{ids[i]}".encode()).hexdigest(), ids[i]),
    )
    base, extra = divmod(len(ids), k)
    folds = []
    cursor = 0
    for f in range(k):
        size = base + (1 if f < extra else 0)
        folds.append(keyed[cursor : cursor + size])
        cursor += size
    return folds


def kfold_evaluate(
    dataset: Sequence[tuple[str, object, int]],
    head_factory: Callable[[], object],
    config: TrainConfig,
    k: int = 5,
    seed: int = 0,
) -> tuple[MetricsReport, list[TrainResult]]:
    """k-fold cross-validation: train on k-1 folds, score the held-out fold.

    ``dataset`` rows are (id, example, label). Per-fold metrics and their
    unweighted mean are reported; training curves returned alongside.
    """
    ids = [row[0] for row in dataset]
    folds = stable_fold_assignment(ids, k, seed)
    per_fold: list[FoldMetrics] = []
    curves: list[TrainResult] = []
    for f, test_idx in enumerate(folds):
        test_set = set(test_idx)
        train_rows = [(ex, y) for i, (_, ex, y) in enumerate(dataset) if i not in test_set]
        head = head_factory()
        curves.append(train(head, train_rows, config, seed=seed + f))
        gold = [dataset[i][2] for i in test_idx]
        pred = [head.predict(dataset[i][1]) for i in test_idx]
        per_fold.append(classification_metrics(gold, pred))
    return MetricsReport.from_folds(per_fold), curves


def holdout_split(
    dataset: Sequence[tuple[str, object, int]], test_fraction: float = 0.2, seed: int = 0
) -> tuple[list, list]:
    """Stable-hash holdout split; same id keeps the same side across runs."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    ids = [row[0] for row in dataset]
    order = sorted(
        range(len(ids)),
        key=lambda i: (hashlib.sha256(f"{seed}:{ids[i]}".encode()).hexdigest(), ids[i]),
    )
    n_test = max(1, int(round(test_fraction * len(ids))))
    test_idx = set(order[:n_test])
    train_rows = [dataset[i] for i in range(len(dataset)) if i not in test_idx]
    test_rows = [dataset[i] for i in range(len(dataset)) if i in test_idx]
    return train_rows, test_rows
