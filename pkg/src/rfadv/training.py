"""Single-sample training loop with mini-batch gradient accumulation."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .attacks import model_input
from .dataset import Dataset
from .errors import TrainingDivergedError
from .nn import Adam, Model, backward


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    test_accuracy: float
    seconds: float


def _subset_accuracy(model: Model, examples) -> float:
    correct = 0
    for ex in examples:
        correct += model.predict_label(model_input(model, ex.frame)) == ex.mod_id
    return correct / len(examples) if examples else 0.0


def fit(model: Model, dataset: Dataset, epochs: int, lr: float = 1e-3,
        batch_size: int = 32, seed: int = 0, eval_limit: int = 1000,
        eval_min_snr: int | None = None, target_accuracy: float | None = None,
        log=None) -> list[EpochStats]:
    """Train with Adam on the dataset's train split.

    test_accuracy is measured each epoch on a seeded subsample (at most
    eval_limit examples) of the test split, optionally restricted to
    snr_db >= eval_min_snr; when target_accuracy is set, training stops
    early once that figure is reached. Raises TrainingDivergedError on a
    non-finite loss.
    """
    rng = np.random.default_rng(seed)
    train = dataset.train_examples()
    test = dataset.test_examples()
    if eval_min_snr is not None:
        test = [ex for ex in test if ex.snr_db >= eval_min_snr]
    if len(test) > eval_limit:
        pick = rng.choice(len(test), size=eval_limit, replace=False)
        test = [test[i] for i in pick]

    optimizer = Adam(lr=lr)
    names = model.parameter_names()
    params = model.parameter_arrays()
    history: list[EpochStats] = []
    for epoch in range(1, epochs + 1):
        start = time.perf_counter()
        order = rng.permutation(len(train))
        grad_acc = [np.zeros_like(p) for p in params]
        in_batch = 0
        loss_sum = 0.0
        for j in order:
            ex = train[j]
            x = model_input(model, ex.frame)
            target = np.zeros(model.num_classes)
            target[ex.mod_id] = 1.0
            report = backward(model, x, target, train=True, rng=rng)
            if not math.isfinite(report.loss_value):
                raise TrainingDivergedError(
                    f"non-finite loss at epoch {epoch}"
                )
            loss_sum += report.loss_value
            k = 0
            for layer_grads in report.param_grads:
                for g in layer_grads.values():
                    grad_acc[k] += g
                    k += 1
            in_batch += 1
            if in_batch == batch_size:
                for g in grad_acc:
                    g /= in_batch
                optimizer.step(params, grad_acc, names=names)
                grad_acc = [np.zeros_like(p) for p in params]
                in_batch = 0
        if in_batch:
            for g in grad_acc:
                g /= in_batch
            optimizer.step(params, grad_acc, names=names)
        stats = EpochStats(
            epoch=epoch,
            train_loss=loss_sum / len(train),
            test_accuracy=_subset_accuracy(model, test),
            seconds=time.perf_counter() - start,
        )
        history.append(stats)
        if log is not None:
            log(stats)
        if target_accuracy is not None and stats.test_accuracy >= target_accuracy:
            break
    return history
