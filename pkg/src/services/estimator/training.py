"""Mini-batch training loop with validation checks, plateau schedule and early stopping."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd
from loguru import logger

from ...core.errors import EmptySplitError
from ...models.dataset import FrameRecord
from ...models.estimator import NetworkSpec, TrainConfig, TrainLogEntry
from ..dataset.storage import load_images
from .network import NetworkParams, forward, init_network, loss_and_gradients
from .optim import Adam, EarlyStopping, PlateauScheduler


def evaluate_loss(net: NetworkParams, images: np.ndarray, labels: np.ndarray, batch_size: int = 64) -> float:
    """Eval-mode L1 over a whole set"""
    total = 0.0
    for start in range(0, len(images), batch_size):
        pred = forward(net, images[start : start + batch_size], mode="eval")
        total += float(np.abs(pred - labels[start : start + batch_size]).sum())
    return total / labels.size


def train(
    train_images: np.ndarray,
    train_labels: np.ndarray,
    val_images: np.ndarray,
    val_labels: np.ndarray,
    spec: NetworkSpec,
    config: TrainConfig,
    net: NetworkParams | None = None,
) -> tuple[NetworkParams, list[TrainLogEntry]]:
    """
    Adam on shuffled mini-batches; returns the parameters with the best
    validation loss (the final ones if no check ran) and the per-epoch log.
    """
    if len(train_images) == 0:
        raise EmptySplitError("training split is empty")
    if len(val_images) == 0:
        raise EmptySplitError("validation split is empty")

    dtype = np.dtype(config.dtype)
    train_images = np.asarray(train_images, dtype=dtype)
    train_labels = np.asarray(train_labels, dtype=dtype)
    val_images = np.asarray(val_images, dtype=dtype)
    val_labels = np.asarray(val_labels, dtype=dtype)

    rng = np.random.default_rng(config.seed)
    net = net or init_network(spec, seed=config.seed, dtype=dtype)

    optimizer = Adam(net.params, config.learning_rate, config.beta1, config.beta2, config.eps)
    scheduler = PlateauScheduler(optimizer, config.plateau_factor, config.plateau_patience)
    stopper = EarlyStopping(config.early_stop_patience)

    best_net: NetworkParams | None = None
    best_val = np.inf
    log: list[TrainLogEntry] = []
    n = len(train_images)

    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(n)
        running = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            loss, grads = loss_and_gradients(net, train_images[idx], train_labels[idx])
            optimizer.step(grads)
            running += loss * len(idx)
        train_loss = running / n

        val_loss = None
        stop = False
        if epoch % config.val_every == 0:
            val_loss = evaluate_loss(net, val_images, val_labels, config.batch_size)
            if val_loss < best_val:
                best_val = val_loss
                best_net = net.copy()
            scheduler.step(val_loss, epoch)
            stop = stopper(val_loss)

        log.append(TrainLogEntry(epoch=epoch, train_loss=train_loss, val_loss=val_loss, lr=optimizer.lr))
        logger.info("Epoch finished", epoch=epoch, train_loss=train_loss, val_loss=val_loss, lr=optimizer.lr)

        if config.target_train_loss is not None and train_loss < config.target_train_loss:
            logger.info("Target training loss reached", epoch=epoch, train_loss=train_loss)
            return net.copy(), log
        if stop:
            logger.info("Early stopping", epoch=epoch, best_val=best_val)
            break

    return (best_net or net.copy()), log


def train_from_manifest(
    frames: Sequence[FrameRecord],
    dataset_dir: str | Path,
    spec: NetworkSpec,
    config: TrainConfig,
) -> tuple[NetworkParams, list[TrainLogEntry]]:
    dtype = np.dtype(config.dtype)
    x_train, y_train = load_images(frames, dataset_dir, "train", dtype)
    x_val, y_val = load_images(frames, dataset_dir, "val", dtype)
    logger.info("Training data loaded", train=len(x_train), val=len(x_val))
    return train(x_train, y_train, x_val, y_val, spec, config)


def write_training_log(log: Sequence[TrainLogEntry], path: str | Path) -> Path:
    """CSV: epoch, train_loss, val_loss, lr"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([e.model_dump() for e in log], columns=["epoch", "train_loss", "val_loss", "lr"])
    frame.to_csv(path, index=False, float_format="%.10g")
    return path
