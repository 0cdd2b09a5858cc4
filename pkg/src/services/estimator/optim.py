"""Adam, learning-rate reduction on plateau and early stopping."""

from __future__ import annotations

import math

import numpy as np
from loguru import logger


class Adam:
    """Adam over a dict of parameter arrays, updated in place"""

    def __init__(self, params: dict[str, np.ndarray], lr: float = 2e-4, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        if lr <= 0:
            raise ValueError("learning rate must be positive")
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for k, p in self.params.items():
            g = grads[k]
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g
            m_hat = self.m[k] / c1
            v_hat = self.v[k] / c2
            p -= (self.lr * m_hat / (np.sqrt(v_hat) + self.eps)).astype(p.dtype)


class PlateauScheduler:
    """
    Multiply the learning rate by `factor` once `patience` epochs have passed
    since the best monitored loss. Checked whenever a validation loss arrives.
    """

    def __init__(self, optimizer: Adam, factor: float = 0.1, patience: int = 10, min_lr: float = 0.0):
        if not 0.0 < factor < 1.0:
            raise ValueError("plateau factor must be in (0, 1)")
        self.optimizer = optimizer
        self.factor = factor
        self.patience = patience
        self.min_lr = min_lr
        self.best = math.inf
        self.best_epoch = 0

    def step(self, loss: float, epoch: int) -> bool:
        """Record a loss at `epoch`; True when the rate was reduced"""
        if loss < self.best:
            self.best = loss
            self.best_epoch = epoch
            return False
        if epoch - self.best_epoch >= self.patience and self.optimizer.lr > self.min_lr:
            old = self.optimizer.lr
            self.optimizer.lr = max(old * self.factor, self.min_lr)
            # restart the plateau window at the reduction
            self.best_epoch = epoch
            logger.info("Learning rate reduced", epoch=epoch, old=old, new=self.optimizer.lr)
            return True
        return False


class EarlyStopping:
    """Stop after `patience` consecutive checks without improvement"""

    def __init__(self, patience: int = 5, min_delta: float = 0.0):
        self.patience = patience
        self.min_delta = min_delta
        self.best = math.inf
        self.counter = 0

    def __call__(self, loss: float) -> bool:
        if self.best - loss > self.min_delta:
            self.best = loss
            self.counter = 0
            return False
        self.counter += 1
        logger.debug("Early stopping counter", counter=self.counter, patience=self.patience)
        return self.counter >= self.patience
