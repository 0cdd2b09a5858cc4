"""Evaluation-time image perturbations: additive gaussian noise and contrast remaps."""

from __future__ import annotations

from typing import Callable

import numpy as np

NOISE_VARIANCES = {"noise-low": 0.001, "noise-medium": 0.01, "noise-high": 0.1}
CONTRAST_RANGES = {
    "contrast-low": (26.0 / 255.0, 200.0 / 255.0),
    "contrast-high": (174.0 / 255.0, 240.0 / 255.0),
}
VARIANTS: tuple[str, ...] = ("clean", *NOISE_VARIANCES, *CONTRAST_RANGES)


def add_gaussian_noise(img: np.ndarray, mean: float, variance: float, rng: np.random.Generator) -> np.ndarray:
    """img + N(mean, variance) per pixel, clamped to [0, 1]"""
    if variance < 0:
        raise ValueError("variance must be nonnegative")
    noise = rng.normal(mean, np.sqrt(variance), size=np.shape(img))
    return np.clip(np.asarray(img, dtype=float) + noise, 0.0, 1.0)


def adjust_contrast(img: np.ndarray, out_low: float, out_high: float) -> np.ndarray:
    """Linear remap of [0, 1] onto [out_low, out_high]"""
    if not (0.0 <= out_low < out_high <= 1.0):
        raise ValueError("contrast range must satisfy 0 <= out_low < out_high <= 1")
    img = np.asarray(img, dtype=float)
    if out_low == 0.0 and out_high == 1.0:
        return img.copy()
    return out_low + img * (out_high - out_low)


def variant_transform(name: str, noise_mean: float = 0.01) -> Callable[[np.ndarray, np.random.Generator], np.ndarray]:
    if name == "clean":
        return lambda img, rng: np.asarray(img, dtype=float).copy()
    if name in NOISE_VARIANCES:
        variance = NOISE_VARIANCES[name]
        return lambda img, rng: add_gaussian_noise(img, noise_mean, variance, rng)
    if name in CONTRAST_RANGES:
        low, high = CONTRAST_RANGES[name]
        return lambda img, rng: adjust_contrast(img, low, high)
    raise ValueError(f"unknown perturbation variant '{name}' (expected one of {', '.join(VARIANTS)})")


def apply_variant(img: np.ndarray, name: str, rng: np.random.Generator, noise_mean: float = 0.01) -> np.ndarray:
    return variant_transform(name, noise_mean)(img, rng)
