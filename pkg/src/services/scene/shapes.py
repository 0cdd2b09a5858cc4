"""
Exosuit surface profiles S(X_L).

Families:
    R01 - linear taper R0 -> R1
    Rs  - R0 + R0/20 sin(A pi X_L)
    Rcc - sum_{n=0..6} B_n cos(pi n X_L)            (B_n in cm)
    Rsc - R0 + R0/20 (sin(C pi X_L + phi_C) + cos(D pi X_L + phi_D))
    RLP - sum_{n=0..N-1} 2 m_n / 3^n P_n(X_L)       (m_n in cm)

Every profile is clamped to [MIN_RADIUS, spec.max_radius]. The upper cap
(2 cm unless the ShapeSpec sets another) only binds on the Rcc and RLP series,
whose raw sums can reach several centimeters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ...core.errors import UnknownFamilyError
from ...models.shapes import FAMILIES, ShapeSpec
from ..geometry.rod import MIN_RADIUS, RodModel

CM = 0.01


def _require(spec: ShapeSpec, *names: str) -> None:
    missing = [n for n in names if getattr(spec, n) is None]
    if missing:
        raise ValueError(f"{spec.family} shape {spec.spec_id} is missing {', '.join(missing)}")


def raw_profile(spec: ShapeSpec, x_l) -> np.ndarray:
    """Family formula before clamping; accepts scalars or arrays of X_L"""
    x = np.asarray(x_l, dtype=float)
    family = spec.family
    if family == "R01":
        _require(spec, "r0", "r1")
        return spec.r0 + x * (spec.r1 - spec.r0)
    if family == "Rs":
        _require(spec, "r0", "a")
        return spec.r0 + spec.r0 / 20.0 * np.sin(spec.a * np.pi * x)
    if family == "Rcc":
        _require(spec, "b")
        n = np.arange(len(spec.b))
        return CM * np.cos(np.pi * np.multiply.outer(x, n)) @ np.asarray(spec.b)
    if family == "Rsc":
        _require(spec, "r0", "c", "d", "phi_c", "phi_d")
        wave = np.sin(spec.c * np.pi * x + spec.phi_c) + np.cos(spec.d * np.pi * x + spec.phi_d)
        return spec.r0 + spec.r0 / 20.0 * wave
    if family == "RLP":
        _require(spec, "m")
        coeffs = [2.0 * m / 3.0**n for n, m in enumerate(spec.m)]
        return CM * np.polynomial.legendre.legval(x, coeffs)
    raise UnknownFamilyError(f"unknown shape family '{family}' (expected one of {', '.join(FAMILIES)})")


def radius_profile(spec: ShapeSpec, x_l) -> float | np.ndarray:
    x = np.asarray(x_l, dtype=float)
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("X_L must lie in [0, 1]")
    r = np.clip(raw_profile(spec, x), MIN_RADIUS, spec.max_radius)
    return float(r) if r.ndim == 0 else r


@dataclass(frozen=True)
class ShapeProfile:
    """S(X_L) bound to one spec; picklable so rods can cross process pools"""

    spec: ShapeSpec

    def __call__(self, x_l: float) -> float:
        return radius_profile(self.spec, x_l)


def default_shape() -> ShapeSpec:
    """Initial design: 10 cm rod tapering 0.58 cm -> 0.4 cm"""
    return ShapeSpec(spec_id="default", scenario="default", family="R01", length=0.1, r0=0.0058, r1=0.004)


def control_shape() -> ShapeSpec:
    return ShapeSpec(spec_id="control", scenario="control", family="R01", length=0.095, r0=0.01, r1=0.005)


def build_rod(spec: ShapeSpec, youngs_modulus: float = 30e3) -> RodModel:
    return RodModel(length=spec.length, radius=ShapeProfile(spec), youngs_modulus=youngs_modulus)
