"""
Rigid-motion group utilities for the rod kinematics.

Conventions:
    - Twists are 6-vectors ordered (angular; linear).
    - hat maps a twist to its 4x4 se(3) matrix, vee is the inverse.
    - Ad(g) = [[R, 0], [r^ R, R]] transports twists between frames.
    - ad(xi) = [[w^, 0], [v^, w^]]; ad(xi) eta is the Lie bracket
      [xi^, eta^] = xi^ eta^ - eta^ xi^, hence ad(xi) eta = -ad(eta) xi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

ORTHONORMAL_TOL = 1e-10
_SMALL_ANGLE = 1e-4


@dataclass(frozen=True)
class Twist:
    """Element of se(3) as (angular; linear)"""

    angular: np.ndarray = field(default_factory=lambda: np.zeros(3))
    linear: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "angular", np.asarray(self.angular, dtype=float).reshape(3))
        object.__setattr__(self, "linear", np.asarray(self.linear, dtype=float).reshape(3))
        if not (np.all(np.isfinite(self.angular)) and np.all(np.isfinite(self.linear))):
            raise ValueError("twist entries must be finite")

    @classmethod
    def from_vector(cls, v) -> Twist:
        v = np.asarray(v, dtype=float).reshape(6)
        return cls(v[:3], v[3:])

    def vector(self) -> np.ndarray:
        return np.concatenate([self.angular, self.linear])


@dataclass(frozen=True)
class Transform:
    """Homogeneous rigid transform g = [[R, r], [0, 1]]"""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        r = np.asarray(self.translation, dtype=float).reshape(3)
        if np.max(np.abs(R.T @ R - np.eye(3))) > ORTHONORMAL_TOL or abs(np.linalg.det(R) - 1.0) > ORTHONORMAL_TOL:
            raise ValueError("rotation block is not a proper orthonormal matrix")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", r)

    @classmethod
    def identity(cls) -> Transform:
        return cls()

    @classmethod
    def from_matrix(cls, m) -> Transform:
        m = np.asarray(m, dtype=float)
        return cls(m[:3, :3], m[:3, 3])

    @classmethod
    def from_translation(cls, r) -> Transform:
        return cls(np.eye(3), r)

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def inverse(self) -> Transform:
        Rt = self.rotation.T
        return Transform(Rt, -Rt @ self.translation)

    def apply(self, point) -> np.ndarray:
        return self.rotation @ np.asarray(point, dtype=float) + self.translation

    def __matmul__(self, other: Transform) -> Transform:
        return Transform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )


def _vec(xi) -> np.ndarray:
    if isinstance(xi, Twist):
        return xi.vector()
    return np.asarray(xi, dtype=float).reshape(6)


def skew(w) -> np.ndarray:
    """3x3 skew matrix with skew(a) @ b == cross(a, b)"""
    x, y, z = w
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def hat(xi) -> np.ndarray:
    v = _vec(xi)
    m = np.zeros((4, 4))
    m[:3, :3] = skew(v[:3])
    m[:3, 3] = v[3:]
    return m


def vee(m) -> Twist:
    m = np.asarray(m, dtype=float)
    return Twist([m[2, 1], m[0, 2], m[1, 0]], m[:3, 3])


def _exp_coefficients(theta: float) -> tuple[float, float, float]:
    # sin(t)/t, (1-cos t)/t^2, (t-sin t)/t^3
    if theta < _SMALL_ANGLE:
        t2 = theta * theta
        return (
            1.0 - t2 / 6.0 + t2 * t2 / 120.0,
            0.5 - t2 / 24.0 + t2 * t2 / 720.0,
            1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0,
        )
    s = math.sin(theta)
    half = math.sin(0.5 * theta)
    return s / theta, 2.0 * half * half / (theta * theta), (theta - s) / theta**3


def exp_matrix(omega: np.ndarray) -> np.ndarray:
    """Closed-form exponential of a twist vector as a 4x4 matrix"""
    w = omega[:3]
    v = omega[3:]
    theta = math.sqrt(w @ w)
    a, b, c = _exp_coefficients(theta)
    W = skew(w)
    W2 = W @ W
    g = np.eye(4)
    g[:3, :3] = np.eye(3) + a * W + b * W2
    g[:3, 3] = v + b * (W @ v) + c * (W2 @ v)
    return g


def exp_map(omega) -> Transform:
    return Transform.from_matrix(exp_matrix(_vec(omega)))


def adjoint_Ad_matrix(g: np.ndarray) -> np.ndarray:
    R = g[:3, :3]
    out = np.zeros((6, 6))
    out[:3, :3] = R
    out[3:, 3:] = R
    out[3:, :3] = skew(g[:3, 3]) @ R
    return out


def adjoint_Ad(g: Transform) -> np.ndarray:
    return adjoint_Ad_matrix(g.matrix())


def adjoint_ad(xi) -> np.ndarray:
    v = _vec(xi)
    W = skew(v[:3])
    out = np.zeros((6, 6))
    out[:3, :3] = W
    out[3:, 3:] = W
    out[3:, :3] = skew(v[3:])
    return out


def inverse_matrix(g: np.ndarray) -> np.ndarray:
    out = np.eye(4)
    Rt = g[:3, :3].T
    out[:3, :3] = Rt
    out[:3, 3] = -Rt @ g[:3, 3]
    return out


def tangent_operator(omega, max_terms: int = 40) -> np.ndarray:
    """
    Right-trivialized differential of exp: T = sum_k (-ad_omega)^k / (k+1)!.

    exp(omega)^-1 d exp(omega) = (T d_omega)^. The series is summed until the
    next term is below machine precision relative to the identity.
    """
    A = -adjoint_ad(omega)
    total = np.eye(6)
    term = np.eye(6)
    for k in range(1, max_terms):
        term = term @ A / (k + 1)
        total = total + term
        if np.max(np.abs(term)) < 1e-18:
            break
    return total
