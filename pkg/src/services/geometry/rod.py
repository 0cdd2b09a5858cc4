"""
Geometric-variable-strain model of the exosuit rod.

The strain field is xi(X) = Phi(X) q + xi*, with a nodal quadratic basis on
equal elements for two active components: bending about local y (row 1) and
extension along local x (row 3). q is laid out component-major:
q[:n_nodes] are nodal bending strains (1/m), q[n_nodes:] nodal axial strains.

Poses come from a recursive product of exponentials of a two-point
Gauss-Legendre (fourth order) Magnus approximation; the geometric Jacobian is
propagated through the same recursion, so it is the exact derivative of the
discrete kinematics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .lie import (
    Transform,
    Twist,
    adjoint_Ad_matrix,
    adjoint_ad,
    exp_matrix,
    inverse_matrix,
    tangent_operator,
)

MIN_RADIUS = 0.004
BENDING_ROW = 1
EXTENSION_ROW = 3
REFERENCE_STRAIN = np.array([0.0, 0.0, 0.0, 1.0, 0.0, 0.0])

_GAUSS2 = (0.5 - math.sqrt(3.0) / 6.0, 0.5 + math.sqrt(3.0) / 6.0)
_MAGNUS_C = math.sqrt(3.0) / 12.0
_RANGE_TOL = 1e-12


@dataclass(frozen=True)
class StrainBasis:
    n_elements: int = 5
    quadrature_points: int = 3

    @property
    def n_nodes(self) -> int:
        return 2 * self.n_elements + 1

    @property
    def n_coords(self) -> int:
        return 2 * self.n_nodes

    def element_of(self, x_l: float) -> tuple[int, float]:
        scaled = x_l * self.n_elements
        e = min(int(math.floor(scaled)), self.n_elements - 1)
        return e, scaled - e

    def shape_values(self, x_l: float) -> np.ndarray:
        """Quadratic Lagrange shape functions of every node at normalized X_L"""
        e, z = self.element_of(x_l)
        values = np.zeros(self.n_nodes)
        values[2 * e] = 2.0 * (z - 0.5) * (z - 1.0)
        values[2 * e + 1] = 4.0 * z * (1.0 - z)
        values[2 * e + 2] = 2.0 * z * (z - 0.5)
        return values

    def matrix(self, x_l: float) -> np.ndarray:
        """Phi_xi(X): 6 x n with exactly the bending and extension rows populated"""
        N = self.shape_values(x_l)
        phi = np.zeros((6, self.n_coords))
        phi[BENDING_ROW, : self.n_nodes] = N
        phi[EXTENSION_ROW, self.n_nodes :] = N
        return phi

    def boundaries(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_elements + 1)

    def abscissae(self) -> tuple[np.ndarray, np.ndarray]:
        """Normalized Gauss-Legendre abscissae and weights over all elements"""
        t, w = np.polynomial.legendre.leggauss(self.quadrature_points)
        h = 1.0 / self.n_elements
        xs = np.concatenate([(e + 0.5 * (t + 1.0)) * h for e in range(self.n_elements)])
        ws = np.tile(0.5 * w * h, self.n_elements)
        return xs, ws


def constant_radius(r: float) -> Callable[[float], float]:
    return _ConstantRadius(r)


@dataclass(frozen=True)
class _ConstantRadius:
    r: float

    def __call__(self, x_l: float) -> float:
        return self.r


@dataclass(frozen=True, eq=False)
class RodModel:
    """Exosuit rod: geometry, material, strain basis and mounting pose"""

    length: float
    radius: Callable[[float], float]  # S(X_L), X_L in [0, 1]
    youngs_modulus: float = 30e3
    shear_modulus: float | None = None
    basis: StrainBasis = field(default_factory=StrainBasis)
    base: Transform = field(default_factory=Transform.identity)
    n_steps: int = 21

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("rod length must be positive")
        if self.shear_modulus is None:
            # incompressible elastomer, nu = 0.5
            object.__setattr__(self, "shear_modulus", self.youngs_modulus / 3.0)
        for x_l in np.linspace(0.0, 1.0, 51):
            if self.radius(float(x_l)) < MIN_RADIUS - 1e-12:
                raise ValueError(f"radius below {MIN_RADIUS} m at X_L={x_l:.2f}")

    @property
    def n_coords(self) -> int:
        return self.basis.n_coords

    def radius_at(self, X: float) -> float:
        return float(self.radius(min(max(X / self.length, 0.0), 1.0)))

    def radius_slope(self, X: float) -> float:
        """dS/dX (dimensionless) by central difference in X_L"""
        x_l = X / self.length
        lo, hi = max(x_l - 1e-6, 0.0), min(x_l + 1e-6, 1.0)
        return (self.radius(hi) - self.radius(lo)) / ((hi - lo) * self.length)

    def section(self, X: float) -> tuple[float, float]:
        """Cross-section area and second moment about y"""
        s = self.radius_at(X)
        return math.pi * s * s, math.pi * s**4 / 4.0

    def with_base(self, base: Transform) -> RodModel:
        return RodModel(
            length=self.length,
            radius=self.radius,
            youngs_modulus=self.youngs_modulus,
            shear_modulus=self.shear_modulus,
            basis=self.basis,
            base=base,
            n_steps=self.n_steps,
        )

    @cached_property
    def stiffness(self) -> np.ndarray:
        return stiffness_matrix(self)


def _check_range(model: RodModel, X: float) -> None:
    if X < -_RANGE_TOL or X > model.length + _RANGE_TOL:
        raise ValueError(f"arclength X={X} outside [0, {model.length}]")


def _strain_vector(model: RodModel, q: np.ndarray, X: float) -> tuple[np.ndarray, np.ndarray]:
    phi = model.basis.matrix(min(max(X / model.length, 0.0), 1.0))
    return phi @ q + REFERENCE_STRAIN, phi


def strain_at(model: RodModel, q, X: float) -> Twist:
    _check_range(model, X)
    xi, _ = _strain_vector(model, np.asarray(q, dtype=float), X)
    return Twist.from_vector(xi)


def station_arclengths(model: RodModel) -> np.ndarray:
    """Two Gauss points per integration step: 2 * n_steps contact stations"""
    h = model.length / model.n_steps
    starts = np.arange(model.n_steps) * h
    return np.sort(np.concatenate([starts + _GAUSS2[0] * h, starts + _GAUSS2[1] * h]))


@dataclass(frozen=True)
class RodKinematics:
    arclengths: np.ndarray  # (k,)
    poses: np.ndarray  # (k, 4, 4) world frame
    jacobians: np.ndarray | None  # (k, 6, n) body frame

    @property
    def positions(self) -> np.ndarray:
        return self.poses[:, :3, 3]


def kinematics(model: RodModel, q, targets: Sequence[float], with_jacobian: bool = True) -> RodKinematics:
    """Poses (world frame) and body Jacobians at sorted arclengths"""
    q = np.asarray(q, dtype=float)
    targets = np.asarray(targets, dtype=float).reshape(-1)
    if targets.size and (np.any(np.diff(targets) < 0)):
        raise ValueError("kinematics targets must be sorted")
    for X in (targets[:1].tolist() + targets[-1:].tolist()):
        _check_range(model, X)
    targets = np.clip(targets, 0.0, model.length)

    L = model.length
    n = model.n_coords
    breaks = np.unique(np.concatenate([[0.0], model.basis.boundaries() * L, targets]))
    wanted = np.searchsorted(breaks, targets)
    h_max = L / model.n_steps

    g = np.eye(4)
    J = np.zeros((6, n))
    g_at = [g]
    J_at = [J]
    for a, b in zip(breaks[:-1], breaks[1:]):
        n_sub = max(1, math.ceil((b - a) / h_max - 1e-9))
        h = (b - a) / n_sub
        for k in range(n_sub):
            x0 = a + k * h
            xi1, phi1 = _strain_vector(model, q, x0 + _GAUSS2[0] * h)
            xi2, phi2 = _strain_vector(model, q, x0 + _GAUSS2[1] * h)
            ad1 = adjoint_ad(xi1)
            omega = 0.5 * h * (xi1 + xi2) + _MAGNUS_C * h * h * (ad1 @ xi2)
            step = exp_matrix(omega)
            g = g @ step
            if with_jacobian:
                d_omega = 0.5 * h * (phi1 + phi2) + _MAGNUS_C * h * h * (
                    ad1 @ phi2 - adjoint_ad(xi2) @ phi1
                )
                J = adjoint_Ad_matrix(inverse_matrix(step)) @ J + tangent_operator(omega) @ d_omega
        g_at.append(g)
        J_at.append(J)

    base = model.base.matrix()
    poses = np.stack([base @ g_at[i] for i in wanted]) if targets.size else np.zeros((0, 4, 4))
    jacobians = None
    if with_jacobian:
        jacobians = np.stack([J_at[i] for i in wanted]) if targets.size else np.zeros((0, 6, n))
    return RodKinematics(targets, poses, jacobians)


def forward_kinematics(model: RodModel, q, X_targets: Sequence[float]) -> list[Transform]:
    kin = kinematics(model, q, X_targets, with_jacobian=False)
    return [Transform.from_matrix(p) for p in kin.poses]


def jacobian(model: RodModel, q, X: float) -> np.ndarray:
    """Body-frame geometric Jacobian J(q, X), eta = J q_dot"""
    _check_range(model, X)
    return kinematics(model, q, [X]).jacobians[0]


def stiffness_matrix(model: RodModel) -> np.ndarray:
    """K = int Phi^T Sigma Phi dX, Sigma = diag(E I_y, E A) on the active rows"""
    basis = model.basis
    m = basis.n_nodes
    E = model.youngs_modulus
    xs, ws = basis.abscissae()
    K = np.zeros((basis.n_coords, basis.n_coords))
    for x_l, w in zip(xs, ws):
        N = basis.shape_values(x_l)
        area, inertia = model.section(x_l * model.length)
        outer = np.outer(N, N)
        K[:m, :m] += (w * model.length * E * inertia) * outer
        K[m:, m:] += (w * model.length * E * area) * outer
    return K


def actuation_matrix(model: RodModel, q) -> np.ndarray:
    """
    Generalized force per unit actuation of the line at d(X) = (0, 0, +S(X)).

    B(q) = int Phi^T [d x t_c; t_c] dX with t_c the unit tangent of the offset
    curve in the local frame; B is the gradient of the actuation-line length,
    so u > 0 lengthens the line and bends the rod toward local -z.
    """
    q = np.asarray(q, dtype=float)
    basis = model.basis
    m = basis.n_nodes
    xs, ws = basis.abscissae()
    B = np.zeros(basis.n_coords)
    for x_l, w in zip(xs, ws):
        X = x_l * model.length
        N = basis.shape_values(x_l)
        kappa = N @ q[:m]
        stretch = 1.0 + N @ q[m:]
        s = model.radius_at(X)
        tangent = np.array([stretch + kappa * s, 0.0, model.radius_slope(X)])
        tangent /= np.linalg.norm(tangent)
        # d x t_c has only a y component: S * t_x
        B[:m] += (w * model.length * s * tangent[0]) * N
        B[m:] += (w * model.length * tangent[0]) * N
    return B


def actuation_line_length(model: RodModel, q) -> float:
    """Length of the offset curve at d(X) = (0, 0, +S(X)); B(q) is its gradient"""
    q = np.asarray(q, dtype=float)
    basis = model.basis
    m = basis.n_nodes
    xs, ws = basis.abscissae()
    total = 0.0
    for x_l, w in zip(xs, ws):
        X = x_l * model.length
        N = basis.shape_values(x_l)
        s = model.radius_at(X)
        total += w * model.length * math.hypot(1.0 + N @ q[m:] + (N @ q[:m]) * s, model.radius_slope(X))
    return total
