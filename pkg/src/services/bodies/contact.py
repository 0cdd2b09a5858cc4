"""
Sphere-interference contact between rod stations and finger spheres.

For a pair (rod station s, finger sphere i): r_c = c_s - c_i,
d = R_i + R_s - |r_c|. When d > 0 the rod station receives k d r_c/|r_c|
(the load the finger applies to the rod) and the finger sphere the opposite.
Normal force only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from loguru import logger
from scipy import special

from ...core.errors import DegenerateContactError
from ..geometry.rod import RodKinematics, RodModel, kinematics, station_arclengths
from .finger import ContactSphere, FingerModel, FingerPose, finger_fk


@dataclass(frozen=True)
class ContactResult:
    finger_forces: np.ndarray  # (n_finger, 3) load on each finger sphere (N)
    rod_forces: np.ndarray  # (n_rod, 3) load on each rod station (N)
    gaps: np.ndarray  # (n_rod, n_finger) interference depth d, positive = overlap (m)
    energy: float = 0.0  # penalty energy stored in the overlaps (J)

    @property
    def labels(self) -> np.ndarray:
        """Magnitude of the vector-summed load per finger sphere, |f_C0| .. |f_C7|"""
        return np.linalg.norm(self.finger_forces, axis=1)

    @property
    def in_contact(self) -> bool:
        return bool(np.any(self.finger_forces != 0.0))

    @classmethod
    def empty(cls, n_rod: int, n_finger: int) -> ContactResult:
        return cls(np.zeros((n_finger, 3)), np.zeros((n_rod, 3)), np.full((n_rod, n_finger), -np.inf))


def rod_contact_spheres(model: RodModel, q, kin: RodKinematics | None = None) -> list[ContactSphere]:
    """One sphere per integration station: center on the centerline, radius S(X)"""
    if kin is None:
        kin = kinematics(model, q, station_arclengths(model), with_jacobian=False)
    return [
        ContactSphere("rod", s, kin.positions[s].copy(), model.radius_at(X))
        for s, X in enumerate(kin.arclengths)
    ]


def _penetration(d: np.ndarray, smoothing: float) -> np.ndarray:
    if smoothing > 0.0:
        return smoothing * np.logaddexp(0.0, d / smoothing)
    return np.where(d > 0.0, d, 0.0)


def _penetration_energy(d: np.ndarray, smoothing: float) -> np.ndarray:
    """Antiderivative of _penetration in d, zero as d -> -inf"""
    if smoothing <= 0.0:
        depth = np.where(d > 0.0, d, 0.0)
        return 0.5 * depth**2
    x = d / smoothing
    # -Li2(-e^x), folded onto e^-|x| so the argument never overflows
    inner = special.spence(1.0 + np.exp(-np.abs(x)))
    folded = np.where(x > 0.0, np.pi**2 / 6.0 + 0.5 * x**2 + inner, -inner)
    return smoothing**2 * folded


def pairwise_contact(
    rod_spheres: Sequence[ContactSphere],
    finger_spheres: Sequence[ContactSphere],
    k: float,
    exempt: Iterable[int] = (),
    smoothing: float = 0.0,
) -> ContactResult:
    if k <= 0:
        raise ValueError("contact stiffness k must be positive")
    n_rod, n_finger = len(rod_spheres), len(finger_spheres)
    if n_rod == 0 or n_finger == 0:
        return ContactResult.empty(n_rod, n_finger)

    rod_c = np.stack([s.center for s in rod_spheres])
    rod_r = np.array([s.radius for s in rod_spheres])
    fin_c = np.stack([s.center for s in finger_spheres])
    fin_r = np.array([s.radius for s in finger_spheres])

    r_c = rod_c[:, None, :] - fin_c[None, :, :]  # (n_rod, n_finger, 3)
    dist = np.linalg.norm(r_c, axis=2)
    if np.any(dist == 0.0):
        s, i = np.argwhere(dist == 0.0)[0]
        raise DegenerateContactError(int(s), int(i))
    gaps = rod_r[:, None] + fin_r[None, :] - dist

    depth = _penetration(gaps, smoothing)
    stored = _penetration_energy(gaps, smoothing)
    for i in exempt:
        depth[:, i] = 0.0
        stored[:, i] = 0.0
    pair = (k * depth / dist)[:, :, None] * r_c  # load on the rod from each pair

    rod_forces = pair.sum(axis=1)
    finger_forces = -pair.sum(axis=0)
    return ContactResult(finger_forces, rod_forces, gaps, k * float(stored.sum()))


def generalized_forces(
    contact: ContactResult,
    rod_model: RodModel,
    q,
    finger_model: FingerModel,
    theta,
    rod_kin: RodKinematics | None = None,
    finger_pose: FingerPose | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Project contact loads onto generalized coordinates.

    F_rod = sum_s J_s^T [0; R_s^T f_s] (point load at the station origin in
    the body frame), tau_finger = sum_i J_Ci^T f_Ci.
    """
    if rod_kin is None or rod_kin.jacobians is None:
        rod_kin = kinematics(rod_model, q, station_arclengths(rod_model))
    if finger_pose is None:
        finger_pose = finger_fk(finger_model, theta)

    F_rod = np.zeros(rod_model.n_coords)
    active = np.flatnonzero(np.any(contact.rod_forces != 0.0, axis=1))
    for s in active:
        R = rod_kin.poses[s, :3, :3]
        wrench = np.concatenate([np.zeros(3), R.T @ contact.rod_forces[s]])
        F_rod += rod_kin.jacobians[s].T @ wrench

    tau = np.einsum("ijk,ij->k", finger_pose.sphere_jacobians, contact.finger_forces)
    if active.size:
        logger.trace("Contact projected", stations=int(active.size), f_rod=float(np.abs(F_rod).max()))
    return F_rod, tau
