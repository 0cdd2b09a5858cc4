"""
Rigid RRR finger (three phalanges plus a fixed fingertip link).

The finger lies in the sagittal x-z plane of its base frame. Every joint
rotates about the base y axis; positive angles flex the chain toward -z,
away from the exosuit mounted above it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..geometry.lie import Transform


@dataclass(frozen=True)
class ContactSphere:
    owner: str  # "rod" | "finger"
    station: int
    center: np.ndarray
    radius: float


@dataclass(frozen=True, eq=False)
class FingerModel:
    link_lengths: tuple[float, ...] = (0.045, 0.0253, 0.0236, 0.001)
    base_radii: tuple[float, ...] = (0.0108, 0.00695, 0.0051, 0.00435)
    tip_radii: tuple[float, ...] = (0.00695, 0.0051, 0.00435, 0.004)
    joint_stiffness: tuple[float, ...] = (0.04, 0.03, 0.02)  # N·m/rad
    joint_limits_deg: tuple[tuple[float, float], ...] = ((-10.0, 90.0), (-5.0, 90.0), (-5.0, 90.0))
    limit_stiffness: float = 10.0  # N·m/rad beyond a limit
    base: Transform = field(default_factory=Transform.identity)

    def __post_init__(self):
        n_links = len(self.link_lengths)
        if not (len(self.base_radii) == len(self.tip_radii) == n_links):
            raise ValueError("link lengths and radii must have the same count")
        if min(self.link_lengths) <= 0 or min(self.base_radii) <= 0 or min(self.tip_radii) <= 0:
            raise ValueError("finger lengths and radii must be strictly positive")
        if len(self.joint_stiffness) != len(self.joint_limits_deg):
            raise ValueError("one stiffness per joint limit is required")
        for lo, hi in self.joint_limits_deg:
            if lo >= hi:
                raise ValueError("joint limit lower bound must be below upper bound")

    @property
    def n_joints(self) -> int:
        return len(self.joint_stiffness)

    @property
    def n_spheres(self) -> int:
        return 2 * len(self.link_lengths)

    @property
    def lower_limits(self) -> np.ndarray:
        return np.radians([lo for lo, _ in self.joint_limits_deg])

    @property
    def upper_limits(self) -> np.ndarray:
        return np.radians([hi for _, hi in self.joint_limits_deg])

    def sphere_stations(self) -> list[tuple[int, float]]:
        """(link index, distance along the link) of C_0 .. C_7: base and CoM of each link"""
        return [(j, t) for j, l in enumerate(self.link_lengths) for t in (0.0, 0.5 * l)]

    def sphere_radius(self, link: int, along: float) -> float:
        frac = along / self.link_lengths[link]
        return self.base_radii[link] + frac * (self.tip_radii[link] - self.base_radii[link])


@dataclass(frozen=True)
class FingerPose:
    joints: np.ndarray  # (n_links + 1, 3) link base points plus the chain end
    links: list[Transform]
    spheres: list[ContactSphere]
    sphere_jacobians: np.ndarray  # (8, 3, n_joints) d center / d theta
    clamped: bool

    @property
    def tip(self) -> np.ndarray:
        return self.joints[-1]

    @property
    def centers(self) -> np.ndarray:
        return np.stack([s.center for s in self.spheres])

    @property
    def radii(self) -> np.ndarray:
        return np.array([s.radius for s in self.spheres])


def _rot_y(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def finger_fk(model: FingerModel, theta) -> FingerPose:
    """Planar serial-chain poses and the eight contact spheres"""
    theta = np.asarray(theta, dtype=float).reshape(model.n_joints)
    clamped = bool(np.any(theta < model.lower_limits) or np.any(theta > model.upper_limits))

    base_R = model.base.rotation
    axis = base_R @ np.array([0.0, 1.0, 0.0])
    point = model.base.translation.copy()
    angle = 0.0
    joints = [point.copy()]
    links: list[Transform] = []
    for j, length in enumerate(model.link_lengths):
        if j < model.n_joints:
            angle += theta[j]
        R = base_R @ _rot_y(angle)
        links.append(Transform(R, point))
        point = point + R[:, 0] * length
        joints.append(point.copy())
    joints_arr = np.stack(joints)

    spheres = []
    jac = np.zeros((model.n_spheres, 3, model.n_joints))
    for i, (link, along) in enumerate(model.sphere_stations()):
        center = links[link].translation + links[link].rotation[:, 0] * along
        spheres.append(ContactSphere("finger", i, center, model.sphere_radius(link, along)))
        # joints proximal to (and including) the link drive the sphere; the
        # fixed tip link rides on the last joint
        for k in range(min(link, model.n_joints - 1) + 1):
            jac[i, :, k] = np.cross(axis, center - joints_arr[k])

    return FingerPose(joints_arr, links, spheres, jac, clamped)


def joint_limit_torque(model: FingerModel, theta) -> np.ndarray:
    """One-sided penalty torques pushing joints back inside their limits"""
    theta = np.asarray(theta, dtype=float)
    over = np.minimum(model.upper_limits - theta, 0.0)
    under = np.maximum(model.lower_limits - theta, 0.0)
    return model.limit_stiffness * (over + under)


def joint_limit_energy(model: FingerModel, theta) -> float:
    """Penalty energy whose negative gradient is joint_limit_torque"""
    theta = np.asarray(theta, dtype=float)
    over = np.minimum(model.upper_limits - theta, 0.0)
    under = np.maximum(model.lower_limits - theta, 0.0)
    return 0.5 * model.limit_stiffness * float(over @ over + under @ under)
