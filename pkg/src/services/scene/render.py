"""
Orthographic sagittal-plane renderer.

World (x, z) is mapped onto a square pixel grid; row 0 is the top (z_max),
column 0 the left (x_min). A pixel is inside a polygon when its center is,
decided by an even-odd scanline fill with half-open edge spans so shared
edges are never filled twice.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ...models.config import RenderSection
from ..bodies.finger import FingerModel, finger_fk
from ..geometry.rod import RodModel, kinematics

ROD_SAMPLES = 96
DISC_SEGMENTS = 24


@dataclass(frozen=True)
class RenderWindow:
    x_min: float = -0.02
    x_max: float = 0.13
    z_min: float = -0.09
    z_max: float = 0.06
    size: int = 128

    @classmethod
    def from_config(cls, section: RenderSection) -> RenderWindow:
        return cls(section.x_min, section.x_max, section.z_min, section.z_max, section.size)

    @property
    def pitch_x(self) -> float:
        return (self.x_max - self.x_min) / self.size

    @property
    def pitch_z(self) -> float:
        return (self.z_max - self.z_min) / self.size

    def shifted(self, dx: float = 0.0, dz: float = 0.0) -> RenderWindow:
        return RenderWindow(self.x_min + dx, self.x_max + dx, self.z_min + dz, self.z_max + dz, self.size)

    def pixel_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """World x of every column and world z of every row"""
        idx = np.arange(self.size) + 0.5
        return self.x_min + idx * self.pitch_x, self.z_max - idx * self.pitch_z


@dataclass(frozen=True)
class Layer:
    polygons: list[np.ndarray]  # each (k, 2) as (x, z)
    level: float


def fill_polygon(polygon: np.ndarray, window: RenderWindow) -> np.ndarray:
    """Boolean mask of pixels whose centers fall inside `polygon` (even-odd)"""
    mask = np.zeros((window.size, window.size), dtype=bool)
    poly = np.asarray(polygon, dtype=float)
    if poly.shape[0] < 3:
        return mask
    x0, z0 = poly[:, 0], poly[:, 1]
    x1, z1 = np.roll(x0, -1), np.roll(z0, -1)

    _, zc = window.pixel_centers()
    zc = zc[:, None]
    crosses = ((z0 <= zc) & (zc < z1)) | ((z1 <= zc) & (zc < z0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (zc - z0) / (z1 - z0)
    xs = np.where(crosses, x0 + t * (x1 - x0), np.inf)
    xs.sort(axis=1)

    cols = np.arange(window.size)
    max_crossings = int(crosses.sum(axis=1).max())
    for k in range(0, max_crossings - 1, 2):
        xa, xb = xs[:, k], xs[:, k + 1]
        valid = np.isfinite(xb)
        c0 = np.ceil((xa - window.x_min) / window.pitch_x - 0.5)
        c1 = np.ceil((xb - window.x_min) / window.pitch_x - 0.5)
        span = (cols >= c0[:, None]) & (cols < c1[:, None]) & valid[:, None]
        mask ^= span
    return mask


def rasterize(layers: Sequence[Layer], window: RenderWindow, background: float = 0.0) -> np.ndarray:
    """Paint layers in order; later layers overdraw earlier ones"""
    image = np.full((window.size, window.size), background, dtype=float)
    for layer in layers:
        covered = np.zeros_like(image, dtype=bool)
        for poly in layer.polygons:
            covered |= fill_polygon(poly, window)
        image[covered] = layer.level
    return image


def _disc(center: np.ndarray, radius: float) -> np.ndarray:
    angles = np.linspace(0.0, 2.0 * np.pi, DISC_SEGMENTS, endpoint=False)
    return np.column_stack([center[0] + radius * np.cos(angles), center[1] + radius * np.sin(angles)])


def _strip(points: np.ndarray, normals: np.ndarray, radii: np.ndarray) -> list[np.ndarray]:
    """Quads between consecutive samples of a centerline offset by +-radius along normals"""
    upper = points + radii[:, None] * normals
    lower = points - radii[:, None] * normals
    return [
        np.array([lower[i], lower[i + 1], upper[i + 1], upper[i]])
        for i in range(len(points) - 1)
    ]


def rod_polygons(rod: RodModel, q) -> list[np.ndarray]:
    X = np.linspace(0.0, rod.length, ROD_SAMPLES)
    kin = kinematics(rod, q, X, with_jacobian=False)
    points = kin.positions[:, [0, 2]]
    normals = kin.poses[:, [0, 2], 2]
    normals = normals / np.linalg.norm(normals, axis=1, keepdims=True)
    radii = np.array([rod.radius_at(x) for x in X])
    return _strip(points, normals, radii)


def finger_polygons(finger: FingerModel, theta) -> list[np.ndarray]:
    """Each link as a tapered capsule: a trapezoid plus discs at both ends"""
    pose = finger_fk(finger, theta)
    polygons = []
    for j in range(len(pose.links)):
        a = pose.joints[j][[0, 2]]
        b = pose.joints[j + 1][[0, 2]]
        axis = b - a
        normal = np.array([-axis[1], axis[0]]) / np.linalg.norm(axis)
        r_a, r_b = finger.base_radii[j], finger.tip_radii[j]
        polygons.append(np.array([a - r_a * normal, b - r_b * normal, b + r_b * normal, a + r_a * normal]))
        polygons.append(_disc(a, r_a))
        polygons.append(_disc(b, r_b))
    return polygons


def scene_layers(
    rod: RodModel | None,
    q,
    finger: FingerModel | None,
    theta,
    levels: RenderSection | None = None,
) -> list[Layer]:
    levels = levels or RenderSection()
    layers = []
    if finger is not None:
        layers.append(Layer(finger_polygons(finger, theta), levels.finger_level))
    if rod is not None:
        layers.append(Layer(rod_polygons(rod, q), levels.exosuit_level))
    return layers


def render_scene(
    rod: RodModel | None = None,
    q=None,
    finger: FingerModel | None = None,
    theta=None,
    window: RenderWindow | None = None,
    levels: RenderSection | None = None,
) -> np.ndarray:
    """128 x 128 grayscale frame; the exosuit is drawn over the finger"""
    levels = levels or RenderSection()
    window = window or RenderWindow.from_config(levels)
    if rod is not None and q is None:
        q = np.zeros(rod.n_coords)
    if finger is not None and theta is None:
        theta = np.zeros(finger.n_joints)
    return rasterize(scene_layers(rod, q, finger, theta, levels), window, levels.background_level)


def render_state(system, state, window: RenderWindow | None = None, levels: RenderSection | None = None) -> np.ndarray:
    """Render a solved FingerExosuitSystem state"""
    finger = None if system.finger_mode == "removed" else system.finger
    return render_scene(system.rod, state.q, finger, state.theta, window, levels)
