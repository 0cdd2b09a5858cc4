"""
Coupled rod-finger static equilibrium.

Unknowns are x = [q; theta] (22 rod strain coordinates plus 3 finger joint
angles). The residual balances elastic, actuation, contact and joint-limit
generalized forces:

    rows 0..21 : K q - B(q) u - F_rod(q, theta)
    rows 22..24: K_joint theta - tau_contact(q, theta) - tau_limit(theta)

Every term is conservative, so the residual is the gradient of

    V = 1/2 q^T K q - u l(q) + V_contact + 1/2 theta^T K_joint theta + V_limit - f_tip . p_tip

with l the actuation-line length. Equilibria are found by damped Newton
iteration on a forward-difference Jacobian; columns whose step opens or
closes a contact are recomputed by central differences. Sweeps over
actuation warm-start each solve from the previous one, refining the
increment on failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
import pandas as pd
import scipy.linalg
from loguru import logger

from ..core.errors import NoConvergenceError, SingularJacobianError, SweepAbortedError
from .bodies.contact import ContactResult, generalized_forces, pairwise_contact, rod_contact_spheres
from .bodies.finger import FingerModel, FingerPose, finger_fk, joint_limit_energy, joint_limit_torque
from .geometry.lie import Transform
from .geometry.rod import (
    RodKinematics,
    RodModel,
    actuation_line_length,
    actuation_matrix,
    kinematics,
    station_arclengths,
)

FingerMode = Literal["active", "rigid", "removed"]

LINE_SEARCH_HALVINGS = 20
ARMIJO = 1e-4
_MOUNT_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class FingerExosuitSystem:
    """
    Rod and finger mounted in a common world frame.

    finger_mode:
        active  - joints are unknowns, contact acts on both bodies
        rigid   - finger held at theta = 0, contact acts on the rod only
        removed - no finger, no contact (beam benchmarks)
    """

    rod: RodModel
    finger: FingerModel = field(default_factory=FingerModel)
    contact_stiffness: float = 2000.0
    smoothing: float = 0.0
    finger_mode: FingerMode = "active"
    tip_load: np.ndarray | None = None  # world-frame point load at the rod tip (N)
    exempt: tuple[int, ...] = (0,)

    @property
    def n_rod(self) -> int:
        return self.rod.n_coords

    @property
    def n_joints(self) -> int:
        return self.finger.n_joints if self.finger_mode == "active" else 0

    @property
    def n_dof(self) -> int:
        return self.n_rod + self.n_joints

    def split(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        q = x[: self.n_rod]
        if self.finger_mode == "active":
            return q, x[self.n_rod :]
        return q, np.zeros(self.finger.n_joints)

    def pack(self, q, theta) -> np.ndarray:
        q = np.asarray(q, dtype=float).reshape(self.n_rod)
        if self.finger_mode != "active":
            return q.copy()
        return np.concatenate([q, np.asarray(theta, dtype=float).reshape(self.finger.n_joints)])


@dataclass(frozen=True)
class SystemState:
    q: np.ndarray
    theta: np.ndarray
    u: float
    contact: ContactResult | None = None
    residual_norm: float = 0.0
    iterations: int = 0
    converged: bool = True

    @property
    def labels(self) -> np.ndarray:
        return state_labels(self)

    @property
    def f_net(self) -> float:
        return net_force(self)


@dataclass
class SweepResult:
    """States in schedule order; failed_index marks where an aborted sweep stopped"""

    schedule: list[float]
    states: list[SystemState] = field(default_factory=list)
    failed_index: int | None = None

    @property
    def complete(self) -> bool:
        return self.failed_index is None and len(self.states) == len(self.schedule)

    @property
    def converged(self) -> list[bool]:
        return [s.converged for s in self.states]

    @property
    def net_forces(self) -> np.ndarray:
        return np.array([net_force(s) for s in self.states])


@dataclass(frozen=True)
class Evaluation:
    residual: np.ndarray
    contact: ContactResult | None
    rod_kin: RodKinematics
    finger_pose: FingerPose | None
    energy: float = 0.0


def _active_pairs(system: FingerExosuitSystem, ev: Evaluation) -> np.ndarray:
    """Overlapping non-exempt pairs; the residual has a kink where this set changes"""
    if ev.contact is None:
        return np.zeros(0, dtype=bool)
    overlap = ev.contact.gaps > 0.0
    overlap[:, list(system.exempt)] = False
    return overlap.ravel()


def zero_state(system: FingerExosuitSystem, u: float = 0.0) -> SystemState:
    return SystemState(np.zeros(system.n_rod), np.zeros(system.finger.n_joints), float(u))


def state_labels(state: SystemState) -> np.ndarray:
    """|f_C0| .. |f_C7| (N); zeros without a finger"""
    if state.contact is None:
        return np.zeros(8)
    return state.contact.labels


def net_force(state: SystemState) -> float:
    """Sum of contact magnitudes on C_1 .. C_7"""
    return float(np.sum(state_labels(state)[1:]))


def mount_system(
    rod: RodModel,
    finger: FingerModel | None = None,
    contact_stiffness: float = 2000.0,
    smoothing: float = 0.0,
    finger_mode: FingerMode = "active",
    tip_load=None,
) -> FingerExosuitSystem:
    """
    Clamp the rod base above the straight finger, parallel to it.

    The base sits at height S(0) + R_C0 over the finger base; it is raised
    further when any of C_1 .. C_7 would start in interference with the
    unactuated rod.
    """
    finger = finger or FingerModel()
    height = rod.radius_at(0.0) + finger.base_radii[0]
    pose = finger_fk(finger, np.zeros(finger.n_joints))
    stations = station_arclengths(rod)
    exempt = (0,)

    for _ in range(50):
        mounted = rod.with_base(Transform(np.eye(3), finger.base.translation + np.array([0.0, 0.0, height])))
        rod_spheres = rod_contact_spheres(
            mounted, np.zeros(rod.n_coords), kinematics(mounted, np.zeros(rod.n_coords), stations, with_jacobian=False)
        )
        gaps = pairwise_contact(rod_spheres, pose.spheres, contact_stiffness).gaps
        gaps[:, list(exempt)] = -np.inf
        worst = float(gaps.max())
        if worst <= 0.0:
            break
        height += worst + _MOUNT_SLACK
    else:
        raise ValueError("could not find an interference-free mounting height")

    logger.debug("Rod mounted", height=height, raised=height - rod.radius_at(0.0) - finger.base_radii[0])
    load = None if tip_load is None else np.asarray(tip_load, dtype=float).reshape(3)
    return FingerExosuitSystem(
        rod=mounted,
        finger=finger,
        contact_stiffness=contact_stiffness,
        smoothing=smoothing,
        finger_mode=finger_mode,
        tip_load=load,
        exempt=exempt,
    )


def _tip_force(system: FingerExosuitSystem, kin: RodKinematics) -> np.ndarray:
    R = kin.poses[-1, :3, :3]
    wrench = np.concatenate([np.zeros(3), R.T @ system.tip_load])
    return kin.jacobians[-1].T @ wrench


def evaluate(system: FingerExosuitSystem, x: np.ndarray, u: float) -> Evaluation:
    """Residual plus the contact and pose data it was built from"""
    q, theta = system.split(x)
    rod = system.rod
    stations = station_arclengths(rod)
    targets = np.append(stations, rod.length)
    needs_tip = system.tip_load is not None

    kin = kinematics(rod, q, targets, with_jacobian=needs_tip)
    station_kin = RodKinematics(kin.arclengths[:-1], kin.poses[:-1], None if kin.jacobians is None else kin.jacobians[:-1])

    r_rod = rod.stiffness @ q - actuation_matrix(rod, q) * u
    energy = 0.5 * float(q @ rod.stiffness @ q) - u * actuation_line_length(rod, q)
    r_fin = np.zeros(system.n_joints)
    contact = None
    pose = None

    if system.finger_mode != "removed":
        pose = finger_fk(system.finger, theta)
        contact = pairwise_contact(
            rod_contact_spheres(rod, q, station_kin),
            pose.spheres,
            system.contact_stiffness,
            exempt=system.exempt,
            smoothing=system.smoothing,
        )
        if contact.in_contact:
            if station_kin.jacobians is None:
                kin = kinematics(rod, q, targets)
                station_kin = RodKinematics(kin.arclengths[:-1], kin.poses[:-1], kin.jacobians[:-1])
            F_rod, tau = generalized_forces(contact, rod, q, system.finger, theta, station_kin, pose)
            r_rod = r_rod - F_rod
        else:
            tau = np.zeros(system.finger.n_joints)
        energy += contact.energy
        if system.finger_mode == "active":
            stiffness = np.asarray(system.finger.joint_stiffness)
            r_fin = stiffness * theta - tau - joint_limit_torque(system.finger, theta)
            energy += 0.5 * float(stiffness @ theta**2) + joint_limit_energy(system.finger, theta)

    if needs_tip:
        r_rod = r_rod - _tip_force(system, kin)
        energy -= float(system.tip_load @ kin.poses[-1, :3, 3])

    return Evaluation(np.concatenate([r_rod, r_fin]), contact, station_kin, pose, energy)


def potential_energy(system: FingerExosuitSystem, state: SystemState) -> float:
    """V(q, theta; u), the function whose gradient is the residual"""
    return evaluate(system, system.pack(state.q, state.theta), state.u).energy


def residual(system: FingerExosuitSystem, state: SystemState) -> np.ndarray:
    return evaluate(system, system.pack(state.q, state.theta), state.u).residual


def fd_jacobian(system: FingerExosuitSystem, x: np.ndarray, u: float, base: Evaluation, step: float) -> np.ndarray:
    """
    Forward differences of the residual about `base`.

    A column whose step changes the set of overlapping pairs straddles a
    kink of the penalty; it is replaced by the central difference.
    """
    r0 = base.residual
    active = _active_pairs(system, base)
    jac = np.empty((r0.size, x.size))
    for j in range(x.size):
        xp = x.copy()
        xp[j] += step
        ahead = evaluate(system, xp, u)
        if np.array_equal(_active_pairs(system, ahead), active):
            jac[:, j] = (ahead.residual - r0) / step
            continue
        xm = x.copy()
        xm[j] -= step
        jac[:, j] = (ahead.residual - evaluate(system, xm, u).residual) / (2.0 * step)
    return jac


def solve_equilibrium(
    system: FingerExosuitSystem,
    u: float,
    guess: SystemState | None = None,
    tol: float = 1e-8,
    max_iters: int = 100,
    fd_step: float = 1e-7,
) -> SystemState:
    """
    Damped Newton iteration from `guess` (zero state by default).

    Converged when the infinity norm of the residual drops below tol. Each
    step is halved up to 20 times until either the residual 2-norm decreases
    or the potential satisfies the Armijo condition. The residual is only
    piecewise smooth at contact onset while the potential is C1, so the
    potential test is what lets a step cross into contact.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    u = float(u)
    guess = guess or zero_state(system, u)
    x = system.pack(guess.q, guess.theta)
    ev = evaluate(system, x, u)
    norm = float(np.max(np.abs(ev.residual)))

    for it in range(max_iters + 1):
        if norm < tol:
            q, theta = system.split(x)
            logger.debug("Equilibrium found", u=u, iterations=it, residual=norm)
            return SystemState(q.copy(), theta.copy(), u, ev.contact, norm, it, True)
        if it == max_iters:
            break

        jac = fd_jacobian(system, x, u, ev, fd_step)
        try:
            dx = scipy.linalg.solve(jac, -ev.residual)
        except (scipy.linalg.LinAlgError, ValueError) as e:
            raise SingularJacobianError(f"newton step failed at u={u}: {e}") from e
        if not np.all(np.isfinite(dx)):
            raise SingularJacobianError(f"newton step is not finite at u={u}")

        merit = float(np.linalg.norm(ev.residual))
        slope = float(ev.residual @ dx)  # dV/dalpha at alpha = 0
        alpha = 1.0
        for _ in range(LINE_SEARCH_HALVINGS + 1):
            trial = x + alpha * dx
            try:
                trial_ev = evaluate(system, trial, u)
            except ValueError:
                # overshoot produced an invalid pose (e.g. non-finite strain)
                trial_ev = None
            if trial_ev is not None:
                if np.linalg.norm(trial_ev.residual) < merit:
                    break
                if slope < 0.0 and trial_ev.energy <= ev.energy + ARMIJO * alpha * slope:
                    break
            alpha *= 0.5
        else:
            raise NoConvergenceError("line search exhausted", it + 1, norm)

        x, ev = trial, trial_ev
        norm = float(np.max(np.abs(ev.residual)))
        logger.trace("Newton step", u=u, iteration=it + 1, alpha=alpha, residual=norm)

    raise NoConvergenceError(f"u={u}", max_iters, norm)


def triangular_schedule(u_max: float = 4.0, increment: float = 0.1) -> list[float]:
    """0 -> u_max -> 0 in steps of `increment`"""
    if increment <= 0:
        raise ValueError("increment must be positive")
    n = int(round(abs(u_max) / increment))
    up = [round(k * increment * math.copysign(1.0, u_max), 12) for k in range(n + 1)]
    return up + up[-2::-1]


def _advance(
    system: FingerExosuitSystem,
    start: SystemState,
    target: float,
    increment: float,
    max_halvings: int,
    **solve_kw,
) -> SystemState:
    """Walk from start.u to target in steps no longer than increment, halving on failure"""
    state = start
    step = increment
    halvings = 0
    while True:
        remaining = target - state.u
        if abs(remaining) <= 1e-12:
            if state.u != target:
                state = solve_equilibrium(system, target, state, **solve_kw)
            return state
        du = math.copysign(min(step, abs(remaining)), remaining)
        u_next = target if abs(remaining) <= step else state.u + du
        try:
            state = solve_equilibrium(system, u_next, state, **solve_kw)
        except (NoConvergenceError, SingularJacobianError) as e:
            if halvings >= max_halvings:
                raise
            halvings += 1
            step *= 0.5
            logger.debug("Refining continuation step", u=state.u, target=target, step=step, reason=str(e))


def actuation_sweep(
    system: FingerExosuitSystem,
    schedule: Sequence[float],
    tol: float = 1e-8,
    max_iters: int = 100,
    increment: float = 0.1,
    max_halvings: int = 4,
    fd_step: float = 1e-7,
    start: SystemState | None = None,
) -> SweepResult:
    """
    Solve equilibria along `schedule`, warm-starting each from the last.

    Raises SweepAbortedError carrying the partial result if a step fails
    after every refinement.
    """
    schedule = [float(u) for u in schedule]
    if not schedule:
        raise ValueError("schedule must be nonempty")
    result = SweepResult(schedule)
    solve_kw = {"tol": tol, "max_iters": max_iters, "fd_step": fd_step}

    state = start or solve_equilibrium(system, 0.0, zero_state(system), **solve_kw)
    for i, u in enumerate(schedule):
        try:
            state = _advance(system, state, u, increment, max_halvings, **solve_kw)
        except (NoConvergenceError, SingularJacobianError) as e:
            result.failed_index = i
            logger.warning("Sweep aborted", index=i, u=u, reason=str(e))
            raise SweepAbortedError(i, u, result) from e
        result.states.append(state)

    logger.debug("Sweep finished", steps=len(schedule), f_net_max=float(result.net_forces.max()))
    return result


def with_tip_load(system: FingerExosuitSystem, load) -> FingerExosuitSystem:
    return replace(system, tip_load=np.asarray(load, dtype=float).reshape(3))


def rod_tip_z(system: FingerExosuitSystem, state: SystemState) -> float:
    kin = kinematics(system.rod, state.q, [system.rod.length], with_jacobian=False)
    return float(kin.positions[0, 2])


def finger_tip_z(system: FingerExosuitSystem, state: SystemState) -> float:
    return float(finger_fk(system.finger, state.theta).tip[2])


def write_sweep_trace(result: SweepResult, path: str | Path) -> Path:
    """CSV: u, iterations, residual, F_net, q0.., theta0.."""
    rows = []
    for s in result.states:
        row = {"u": s.u, "iterations": s.iterations, "residual": s.residual_norm, "F_net": net_force(s)}
        row.update({f"q{i}": v for i, v in enumerate(s.q)})
        row.update({f"theta{i}": v for i, v in enumerate(s.theta)})
        rows.append(row)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows).to_csv(path, index=False, float_format="%.12g")
    return path
