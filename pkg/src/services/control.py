"""
Closed-loop force control with the estimator as a force sensor.

Each step k solves the plant at u_k, measures F_net (estimator or oracle),
and applies the incremental proportional law u_{k+1} = u_k + K_P e_k with
e_k = F_t(k) - F_net. Both measurements are recorded on every step.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd
from loguru import logger

from ..core.errors import SweepAbortedError
from ..models.config import ControlSection, RenderSection
from ..models.control import ControlConfig, ControlStep
from .estimator.network import NetworkParams, predict_forces
from .scene.pgm import write_pgm
from .scene.render import RenderWindow, render_state
from .statics import FingerExosuitSystem, SystemState, actuation_sweep, solve_equilibrium, zero_state


def f_net(forces) -> float:
    """Sum of the seven contact-force magnitudes on C_1 .. C_7"""
    forces = np.asarray(forces, dtype=float)
    if np.any(forces < 0):
        raise ValueError("contact-force magnitudes must be nonnegative")
    return float(forces.sum())


def control_step(u_prev: float, f_target: float, f_meas: float, kp: float) -> tuple[float, float]:
    """Returns (u_k, e_k)"""
    error = f_target - f_meas
    return u_prev + kp * error, error


@dataclass
class ControlTrace:
    config: ControlConfig
    steps: list[ControlStep] = field(default_factory=list)
    stuck: bool = False
    diverged: bool = False

    @property
    def settled_at(self) -> int | None:
        """First step opening a run of settle_count steps with |e| < settle_tol"""
        run = 0
        for row in self.steps:
            run = run + 1 if abs(row.error) < self.config.settle_tol else 0
            if run >= self.config.settle_count:
                return row.step - self.config.settle_count + 1
        return None

    @property
    def actuations(self) -> np.ndarray:
        return np.array([s.u for s in self.steps])

    @property
    def oracle_forces(self) -> np.ndarray:
        return np.array([s.f_net_oracle for s in self.steps])


def _clip(u: float, config: ControlConfig) -> float:
    lo = -np.inf if config.u_min is None else config.u_min
    hi = np.inf if config.u_max is None else config.u_max
    return float(min(max(u, lo), hi))


def run_experiment(
    config: ControlConfig,
    system: FingerExosuitSystem,
    net: NetworkParams | None = None,
    render: RenderSection | None = None,
    snapshot_dir: str | Path | None = None,
    snapshot_every: int = 0,
    tol: float = 1e-8,
    max_iters: int = 100,
    increment: float = 0.1,
    max_halvings: int = 4,
) -> ControlTrace:
    """
    Run one closed-loop experiment starting from rest (u_0 = 0).

    A plant solve that fails after every refinement freezes u at the last
    converged actuation for the rest of the run and flags the trace stuck.
    |u| beyond u_abort stops the loop and flags it diverged.
    """
    if config.feedback == "estimator" and net is None:
        raise ValueError("estimator feedback needs trained network parameters")
    render = render or RenderSection()
    window = RenderWindow.from_config(render)
    trace = ControlTrace(config)
    solve_kw = {"tol": tol, "max_iters": max_iters, "increment": increment, "max_halvings": max_halvings}

    state: SystemState = solve_equilibrium(system, 0.0, zero_state(system), tol=tol, max_iters=max_iters)
    u = 0.0
    for k, target in enumerate(config.targets):
        converged = True
        if not trace.stuck:
            try:
                state = actuation_sweep(system, [u], start=state, **solve_kw).states[-1]
            except SweepAbortedError:
                converged = False
                trace.stuck = True
                logger.warning("Plant solve failed, actuation frozen", experiment=config.name, step=k, u=u)
        u = state.u

        snapshot = bool(snapshot_dir) and snapshot_every > 0 and k % snapshot_every == 0
        image = render_state(system, state, window, render) if (net is not None or snapshot) else None
        f_oracle = state.f_net
        f_est = f_net(predict_forces(net, image)) if net is not None else None
        f_meas = f_est if config.feedback == "estimator" else f_oracle

        if trace.stuck:
            u_next, error = u, target - f_meas
        else:
            u_next, error = control_step(u, target, f_meas, config.kp)
            u_next = _clip(u_next, config)

        image_ref = None
        if snapshot:
            image_ref = write_pgm(image, Path(snapshot_dir) / f"{config.name}_{k:04d}.pgm").name

        trace.steps.append(
            ControlStep(
                step=k,
                t=k * config.period,
                target=target,
                u=u,
                u_next=u_next,
                f_net_estimator=f_est,
                f_net_oracle=f_oracle,
                error=error,
                converged=converged,
                frozen=trace.stuck,
                image=image_ref,
            )
        )
        logger.debug("Control step", experiment=config.name, step=k, u=u, error=error, f_net=f_meas)

        if abs(u_next) > config.u_abort:
            trace.diverged = True
            logger.warning("Actuation diverged, loop stopped", experiment=config.name, step=k, u_next=u_next)
            break
        u = u_next

    logger.info(
        "Experiment finished",
        experiment=config.name,
        steps=len(trace.steps),
        settled_at=trace.settled_at,
        stuck=trace.stuck,
        diverged=trace.diverged,
    )
    return trace


def steady_state_protocol(
    target: float,
    kp: float = 5.0,
    steps: int = 50,
    period: float = 0.2,
    feedback: str = "oracle",
    **bounds,
) -> ControlConfig:
    return ControlConfig(
        name=f"steady-{target:g}-kp{kp:g}",
        kp=kp,
        targets=[target] * steps,
        period=period,
        feedback=feedback,
        **bounds,
    )


def step_protocol(
    kp: float,
    high: float = 0.2,
    steps: int = 100,
    period: float = 0.2,
    feedback: str = "oracle",
    **bounds,
) -> ControlConfig:
    """F_t = high for the first half of the run, 0 afterwards"""
    half = steps // 2
    return ControlConfig(
        name=f"step-{high:g}-kp{kp:g}",
        kp=kp,
        targets=[high] * half + [0.0] * (steps - half),
        period=period,
        feedback=feedback,
        **bounds,
    )


def protocols_from_config(section: ControlSection) -> list[ControlConfig]:
    bounds = {"u_min": section.u_min, "u_max": section.u_max, "u_abort": section.u_abort}
    configs = [
        steady_state_protocol(t, section.steady_kp, section.steady_steps, section.period, section.feedback, **bounds)
        for t in section.steady_targets
    ]
    configs += [
        step_protocol(kp, section.step_high, section.step_steps, section.period, section.feedback, **bounds)
        for kp in section.step_gains
    ]
    return configs


def _experiment_job(args) -> ControlTrace:
    config, system, net, render, snapshot_dir, snapshot_every, solve_kw = args
    return run_experiment(config, system, net, render, snapshot_dir, snapshot_every, **solve_kw)


def run_protocols(
    configs: Sequence[ControlConfig],
    system: FingerExosuitSystem,
    net: NetworkParams | None,
    render: RenderSection | None = None,
    snapshot_dir: str | Path | None = None,
    snapshot_every: int = 0,
    workers: int = 1,
    **solve_kw,
) -> list[ControlTrace]:
    """Independent experiments in order, optionally fanned out over processes"""
    jobs = [(c, system, net, render, snapshot_dir, snapshot_every, solve_kw) for c in configs]
    if workers <= 1:
        return [_experiment_job(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_experiment_job, jobs))


def trace_frame(trace: ControlTrace) -> pd.DataFrame:
    rows = [
        {
            "step": s.step,
            "t": s.t,
            "target": s.target,
            "u": s.u,
            "u_next": s.u_next,
            "F_net_estimator": s.f_net_estimator,
            "F_net_oracle": s.f_net_oracle,
            "e": s.error,
            "converged": s.converged,
            "frozen": s.frozen,
            "image": s.image,
        }
        for s in trace.steps
    ]
    columns = ["step", "t", "target", "u", "u_next", "F_net_estimator", "F_net_oracle", "e", "converged", "frozen", "image"]
    return pd.DataFrame(rows, columns=columns)


def write_trace(trace: ControlTrace, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    trace_frame(trace).to_csv(path, index=False, float_format="%.10g")
    return path
