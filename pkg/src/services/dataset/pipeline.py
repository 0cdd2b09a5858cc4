"""
Dataset synthesis: sample shapes, sweep each, re-solve and render frames,
filter implausible poses and split 60/20/20.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from loguru import logger

from ...core.config import config_hash, settings
from ...core.errors import ExoforceError, SweepAbortedError
from ...models.config import RunConfig
from ...models.dataset import DatasetReport, FrameRecord, ShapeFailure
from ...models.shapes import ShapeSpec
from ..bodies.finger import FingerModel
from ..scene.pgm import write_pgm_content_addressed
from ..scene.render import RenderWindow, render_state
from ..scene.sampling import sample_scenarios
from ..scene.shapes import build_rod
from ..statics import (
    FingerExosuitSystem,
    SweepResult,
    SystemState,
    actuation_sweep,
    finger_tip_z,
    mount_system,
    rod_tip_z,
    triangular_schedule,
    write_sweep_trace,
)
from .storage import IMAGES_DIR, save_manifest, save_report

SPLIT_FRACTIONS = (0.6, 0.2, 0.2)


@dataclass
class ShapeOutcome:
    spec_id: str
    frames: list[FrameRecord] = field(default_factory=list)
    attempted: int = 0
    nonconverged: int = 0
    failure: str | None = None


def build_system(spec: ShapeSpec, config: RunConfig) -> FingerExosuitSystem:
    finger = FingerModel(limit_stiffness=config.contact.limit_stiffness)
    return mount_system(
        build_rod(spec),
        finger,
        contact_stiffness=config.contact.stiffness,
        smoothing=config.contact.smoothing,
    )


def frame_actuations(u_max: float, n_frames: int) -> np.ndarray:
    """n_frames equally spaced samples along 0 -> u_max -> 0"""
    s = np.arange(n_frames) / (n_frames - 1)
    return u_max * (1.0 - np.abs(2.0 * s - 1.0))


def _nearest_sweep_state(sweep: SweepResult, k: int, n_frames: int):
    position = k / (n_frames - 1) * (len(sweep.states) - 1)
    return sweep.states[int(round(position))]


def _solve_kw(config: RunConfig) -> dict:
    sw = config.sweep
    return {
        "tol": sw.tol,
        "max_iters": sw.max_iters,
        "increment": sw.increment,
        "max_halvings": sw.max_halvings,
        "fd_step": sw.fd_step,
    }


def sweep_shape(spec: ShapeSpec, config: RunConfig) -> tuple[FingerExosuitSystem, SweepResult]:
    """Mount the shape and run the 0 -> u_max -> 0 generation sweep"""
    system = build_system(spec, config)
    schedule = triangular_schedule(config.sweep.u_max, config.sweep.increment)
    return system, actuation_sweep(system, schedule, **_solve_kw(config))


def solve_frame(
    system: FingerExosuitSystem, sweep: SweepResult, k: int, u: float, config: RunConfig
) -> SystemState:
    """Frame k re-solved at its own actuation, warm-started from the nearest sweep state"""
    start = _nearest_sweep_state(sweep, k, config.sweep.frames_per_shape)
    return actuation_sweep(system, [float(u)], start=start, **_solve_kw(config)).states[-1]


def simulate_shape(spec: ShapeSpec, config: RunConfig, out_dir: str | Path) -> ShapeOutcome:
    """Sweep one shape and render frames_per_shape labelled frames"""
    out_dir = Path(out_dir)
    sw = config.sweep
    outcome = ShapeOutcome(spec.spec_id)
    try:
        system, sweep = sweep_shape(spec, config)
    except SweepAbortedError as e:
        outcome.failure = str(e)
        return outcome
    except (ExoforceError, ValueError) as e:
        outcome.failure = f"{type(e).__name__}: {e}"
        return outcome

    if sw.write_traces:
        write_sweep_trace(sweep, out_dir / "traces" / f"{spec.spec_id}.csv")

    window = RenderWindow.from_config(config.render)
    actuations = frame_actuations(sw.u_max, sw.frames_per_shape)
    outcome.attempted = len(actuations)
    for k, u in enumerate(actuations):
        try:
            state = solve_frame(system, sweep, k, u, config)
        except SweepAbortedError:
            outcome.nonconverged += 1
            logger.warning("Frame did not converge", spec_id=spec.spec_id, frame=k, u=float(u))
            continue

        image = render_state(system, state, window, config.render)
        path = write_pgm_content_addressed(image, out_dir / IMAGES_DIR)
        outcome.frames.append(
            FrameRecord(
                frame_id=f"{spec.spec_id}-{k:02d}",
                image=f"{IMAGES_DIR}/{path.name}",
                labels=[float(v) for v in state.labels],
                spec_id=spec.spec_id,
                u=float(u),
                sweep_index=k,
                rod_tip_z=rod_tip_z(system, state),
                finger_tip_z=finger_tip_z(system, state),
                residual=state.residual_norm,
            )
        )

    logger.info(
        "Shape simulated",
        spec_id=spec.spec_id,
        frames=len(outcome.frames),
        f_net_max=float(sweep.net_forces.max()),
    )
    return outcome


def regenerate_labels(spec: ShapeSpec, config: RunConfig, frames: Sequence[FrameRecord]) -> np.ndarray:
    """Re-run the generation solves for stored frames of one shape.

    Each frame is solved again from its sweep_index and u with the same warm
    start simulate_shape used. Returns one label row per frame.
    """
    system, sweep = sweep_shape(spec, config)
    labels = np.empty((len(frames), 8))
    for i, frame in enumerate(frames):
        if frame.spec_id != spec.spec_id:
            raise ValueError(f"frame {frame.frame_id} belongs to {frame.spec_id}, not {spec.spec_id}")
        labels[i] = solve_frame(system, sweep, frame.sweep_index, frame.u, config).labels
    return labels


def _simulate_job(args: tuple[ShapeSpec, RunConfig, str]) -> ShapeOutcome:
    return simulate_shape(*args)


def filter_frames(frames: Sequence[FrameRecord]) -> list[FrameRecord]:
    """Drop frames whose rod tip sits strictly below the fingertip"""
    return [f for f in frames if not f.rod_tip_z < f.finger_tip_z]


def split_counts(n: int) -> tuple[int, int, int]:
    n_train = int(round(SPLIT_FRACTIONS[0] * n))
    n_val = int(round(SPLIT_FRACTIONS[1] * n))
    return n_train, n_val, n - n_train - n_val


def split_dataset(frames: Sequence[FrameRecord], rng: np.random.Generator) -> list[FrameRecord]:
    """Shuffle at frame level and cut 60/20/20; input order is preserved in the output"""
    n = len(frames)
    if n < 5:
        raise ValueError("at least 5 frames are required to split")
    n_train, n_val, _ = split_counts(n)
    order = rng.permutation(n)
    assignment = np.empty(n, dtype=object)
    assignment[order[:n_train]] = "train"
    assignment[order[n_train : n_train + n_val]] = "val"
    assignment[order[n_train + n_val :]] = "test"
    return [f.model_copy(update={"split": str(s)}) for f, s in zip(frames, assignment)]


def run_shapes(specs: Sequence[ShapeSpec], config: RunConfig, out_dir: Path, workers: int) -> list[ShapeOutcome]:
    jobs = [(spec, config, str(out_dir)) for spec in specs]
    if workers <= 1:
        return [_simulate_job(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_simulate_job, jobs))


def generate_dataset(
    config: RunConfig,
    out_dir: str | Path,
    specs: Sequence[ShapeSpec] | None = None,
) -> tuple[list[FrameRecord], DatasetReport]:
    """Synthesize, filter, split and store a dataset; returns the manifest and report"""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if specs is None:
        specs = sample_scenarios(
            config.seed,
            config.shapes.instances_per_scenario,
            config.shapes.families,
            config.shapes.max_radius,
        )
    workers = config.workers or settings.workers
    logger.info("Generating dataset", shapes=len(specs), workers=workers, out_dir=str(out_dir))

    outcomes = run_shapes(specs, config, out_dir, workers)

    failures = [ShapeFailure(spec_id=o.spec_id, reason=o.failure) for o in outcomes if o.failure]
    for f in failures:
        logger.warning("Shape skipped", spec_id=f.spec_id, reason=f.reason)
    candidates = [frame for o in outcomes for frame in o.frames]
    attempted = sum(o.attempted for o in outcomes)
    retained = filter_frames(candidates)
    if len(retained) >= 5:
        manifest = split_dataset(retained, np.random.default_rng([config.seed, 1]))
    else:
        logger.warning("Too few frames to split", retained=len(retained))
        manifest = list(retained)

    manifest_sha = save_manifest(manifest, out_dir)
    counts = {s: sum(1 for f in manifest if f.split == s) for s in ("train", "val", "test")}
    report = DatasetReport(
        seed=config.seed,
        config_hash=config_hash(config),
        shapes=len(specs),
        candidate_frames=attempted,
        retained_frames=len(retained),
        retention_rate=len(retained) / attempted if attempted else 0.0,
        failed_shapes=failures,
        nonconverged_frames=sum(o.nonconverged for o in outcomes),
        split_counts=counts,
        manifest_sha256=manifest_sha,
    )
    save_report(report, out_dir)
    logger.info(
        "Dataset written",
        candidates=report.candidate_frames,
        retained=report.retained_frames,
        retention_rate=round(report.retention_rate, 4),
        failed_shapes=len(failures),
        manifest_sha256=manifest_sha,
    )
    return manifest, report
