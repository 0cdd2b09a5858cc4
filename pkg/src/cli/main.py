"""
exoforce command-line entry point.

    exoforce [--config PATH] [--out DIR] [--seed N] [--workers N]
             [--set section.key=value ...] [--log-level LEVEL] COMMAND ...

Exit codes: 0 success, 1 usage or config error, 2 verification failure,
3 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np
from loguru import logger

from ..core.config import load_run_config, settings, write_resolved_config
from ..core.errors import ConfigError, ExoforceError
from ..core.logging import setup_logging
from ..models.config import RunConfig
from ..models.shapes import ShapeSpec
from ..services.control import protocols_from_config, run_protocols, write_trace
from ..services.dataset.metrics import compute_metrics, mean_corr, write_metrics_csv, write_predictions_csv
from ..services.dataset.pipeline import build_system, generate_dataset
from ..services.dataset.storage import load_images, load_manifest, select_split
from ..services.estimator.checkpoint import load_checkpoint, save_checkpoint
from ..services.estimator.network import predict_forces
from ..services.estimator.training import train_from_manifest, write_training_log
from ..services.scene.perturb import VARIANTS, apply_variant
from ..services.scene.pgm import write_pgm
from ..services.scene.render import RenderWindow, render_state
from ..services.scene.shapes import control_shape
from ..services.statics import actuation_sweep
from ..services.verification import SUITES, run_suites

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2
EXIT_RUNTIME = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="exoforce", description="Finger-exosuit contact-force estimation toolkit")
    parser.add_argument("--config", help="YAML run configuration")
    parser.add_argument("--out", help="artifact directory (default: $EXOFORCE_OUTPUT_ROOT/<command>)")
    parser.add_argument("--seed", type=int, help="global seed")
    parser.add_argument("--workers", type=int, help="shape/experiment-level parallelism")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
    parser.add_argument("--log-level", help="stderr log level")

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("gen", help="synthesize a labelled dataset")

    p = sub.add_parser("train", help="train the force estimator")
    p.add_argument("--dataset", help="dataset directory (overrides dataset_dir)")

    p = sub.add_parser("eval", help="evaluate a checkpoint on clean and perturbed images")
    p.add_argument("--dataset", help="dataset directory (overrides dataset_dir)")
    p.add_argument("--checkpoint", help="checkpoint file (overrides checkpoint)")

    p = sub.add_parser("control", help="run steady-state and step control experiments")
    p.add_argument("--checkpoint", help="checkpoint file for estimator feedback")

    p = sub.add_parser("verify", help="run the numerical oracle suites")
    p.add_argument("--suite", action="append", help="run only the named suite (repeatable)")

    p = sub.add_parser("render", help="render one equilibrium state as PGM")
    p.add_argument("--u", type=float, default=0.0, help="actuation (N)")
    p.add_argument("--spec-json", help="ShapeSpec JSON file (default: control shape)")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.workers is not None:
        overrides.append(f"workers={args.workers}")
    if getattr(args, "dataset", None):
        overrides.append(f"dataset_dir={args.dataset}")
    if getattr(args, "checkpoint", None):
        overrides.append(f"checkpoint={args.checkpoint}")
    return load_run_config(args.config, overrides)


def output_dir(args: argparse.Namespace, config: RunConfig) -> Path:
    if args.out:
        return Path(args.out)
    if config.output_dir:
        return Path(config.output_dir)
    return Path(settings.output_root) / args.command


def _require(value: str | None, what: str) -> str:
    if not value:
        raise ConfigError(f"{what} is required for this command")
    return value


def cmd_gen(config: RunConfig, out: Path, args) -> int:
    _, report = generate_dataset(config, out)
    print(
        f"candidates={report.candidate_frames} retained={report.retained_frames} "
        f"retention={report.retention_rate:.4f} failed_shapes={len(report.failed_shapes)}"
    )
    return EXIT_OK


def cmd_train(config: RunConfig, out: Path, args) -> int:
    dataset_dir = Path(_require(config.dataset_dir, "dataset_dir"))
    frames = load_manifest(dataset_dir)
    # the run seed drives weight init and batch order
    train_config = config.train.model_copy(update={"seed": config.seed})
    net, log = train_from_manifest(frames, dataset_dir, config.network, train_config)
    save_checkpoint(net, out / "checkpoint.bin")
    write_training_log(log, out / "training_log.csv")
    print(f"epochs={len(log)} final_train_loss={log[-1].train_loss:.6g}")
    return EXIT_OK


def cmd_eval(config: RunConfig, out: Path, args) -> int:
    dataset_dir = Path(_require(config.dataset_dir, "dataset_dir"))
    net = load_checkpoint(_require(config.checkpoint, "checkpoint"), config.network, config.train.dtype)
    frames = load_manifest(dataset_dir)
    images, labels = load_images(frames, dataset_dir, config.eval.split)
    frame_ids = [f.frame_id for f in select_split(frames, config.eval.split)]
    actual = labels[:, 1:]

    reports, predictions = {}, {}
    for index, variant in enumerate(config.eval.variants):
        if variant not in VARIANTS:
            raise ConfigError(f"unknown perturbation variant '{variant}'")
        rng = np.random.default_rng([config.seed, index])
        perturbed = np.stack([apply_variant(img, variant, rng, config.eval.noise_mean) for img in images])
        predictions[variant] = predict_forces(net, perturbed)
        reports[variant] = compute_metrics(predictions[variant], actual)
        logger.info(
            "Variant evaluated",
            variant=variant,
            corr_mean=reports[variant].corr_mean,
            corr_c2_c5=mean_corr(reports[variant], ["C2", "C3", "C4", "C5"]),
            rms_pct_mean=reports[variant].rms_pct_mean,
        )

    write_metrics_csv(reports, out / "metrics.csv")
    write_predictions_csv(predictions, actual, frame_ids, out / "predictions.csv")
    for variant, report in reports.items():
        print(f"{variant}: rmse={report.rmse_mean:.4f} rms%={report.rms_pct_mean:.2f} corr={report.corr_mean:.3f}")
    return EXIT_OK


def cmd_control(config: RunConfig, out: Path, args) -> int:
    section = config.control
    net = None
    if config.checkpoint:
        net = load_checkpoint(config.checkpoint, config.network, config.train.dtype)
    elif section.feedback == "estimator":
        raise ConfigError("estimator feedback needs a checkpoint")

    system = build_system(control_shape(), config)
    configs = protocols_from_config(section)
    traces = run_protocols(
        configs,
        system,
        net,
        config.render,
        out / "snapshots" if section.snapshot_every else None,
        section.snapshot_every,
        workers=config.workers or settings.workers,
        tol=config.sweep.tol,
        max_iters=config.sweep.max_iters,
        increment=config.sweep.increment,
        max_halvings=config.sweep.max_halvings,
    )

    summary = []
    for trace in traces:
        write_trace(trace, out / "traces" / f"{trace.config.name}.csv")
        summary.append(
            {
                "name": trace.config.name,
                "kp": trace.config.kp,
                "steps": len(trace.steps),
                "settled_at": trace.settled_at,
                "stuck": trace.stuck,
                "diverged": trace.diverged,
                "final_f_net_oracle": trace.steps[-1].f_net_oracle if trace.steps else None,
            }
        )
        print(f"{trace.config.name}: settled_at={trace.settled_at} stuck={trace.stuck} diverged={trace.diverged}")
    (out / "control_summary.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    return EXIT_OK


def cmd_verify(config: RunConfig, out: Path, args) -> int:
    unknown = sorted(set(args.suite or []) - set(SUITES))
    if unknown:
        raise ConfigError(f"unknown oracle suite(s): {', '.join(unknown)}")
    results = run_suites(args.suite)
    (out / "verify_report.json").write_text(
        json.dumps([r.model_dump() for r in results], indent=2), encoding="utf-8"
    )
    for r in results:
        status = "pass" if r.passed else "FAIL"
        print(f"{status} {r.name} value={r.value:.3e} threshold={r.threshold:.1e} {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def cmd_render(config: RunConfig, out: Path, args) -> int:
    if args.spec_json:
        spec = ShapeSpec.model_validate_json(Path(args.spec_json).read_text(encoding="utf-8"))
    else:
        spec = control_shape()
    system = build_system(spec, config)
    sweep = actuation_sweep(
        system,
        [args.u],
        tol=config.sweep.tol,
        max_iters=config.sweep.max_iters,
        increment=config.sweep.increment,
        max_halvings=config.sweep.max_halvings,
    )
    state = sweep.states[-1]
    image = render_state(system, state, RenderWindow.from_config(config.render), config.render)
    path = write_pgm(image, out / "render.pgm")
    print(f"{path} f_net={state.f_net:.6f} labels={np.round(state.labels, 6).tolist()}")
    return EXIT_OK


HANDLERS = {
    "gen": cmd_gen,
    "train": cmd_train,
    "eval": cmd_eval,
    "control": cmd_control,
    "verify": cmd_verify,
    "render": cmd_render,
}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"exoforce: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    setup_logging(level=args.log_level)
    try:
        config = resolve_config(args)
        out = output_dir(args, config)
        out.mkdir(parents=True, exist_ok=True)
        setup_logging(level=args.log_level, log_file=out / "run.log")
        write_resolved_config(config, out)
        logger.info("Command started", command=args.command, out=str(out), seed=config.seed)
        return HANDLERS[args.command](config, out, args)
    except ConfigError as e:
        logger.error("Configuration error", error=str(e))
        return EXIT_USAGE
    except (ExoforceError, OSError, ValueError) as e:
        logger.exception("Command failed", command=args.command, error=str(e))
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
