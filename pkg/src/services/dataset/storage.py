"""
On-disk dataset layout:

    <dir>/manifest.jsonl     one FrameRecord per line
    <dir>/images/<hash>.pgm  content-addressed frames
    <dir>/report.json        DatasetReport
"""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Sequence

import numpy as np

from ...core.errors import EmptySplitError
from ...models.dataset import DatasetReport, FrameRecord
from ..scene.pgm import read_pgm

MANIFEST_NAME = "manifest.jsonl"
REPORT_NAME = "report.json"
IMAGES_DIR = "images"


def save_manifest(frames: Sequence[FrameRecord], directory: str | Path) -> str:
    """Write manifest.jsonl and return the sha256 of its bytes"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    data = "".join(f.model_dump_json() + "\n" for f in frames).encode("utf-8")
    (directory / MANIFEST_NAME).write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def load_manifest(directory: str | Path) -> list[FrameRecord]:
    path = Path(directory) / MANIFEST_NAME
    if not path.exists():
        raise FileNotFoundError(f"no manifest at {path}")
    with path.open(encoding="utf-8") as fh:
        return [FrameRecord.model_validate_json(line) for line in fh if line.strip()]


def save_report(report: DatasetReport, directory: str | Path) -> Path:
    path = Path(directory) / REPORT_NAME
    path.write_text(report.model_dump_json(indent=2), encoding="utf-8")
    return path


def load_report(directory: str | Path) -> DatasetReport:
    return DatasetReport.model_validate_json((Path(directory) / REPORT_NAME).read_text(encoding="utf-8"))


def select_split(frames: Sequence[FrameRecord], split: str | None) -> list[FrameRecord]:
    return [f for f in frames if split is None or f.split == split]


def load_images(
    frames: Sequence[FrameRecord],
    directory: str | Path,
    split: str | None = None,
    dtype=np.float64,
) -> tuple[np.ndarray, np.ndarray]:
    """Stack the frames of one split as (N, 1, H, W) images and (N, 8) labels"""
    chosen = select_split(frames, split)
    if not chosen:
        raise EmptySplitError(f"split '{split}' has no frames")
    directory = Path(directory)
    images = np.stack([read_pgm(directory / f.image) for f in chosen])[:, None, :, :].astype(dtype)
    labels = np.array([f.labels for f in chosen], dtype=dtype)
    return images, labels
