"""Binary PGM (P5, maxval 255) image I/O via Pillow."""

from __future__ import annotations

import hashlib
import io
from pathlib import Path

import numpy as np
from PIL import Image


def quantize(img: np.ndarray) -> np.ndarray:
    """[0, 1] floats to uint8, rounding half up"""
    return np.floor(np.clip(np.asarray(img, dtype=float), 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def to_pgm_bytes(img: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(quantize(img)).save(buf, format="PPM")
    return buf.getvalue()


def content_name(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16] + ".pgm"


def write_pgm(img: np.ndarray, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(to_pgm_bytes(img))
    return path


def write_pgm_content_addressed(img: np.ndarray, directory: str | Path) -> Path:
    """Store under the hash of the encoded bytes; identical frames share a file"""
    data = to_pgm_bytes(img)
    path = Path(directory) / content_name(data)
    if not path.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    return path


def read_pgm(path: str | Path) -> np.ndarray:
    with Image.open(path) as im:
        if im.mode != "L":
            raise ValueError(f"{path} is not an 8-bit grayscale image")
        return np.asarray(im, dtype=np.float64) / 255.0
