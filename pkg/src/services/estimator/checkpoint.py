"""
Checkpoint format (little endian):

    b"EXOF" | uint32 version | 32-byte sha256 of the NetworkSpec JSON
    | uint64 n | n float32 parameters | uint64 m | m float32 running statistics
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ...core.errors import CheckpointError
from ...models.estimator import NetworkSpec
from .network import NetworkParams, init_network

MAGIC = b"EXOF"
VERSION = 1
_HEADER = struct.Struct("<4sI32s")
_COUNT = struct.Struct("<Q")


def checkpoint_bytes(net: NetworkParams) -> bytes:
    params = np.asarray(net.flat(), dtype="<f4")
    stats = np.asarray(net.flat_stats(), dtype="<f4")
    return b"".join(
        [
            _HEADER.pack(MAGIC, VERSION, net.spec.spec_hash()),
            _COUNT.pack(params.size),
            params.tobytes(),
            _COUNT.pack(stats.size),
            stats.tobytes(),
        ]
    )


def save_checkpoint(net: NetworkParams, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(checkpoint_bytes(net))
    return path


def _read_block(data: bytes, offset: int, path) -> tuple[np.ndarray, int]:
    if offset + _COUNT.size > len(data):
        raise CheckpointError(f"{path}: truncated checkpoint")
    (count,) = _COUNT.unpack_from(data, offset)
    offset += _COUNT.size
    end = offset + 4 * count
    if end > len(data):
        raise CheckpointError(f"{path}: truncated checkpoint")
    return np.frombuffer(data, dtype="<f4", count=count, offset=offset), end


def load_checkpoint(path: str | Path, spec: NetworkSpec, dtype: str = "float32") -> NetworkParams:
    """Rebuild parameters for `spec`; the stored spec hash must match"""
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    data = path.read_bytes()
    if len(data) < _HEADER.size:
        raise CheckpointError(f"{path}: truncated checkpoint")
    magic, version, digest = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: not a force-estimator checkpoint")
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    if digest != spec.spec_hash():
        raise CheckpointError(f"{path}: checkpoint was built for a different network layout")

    params, offset = _read_block(data, _HEADER.size, path)
    stats, offset = _read_block(data, offset, path)
    net = init_network(spec, seed=0, dtype=dtype)
    if params.size != net.flat().size or stats.size != net.flat_stats().size:
        raise CheckpointError(f"{path}: parameter count does not match the network layout")
    net.load_flat(params.astype(dtype), stats.astype(dtype))
    return net
