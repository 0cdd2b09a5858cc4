from typing import Literal

from pydantic import BaseModel, Field

Split = Literal["train", "val", "test"]


class FrameRecord(BaseModel):
    """One rendered frame with its contact-force labels and provenance"""

    frame_id: str
    image: str  # path relative to the dataset directory
    labels: list[float] = Field(min_length=8, max_length=8)  # |f_C0| .. |f_C7| (N)
    spec_id: str
    u: float  # actuation (N)
    sweep_index: int
    rod_tip_z: float
    finger_tip_z: float
    residual: float = 0.0
    split: Split | None = None


class ShapeFailure(BaseModel):
    spec_id: str
    reason: str


class DatasetReport(BaseModel):
    """Generation summary written to report.json"""

    seed: int
    config_hash: str
    shapes: int
    candidate_frames: int
    retained_frames: int
    retention_rate: float
    failed_shapes: list[ShapeFailure] = []
    nonconverged_frames: int = 0
    split_counts: dict[str, int] = {}
    manifest_sha256: str = ""
