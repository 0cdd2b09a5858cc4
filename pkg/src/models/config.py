from typing import Literal

from pydantic import BaseModel, Field

from .estimator import NetworkSpec, TrainConfig
from .shapes import FAMILIES


class ShapesSection(BaseModel):
    instances_per_scenario: int = Field(10, ge=1)
    families: list[str] = list(FAMILIES)
    max_radius: float = 0.02


class SweepSection(BaseModel):
    u_max: float = 4.0
    increment: float = Field(0.1, gt=0)
    max_halvings: int = 4
    frames_per_shape: int = Field(50, ge=2)
    tol: float = Field(1e-8, gt=0)
    max_iters: int = Field(100, gt=0)
    fd_step: float = 1e-7
    write_traces: bool = False


class ContactSection(BaseModel):
    stiffness: float = Field(2000.0, gt=0)  # N/m
    smoothing: float = Field(0.0, ge=0)  # m, 0 disables
    limit_stiffness: float = 10.0  # N·m/rad


class RenderSection(BaseModel):
    x_min: float = -0.02
    x_max: float = 0.13
    z_min: float = -0.09
    z_max: float = 0.06
    size: int = 128
    exosuit_level: float = 0.8
    finger_level: float = 0.5
    background_level: float = 0.0


class EvalSection(BaseModel):
    variants: list[str] = [
        "clean",
        "noise-low",
        "noise-medium",
        "noise-high",
        "contrast-low",
        "contrast-high",
    ]
    noise_mean: float = 0.01
    split: Literal["train", "val", "test"] = "test"


class ControlSection(BaseModel):
    feedback: Literal["estimator", "oracle"] = "oracle"
    period: float = Field(0.2, gt=0)
    steady_kp: float = 5.0
    steady_targets: list[float] = [0.25, 0.3, 0.35]
    steady_steps: int = 50
    step_gains: list[float] = [0.1, 1.0, 100.0]
    step_high: float = 0.2
    step_steps: int = 100  # 10 s high + 10 s low at 0.2 s
    u_min: float | None = None
    u_max: float | None = None
    u_abort: float = 50.0
    snapshot_every: int = 0  # save a PGM every N steps, 0 disables


class RunConfig(BaseModel):
    """Resolved configuration of one CLI invocation"""

    seed: int = 0
    output_dir: str | None = None
    workers: int | None = None
    dataset_dir: str | None = None
    checkpoint: str | None = None

    shapes: ShapesSection = ShapesSection()
    sweep: SweepSection = SweepSection()
    contact: ContactSection = ContactSection()
    render: RenderSection = RenderSection()
    network: NetworkSpec = NetworkSpec()
    train: TrainConfig = TrainConfig()
    eval: EvalSection = EvalSection()
    control: ControlSection = ControlSection()
