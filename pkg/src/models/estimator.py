import hashlib

from pydantic import BaseModel, Field


class NetworkSpec(BaseModel):
    """Layer layout of the convolutional force regressor"""

    input_size: int = Field(128, ge=2)
    conv_filters: list[int] = [64, 64, 32, 32, 8]
    kernel_size: int = 3
    # The first `pooled_convs` conv layers are followed by BN -> ReLU -> 2x2 max pool
    pooled_convs: int = 4
    dense_units: list[int] = [32, 32, 64]
    outputs: int = 8

    def spec_hash(self) -> bytes:
        return hashlib.sha256(self.model_dump_json().encode("utf-8")).digest()


class TrainConfig(BaseModel):
    batch_size: int = Field(64, gt=0)
    learning_rate: float = Field(2e-4, gt=0)
    plateau_factor: float = Field(0.1, gt=0)
    plateau_patience: int = Field(10, gt=0)  # epochs
    val_every: int = Field(5, ge=1)  # epochs between validation checks
    early_stop_patience: int = Field(5, gt=0)  # validation checks
    max_epochs: int = Field(1000, gt=0)
    target_train_loss: float | None = None
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    dtype: str = "float32"
    seed: int = 0  # the CLI replaces this with the run seed


class TrainLogEntry(BaseModel):
    epoch: int
    train_loss: float
    val_loss: float | None = None
    lr: float
