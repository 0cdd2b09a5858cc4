from typing import Literal

from pydantic import BaseModel, Field, model_validator


class ControlConfig(BaseModel):
    """One closed-loop experiment: gain, target profile and feedback source"""

    name: str = "experiment"
    kp: float = 5.0  # N of actuation per N of force error
    targets: list[float] = Field(min_length=1)  # F_t(k), one per step (N)
    period: float = Field(0.2, gt=0)  # s, time axis only
    feedback: Literal["estimator", "oracle"] = "oracle"
    u_min: float | None = None
    u_max: float | None = None
    u_abort: float = 50.0
    settle_tol: float = 0.005
    settle_count: int = 3

    @property
    def steps(self) -> int:
        return len(self.targets)

    @model_validator(mode="after")
    def _check_bounds(self):
        if self.u_min is not None and self.u_max is not None and self.u_min >= self.u_max:
            raise ValueError("u_min must be below u_max")
        return self


class ControlStep(BaseModel):
    step: int
    t: float
    target: float
    u: float  # actuation applied at this step
    u_next: float  # command for the next step
    f_net_estimator: float | None
    f_net_oracle: float
    error: float
    converged: bool
    frozen: bool = False
    image: str | None = None
