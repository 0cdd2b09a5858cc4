from typing import Literal

from pydantic import BaseModel, Field

Family = Literal["R01", "Rs", "Rcc", "Rsc", "RLP"]
FAMILIES: tuple[str, ...] = ("R01", "Rs", "Rcc", "Rsc", "RLP")


class ShapeSpec(BaseModel):
    """One exosuit geometry: a radius-profile family, its parameters and length"""

    spec_id: str = "default"
    scenario: str = "default"
    family: str = "R01"
    length: float = 0.1  # m

    # R01 / Rs / Rsc base radius, R01 tip radius (m)
    r0: float | None = None
    r1: float | None = None
    # Rs frequency factor
    a: float | None = None
    # Rcc cosine amplitudes (cm), n = 0..6
    b: list[float] | None = None
    # Rsc frequencies and phases (rad)
    c: float | None = None
    d: float | None = None
    phi_c: float | None = None
    phi_d: float | None = None
    # RLP Legendre amplitudes (cm), n = 0..N-1
    m: list[float] | None = None

    seed: int = 0
    max_radius: float = Field(0.02, gt=0)
