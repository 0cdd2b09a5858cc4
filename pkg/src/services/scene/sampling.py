"""
Random exosuit scenarios drawn from the parameter grids.

Each parameter lives on an integer grid lo + k * step; a draw is the tuple of
grid indices, so uniqueness and "exact grid point" checks are integer
comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from loguru import logger

from ...core.errors import InsufficientCombinationsError, UnknownFamilyError
from ...models.shapes import FAMILIES, ShapeSpec
from .shapes import default_shape

N_COSINE_TERMS = 7
N_LEGENDRE_TERMS = 7
_MAX_DRAW_FACTOR = 200


@dataclass(frozen=True)
class Grid:
    lo: float
    step: float
    count: int

    def value(self, k: int) -> float:
        return round(self.lo + k * self.step, 10)

    def contains(self, v: float) -> bool:
        k = round((v - self.lo) / self.step)
        return 0 <= k < self.count and abs(self.value(k) - v) < 1e-9


GRIDS: dict[str, Grid] = {
    "length": Grid(0.07, 1e-4, 401),  # 7 .. 11 cm
    "radius": Grid(0.004, 1e-4, 61),  # 0.4 .. 1 cm
    "amplitude": Grid(-15.0, 0.1, 151),  # A and B_n: -15 .. 0
    "frequency": Grid(1e-4, 0.01, 500),  # C, D
    "phase": Grid(0.0, 0.01, 629),  # [0, 2 pi)
    "legendre": Grid(0.001, 0.005, 200),  # m_n
}

# Parameters varied by each family's shape, as (spec field, grid, repeat count)
FAMILY_PARAMETERS: dict[str, list[tuple[str, str, int]]] = {
    "R01": [("r0", "radius", 1), ("r1", "radius", 1)],
    "Rs": [("r0", "radius", 1), ("a", "amplitude", 1)],
    "Rcc": [("b", "amplitude", N_COSINE_TERMS)],
    "Rsc": [
        ("r0", "radius", 1),
        ("c", "frequency", 1),
        ("d", "frequency", 1),
        ("phi_c", "phase", 1),
        ("phi_d", "phase", 1),
    ],
    "RLP": [("m", "legendre", N_LEGENDRE_TERMS)],
}

SCENARIOS: list[tuple[str, str]] = [
    ("R01", "shape"),
    ("R01", "length"),
    ("R01", "both"),
    ("Rs", "shape"),
    ("Rs", "both"),
    ("Rcc", "shape"),
    ("Rcc", "both"),
    ("Rsc", "shape"),
    ("Rsc", "both"),
    ("RLP", "shape"),
    ("RLP", "both"),
]


def scenario_name(family: str, mode: str) -> str:
    return f"{family}-{mode}"


def combination_count(family: str, mode: str) -> int:
    total = 1
    if mode in ("shape", "both"):
        for _, grid, repeat in FAMILY_PARAMETERS[family]:
            total *= GRIDS[grid].count**repeat
    if mode in ("length", "both"):
        total *= GRIDS["length"].count
    return total


def _draw(rng: np.random.Generator, family: str, mode: str) -> tuple[int, ...]:
    key: list[int] = []
    if mode in ("shape", "both"):
        for _, grid, repeat in FAMILY_PARAMETERS[family]:
            key.extend(int(k) for k in rng.integers(0, GRIDS[grid].count, size=repeat))
    if mode in ("length", "both"):
        key.append(int(rng.integers(0, GRIDS["length"].count)))
    return tuple(key)


def _spec_from_key(
    family: str, mode: str, key: tuple[int, ...], spec_id: str, seed: int, max_radius: float
) -> ShapeSpec:
    if mode == "length":
        fields = default_shape().model_dump(include={"r0", "r1"})
    else:
        fields = {}
    it = iter(key)
    if mode in ("shape", "both"):
        for name, grid, repeat in FAMILY_PARAMETERS[family]:
            values = [GRIDS[grid].value(next(it)) for _ in range(repeat)]
            fields[name] = values if repeat > 1 else values[0]
    length = GRIDS["length"].value(next(it)) if mode in ("length", "both") else default_shape().length
    return ShapeSpec(
        spec_id=spec_id,
        scenario=scenario_name(family, mode),
        family=family,
        length=length,
        seed=seed,
        max_radius=max_radius,
        **fields,
    )


def sample_scenarios(
    seed: int,
    instances_per_scenario: int,
    families: Iterable[str] = FAMILIES,
    max_radius: float = 0.02,
) -> list[ShapeSpec]:
    """
    Draw unique parameter combinations for every scenario of the requested families.

    Scenario i uses its own generator seeded from (seed, i), so adding a family
    does not reshuffle the others.
    """
    if instances_per_scenario < 1:
        raise ValueError("instances_per_scenario must be at least 1")
    families = list(families)
    for family in families:
        if family not in FAMILIES:
            raise UnknownFamilyError(f"unknown shape family '{family}'")

    specs: list[ShapeSpec] = []
    for index, (family, mode) in enumerate(SCENARIOS):
        if family not in families:
            continue
        name = scenario_name(family, mode)
        available = combination_count(family, mode)
        if available < instances_per_scenario:
            raise InsufficientCombinationsError(
                f"scenario {name} has {available} combinations, {instances_per_scenario} requested"
            )

        rng = np.random.default_rng([seed, index])
        seen: set[tuple[int, ...]] = set()
        draws = 0
        limit = _MAX_DRAW_FACTOR * instances_per_scenario
        while len(seen) < instances_per_scenario:
            if draws >= limit:
                raise InsufficientCombinationsError(
                    f"scenario {name}: only {len(seen)} unique combinations after {draws} draws"
                )
            draws += 1
            key = _draw(rng, family, mode)
            if key in seen:
                continue
            seen.add(key)
            spec_id = f"{name}-{len(seen) - 1:04d}"
            shape_seed = int(rng.integers(0, 2**31 - 1))
            specs.append(_spec_from_key(family, mode, key, spec_id, shape_seed, max_radius))

        logger.debug("Scenario sampled", scenario=name, instances=instances_per_scenario, draws=draws)

    logger.info("Scenarios sampled", scenarios=len({s.scenario for s in specs}), shapes=len(specs))
    return specs


def on_grid(spec: ShapeSpec) -> bool:
    """True when every sampled parameter is an exact grid point"""
    if not GRIDS["length"].contains(spec.length):
        return False
    for name, grid, _ in FAMILY_PARAMETERS[spec.family]:
        value = getattr(spec, name)
        values = value if isinstance(value, list) else [value]
        if any(not GRIDS[grid].contains(v) for v in values):
            return False
    return True

