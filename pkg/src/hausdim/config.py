from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Optional

from .exponent import DEFAULT_TOLERANCE, PowerFieldMode
from .volume import DEFAULT_BUDGET, DEFAULT_RATIO, DEFAULT_SCALES, MIN_BUDGET


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EstimatorConfig:
    """Knobs shared by the local-dimension, sup-search and sweep routines.

    ``t0=None`` starts the scale ladder at ``diameter_hint / 8``;
    ``separation=None`` uses ``0.1 * diameter_hint`` for discreteness tests.
    """

    t0: Optional[float] = None
    ratio: float = DEFAULT_RATIO
    num_scales: int = DEFAULT_SCALES
    budget: int = DEFAULT_BUDGET
    tolerance: float = DEFAULT_TOLERANCE
    mode: PowerFieldMode = field(default_factory=PowerFieldMode)
    coarse_points: int = 64
    top_candidates: int = 4
    refine_rounds: int = 3
    refine_points: int = 4
    discrete_budget: int = 1000
    separation: Optional[float] = None
    workers: int = 1

    def __post_init__(self):
        if self.num_scales < 4:
            raise ConfigError("num_scales must be at least 4")
        if not 0.0 < self.ratio < 1.0:
            raise ConfigError("ratio must lie in (0, 1)")
        if self.t0 is not None and not self.t0 > 0:
            raise ConfigError("t0 must be positive")
        if self.budget < MIN_BUDGET:
            raise ConfigError(f"budget must be at least {MIN_BUDGET}")
        if not self.tolerance > 0:
            raise ConfigError("tolerance must be positive")
        if self.coarse_points < 1 or self.top_candidates < 1:
            raise ConfigError("need at least one coarse point and one candidate")
        if self.refine_rounds < 0 or self.refine_points < 0:
            raise ConfigError("refinement counts must be nonnegative")
        if self.discrete_budget < 2:
            raise ConfigError("discrete_budget must be at least 2")
        if self.separation is not None and not self.separation > 0:
            raise ConfigError("separation must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def with_(self, **changes) -> "EstimatorConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["t0"] = "auto" if self.t0 is None else self.t0
        d["separation"] = "auto" if self.separation is None else self.separation
        return d
