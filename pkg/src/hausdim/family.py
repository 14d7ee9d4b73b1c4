"""Parameter sweeps over families and bilipschitz-invariance checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from ._rng import child_seed, generator
from .config import EstimatorConfig
from .exponent import PowerFieldMode, SnappedExponent
from .hausdorff import DimensionReport, InconclusiveError, hausdorff_dimension, point_report
from .metric import (
    FamilySpec,
    MetricSpaceInstance,
    SpaceError,
    check_metric_axioms,
    discrete_example,
    pullback_metric,
    snowflake,
    triple_violations,
    unit_square,
)

DEFAULT_DISTINCT_CAP = 16


@dataclass(frozen=True)
class SweepEntry:
    alpha: tuple
    report: Optional[DimensionReport]
    error: Optional[str] = None

    @property
    def snapped(self) -> Optional[SnappedExponent]:
        return None if self.report is None else self.report.snapped


@dataclass(frozen=True)
class SweepResult:
    """``dims[i]`` is the snapped dimension at ``grid[i]``; ``None`` marks an inconclusive point."""

    grid: tuple
    dims: tuple
    entries: tuple = field(default=(), repr=False)

    @property
    def distinct_values(self) -> frozenset:
        return frozenset(_dim_key(d) for d in self.dims if d is not None)

    def to_table(self, sep: str = "\t", names: Optional[Sequence[str]] = None) -> str:
        width = max((len(a) for a in self.grid), default=0)
        names = [f"alpha{i}" for i in range(width)] if names is None else list(names)
        head = names + ["dim", "snapped", "converged"]
        rows = [sep.join(head)]
        for e in self.entries:
            dim = "nan" if e.report is None else _fmt(e.report.dimension)
            snap = "none" if e.snapped is None else str(e.snapped)
            ok = "false" if e.report is None else "true"
            rows.append(sep.join([repr(float(a)) for a in e.alpha] + [dim, snap, ok]))
        return "\n".join(rows) + "\n"

    def to_dict(self) -> dict:
        return {
            "grid": [[float(a) for a in alpha] for alpha in self.grid],
            "dims": [None if d is None else str(d) for d in self.dims],
            "distinct_values": sorted(str(v) for v in self.distinct_values),
            "entries": [
                {
                    "alpha": [float(a) for a in e.alpha],
                    "dimension": None if e.report is None else _fmt(e.report.dimension),
                    "snapped": None if e.snapped is None else str(e.snapped),
                    "snapped_exact": None if e.snapped is None else e.snapped.snapped,
                    "error": e.error,
                }
                for e in self.entries
            ],
        }


@dataclass(frozen=True)
class FinitenessResult:
    distinct_count: int
    passed: Optional[bool]
    applicable: bool = True
    offending: tuple = ()


@dataclass(frozen=True)
class BilipschitzResult:
    passed: bool
    baseline: float
    estimates: tuple
    rejected_trials: int = 0


def _fmt(v):
    return "inf" if math.isinf(v) else repr(float(v))


def _dim_key(d: SnappedExponent):
    return d.value


# -- built-in families --------------------------------------------------------------


def snowflake_family() -> FamilySpec:
    return FamilySpec("snowflake", 1, lambda a: snowflake(a[0]))


def constant_family(space_factory=unit_square) -> FamilySpec:
    return FamilySpec("constant", 1, lambda a: space_factory())


def mixed_family() -> FamilySpec:
    """Discrete metric for ``alpha < 0``, ``snowflake(1/2)`` otherwise."""
    return FamilySpec("mixed", 1, lambda a: discrete_example() if a[0] < 0 else snowflake(0.5))


# -- sweeps -------------------------------------------------------------------------------


def _alpha(a) -> tuple:
    return tuple(float(x) for x in np.atleast_1d(np.asarray(a, dtype=float)))


def family_sweep(family: FamilySpec, grid: Sequence, cfg: EstimatorConfig = EstimatorConfig(), seed: int = 0) -> SweepResult:
    """Snapped Hausdorff dimension at each grid point.

    Each point gets its own derived seed, so results do not depend on grid
    order.  Failures are recorded, not raised.
    """
    grid = tuple(_alpha(a) for a in grid)
    if not grid:
        raise ValueError("grid must be non-empty")
    entries = []
    for i, alpha in enumerate(grid):
        if len(alpha) != family.parameter_dim:
            raise ValueError(f"grid point {alpha} does not have {family.parameter_dim} coordinates")
        s = child_seed(seed, 0x5E, i)
        try:
            space = family.instantiate(alpha)
            if space.intrinsic_dim == 0:
                rep = point_report(space, s, cfg)
            else:
                rep = hausdorff_dimension(space, cfg, s)
            entries.append(SweepEntry(alpha, rep))
        except (InconclusiveError, SpaceError, ValueError) as exc:
            entries.append(SweepEntry(alpha, None, f"{type(exc).__name__}: {exc}"))
    dims = tuple(e.snapped for e in entries)
    return SweepResult(grid, dims, tuple(entries))


def finiteness_check(
    sweep: SweepResult,
    mode: PowerFieldMode = PowerFieldMode(),
    cap: int = DEFAULT_DISTINCT_CAP,
) -> FinitenessResult:
    """Finitely many values, all rational with bounded denominator.

    Only meaningful for a polynomially bounded structure; in general mode the
    result is marked not applicable.
    """
    values = sweep.distinct_values
    if not mode.polybounded:
        return FinitenessResult(len(values), None, applicable=False)
    bad = []
    for d in sweep.dims:
        if d is None or math.isinf(float(d.value)):
            continue
        if not (d.snapped and isinstance(d.value, Fraction) and d.value.denominator <= mode.max_denominator):
            bad.append(str(d))
    passed = len(values) <= cap and not bad
    return FinitenessResult(len(values), passed, True, tuple(bad))


# -- bilipschitz distortion ---------------------------------------------------------------


def _axis_warp(coeffs, lower, upper):
    """Box-preserving map ``s -> s + c s (1 - s)`` per axis (in unit coordinates).

    The derivative along axis i lies in ``[1 - |c_i|, 1 + |c_i|]``.
    """
    span = upper - lower

    def warp(u):
        s = (np.asarray(u, dtype=float) - lower) / span
        return lower + span * (s + coeffs * s * (1.0 - s))

    return warp


def _distortion(space: MetricSpaceInstance, L: float, seed: int):
    if L < 1:
        raise ValueError("L must be >= 1")
    k = space.intrinsic_dim
    cmax = 1.0 - 1.0 / L
    coeffs = generator(seed, 0xB1).uniform(-cmax, cmax, size=k)
    warp = _axis_warp(coeffs, space.lower, space.upper)
    base_chart = space.chart

    def to_base(v):
        return base_chart(warp(v))

    copy = pullback_metric(
        space, to_base, space.lower, space.upper, seed=seed, name=f"distorted({space.name})"
    )
    return copy, to_base


def distorted_copy(space: MetricSpaceInstance, L: float, seed: int) -> MetricSpaceInstance:
    """Pullback of ``space`` through a random chart with derivative in ``[1/L, L]``."""
    return _distortion(space, L, seed)[0]


def _introduces_violation(space, warped, to_base, trials: int, seed: int) -> bool:
    """True when the distorted copy breaks an axiom on a triple the original satisfies.

    A space that is itself only a quasi-metric keeps its own violations under
    any reparametrisation; those are not the distortion's fault.
    """
    if check_metric_axioms(warped, trials, seed).passed:
        return False
    P, Q, R = (warped.sample(trials, seed, 0xA5, j) for j in range(3))
    new = triple_violations(warped, P, Q, R)
    old = triple_violations(space, to_base(P), to_base(Q), to_base(R))
    return any(np.any(new[kind] & ~old[kind]) for kind in new)


def bilipschitz_invariance_test(
    space: MetricSpaceInstance,
    L: float = 1.5,
    trials: int = 3,
    cfg: EstimatorConfig = EstimatorConfig(),
    seed: int = 0,
    *,
    tolerance: Optional[float] = None,
    axiom_trials: int = 1000,
    max_regenerations: int = 8,
) -> BilipschitzResult:
    """Dimension should survive a bilipschitz reparametrisation.

    Passes when every distorted estimate is within ``2 * tolerance`` of the
    undistorted one (``tolerance`` defaults to ``cfg.tolerance``).  A
    distorted space that fails the metric-axiom check on triples where the
    original space passes is regenerated.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    tol = cfg.tolerance if tolerance is None else float(tolerance)

    def dim_of(sp, s):
        if sp.intrinsic_dim == 0:
            return 0.0
        return hausdorff_dimension(sp, cfg, s).dimension

    base = dim_of(space, child_seed(seed, 0xBA))
    if space.intrinsic_dim == 0 or L == 1:
        return BilipschitzResult(True, base, tuple(base for _ in range(trials)))

    estimates = []
    rejected = 0
    for trial in range(trials):
        for attempt in range(max_regenerations + 1):
            s = child_seed(seed, 0xB2, trial, attempt)
            warped, to_base = _distortion(space, L, s)
            if not _introduces_violation(space, warped, to_base, axiom_trials, s):
                break
            rejected += 1
        else:
            raise SpaceError(f"could not build a distorted copy of {space.name} passing the axiom check")
        estimates.append(dim_of(warped, s))

    def agree(a, b):
        if math.isinf(a) or math.isinf(b):
            return a == b
        return abs(a - b) <= 2.0 * tol

    passed = all(agree(base, e) for e in estimates)
    return BilipschitzResult(passed, base, tuple(estimates), rejected)
