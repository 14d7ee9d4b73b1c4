"""Hausdorff dimension as the supremum of local log-volume exponents.

For a separable space with a finite reference measure that charges open
sets, ``dim_H = sup_p phi(p)`` where ``phi(p)`` is the small-scale exponent
of ``t -> mu(B(p, t))`` (provided ``phi`` is continuous, which holds on the
working stratum).  This module evaluates ``phi`` at sampled points, takes the
supremum with a multistart refinement, and handles the two structural
branches: infinite discrete subsets (dimension infinity) and unions of
strata (dimension is the maximum over pieces).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from ._rng import child_seed, generator
from .config import EstimatorConfig
from .exponent import (
    ExponentEstimate,
    InsufficientDataError,
    SnappedExponent,
    fit_log_slope,
    snap_exponent,
)
from .metric import MetricSpaceInstance, as_point
from .volume import volume_profile

_DISCRETE_FACTOR = 4


class InconclusiveError(RuntimeError):
    """No sample converged; ``report`` holds whatever was computed."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class CoveringError(RuntimeError):
    pass


@dataclass(frozen=True)
class LocalDimensionSample:
    point: np.ndarray
    exponent: ExponentEstimate
    params: np.ndarray = field(default_factory=lambda: np.zeros(0))
    stage: str = "coarse"


@dataclass(frozen=True)
class DimensionReport:
    dimension: float
    snapped: Optional[SnappedExponent]
    argmax_witness: Optional[np.ndarray]
    samples: tuple = ()
    strata_breakdown: dict = field(default_factory=dict)
    budget_spent: int = 0
    name: str = ""
    discrete: bool = False
    seed: Optional[int] = None
    config: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "space": self.name,
            "dimension": _num(self.dimension),
            "snapped": None if self.snapped is None else str(self.snapped),
            "snapped_exact": None if self.snapped is None else self.snapped.snapped,
            "argmax_witness": None if self.argmax_witness is None else [float(c) for c in self.argmax_witness],
            "discrete": self.discrete,
            "budget_spent": int(self.budget_spent),
            "seed": self.seed,
            "config": self.config,
            "samples": [
                {
                    "stage": s.stage,
                    "point": [float(c) for c in s.point],
                    "phi": _num(s.exponent.value),
                    "ci_halfwidth": float(s.exponent.ci_halfwidth),
                    "residual": float(s.exponent.residual),
                    "converged": s.exponent.converged,
                }
                for s in self.samples
            ],
            "strata": {k: v.to_dict() for k, v in self.strata_breakdown.items()},
        }


@dataclass(frozen=True)
class CoveringEstimate:
    r: float
    delta: float
    value: float
    ball_count: int


@dataclass(frozen=True)
class Stratification:
    strata: tuple
    top_dim: Optional[int] = None

    def __post_init__(self):
        strata = tuple(self.strata)
        if not strata:
            raise ValueError("a stratification needs at least one stratum")
        top = max(s.intrinsic_dim for s in strata)
        if self.top_dim is not None and self.top_dim != top:
            raise ValueError(f"top_dim {self.top_dim} does not match the strata (max {top})")
        object.__setattr__(self, "strata", strata)
        object.__setattr__(self, "top_dim", top)


def _num(v):
    return "inf" if math.isinf(v) else float(v)


# -- local quantities ------------------------------------------------------------


def local_profile(space, p, cfg: EstimatorConfig, seed: int = 0, u=None):
    return volume_profile(
        space, p, cfg.t0, cfg.num_scales, cfg.ratio, cfg.budget, seed, u=u, workers=1
    )


def local_dimension(space: MetricSpaceInstance, p, cfg: EstimatorConfig = EstimatorConfig(), seed: int = 0, *, u=None):
    """Exponent of ``t -> mu(B(p, t))`` as ``t -> 0``."""
    return fit_log_slope(local_profile(space, p, cfg, seed, u), cfg.tolerance)


def local_density(space: MetricSpaceInstance, p, r: float, cfg: EstimatorConfig = EstimatorConfig(), seed: int = 0):
    """Limit of ``mu(B(p, t)) / t**r``: 0, a positive number, or ``inf``.

    The trend of ``log(mu(B)/t**r)`` is the fitted log-volume slope minus
    ``r``.  A trend within ``tolerance`` of zero counts as stabilised and the
    weighted mean ratio over the finest half is returned; a negative trend
    means the ratio blows up, a positive one that it vanishes.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    prof = local_profile(space, p, cfg, seed)
    est = fit_log_slope(prof, cfg.tolerance)
    if math.isinf(est.value):
        return 0.0
    trend = est.value - r
    if trend < -cfg.tolerance:
        return math.inf
    if trend > cfg.tolerance:
        return 0.0
    h = max(2, -(-len(prof) // 2))
    vals = prof.values[-h:]
    ratios = vals / prof.scales[-h:] ** r
    rel = prof.std_errors[-h:] / vals
    w = np.ones_like(rel) if np.all(rel == 0) else 1.0 / np.maximum(rel, rel[rel > 0].min()) ** 2
    return float(np.dot(w, ratios) / w.sum())


# -- discreteness ----------------------------------------------------------------------


def _nearest_distances(space, pts, chunk=256):
    n = len(pts)
    out = np.full(n, np.inf)
    for s in range(0, n, chunk):
        block = pts[s : s + chunk]
        a = np.repeat(block, n, axis=0)
        b = np.tile(pts, (len(block), 1))
        d = np.asarray(space.metric(a, b)).reshape(len(block), n)
        idx = np.arange(s, s + len(block))
        d[np.arange(len(block)), idx] = np.inf
        out[s : s + len(block)] = d.min(axis=1)
    return out


def isolated_count(space, n: int, separation: float, seed: int, key: int = 0) -> int:
    pts = space.sample(n, seed, 0xD5, key)
    return int(np.count_nonzero(_nearest_distances(space, pts) > separation))


def detect_infinite_discrete(space: MetricSpaceInstance, sample_budget: int = 1000, separation: Optional[float] = None, seed: int = 0) -> bool:
    """Sampled test for an infinite discrete subset.

    Counts points whose nearest sampled neighbour is farther than
    ``separation`` at ``sample_budget`` and at four times that.  In a space
    whose topology is euclidean the count collapses as sampling densifies; on
    a discrete piece it grows in proportion to the budget.
    """
    if sample_budget < 2:
        raise ValueError("sample_budget must be at least 2")
    sep = 0.1 * space.diameter_hint if separation is None else float(separation)
    if space.intrinsic_dim == 0:
        return False
    n1, n2 = sample_budget, _DISCRETE_FACTOR * sample_budget
    c1 = isolated_count(space, n1, sep, seed, 1)
    if c1 == 0:
        return False
    c2 = isolated_count(space, n2, sep, seed, 2)
    return c2 >= 0.5 * (n2 / n1) * c1


# -- sup search -------------------------------------------------------------------------


def _evaluate(space, points, params, cfg, seed, base, stage):
    def one(i):
        s = child_seed(seed, base, i)
        prof = local_profile(space, points[i], cfg, s, u=params[i])
        spent = sum(e.samples_used for e in prof.estimates)
        try:
            est = fit_log_slope(prof, cfg.tolerance)
        except InsufficientDataError:
            est = ExponentEstimate(math.nan, math.inf, math.inf, False)
        return LocalDimensionSample(points[i], est, params[i], stage), spent

    idx = range(len(points))
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(one, idx))
    return [one(i) for i in idx]


def _ranked(samples, q):
    conv = [(i, s) for i, s in enumerate(samples) if s.exponent.converged]
    conv.sort(key=lambda t: (-t[1].exponent.value, t[0]))
    return [s for _, s in conv[:q]]


def _summarise(name, samples, cfg, spent, seed, discrete=False) -> DimensionReport:
    best = None
    for s in samples:
        if s.exponent.converged and (best is None or s.exponent.value > best.exponent.value):
            best = s
    report_kw = dict(
        samples=tuple(samples), budget_spent=spent, name=name, seed=seed, config=cfg.to_dict()
    )
    if best is None:
        partial = DimensionReport(math.nan, None, None, **report_kw)
        raise InconclusiveError(f"no converged local dimension for {name}", partial)
    return DimensionReport(
        dimension=float(best.exponent.value),
        snapped=snap_exponent(best.exponent, cfg.mode),
        argmax_witness=best.point,
        discrete=discrete,
        **report_kw,
    )


def hausdorff_dimension(space: MetricSpaceInstance, cfg: EstimatorConfig = EstimatorConfig(), seed: int = 0) -> DimensionReport:
    """Estimate ``dim_H(X, d)`` as ``sup_p phi(p)``.

    1. If the space has an infinite discrete subset the answer is infinity.
    2. Evaluate ``phi`` at ``cfg.coarse_points`` reference samples.
    3. For ``cfg.refine_rounds`` rounds, resample ``cfg.refine_points``
       points in chart neighbourhoods of the current top candidates, halving
       the neighbourhood each round.

    Unconverged fits are kept in the report but never enter the maximum.
    Ties go to the earliest sample.  A 0-dimensional space is finite and
    gets dimension 0 directly.
    """
    if space.intrinsic_dim == 0:
        return point_report(space, seed, cfg)
    if detect_infinite_discrete(space, cfg.discrete_budget, cfg.separation, seed):
        pts = space.sample(1, seed, 0xD5, 1)
        return DimensionReport(
            dimension=math.inf,
            snapped=SnappedExponent(math.inf, True),
            argmax_witness=pts[0],
            name=space.name,
            discrete=True,
            budget_spent=(1 + _DISCRETE_FACTOR) * cfg.discrete_budget,
            seed=seed,
            config=cfg.to_dict(),
        )

    k = space.intrinsic_dim
    U = space.sample_params(cfg.coarse_points, generator(seed, 0xC0))
    X = np.asarray(space.chart(U), dtype=float).reshape(len(U), space.ambient_dim)
    results = _evaluate(space, X, U, cfg, seed, 1, "coarse")
    samples = [s for s, _ in results]
    spent = sum(n for _, n in results)

    half = 0.25 * (space.upper - space.lower)
    for rnd in range(cfg.refine_rounds):
        rng = generator(seed, 0xC1, rnd)
        newU = []
        for cand in _ranked(samples, cfg.top_candidates):
            lo = np.maximum(cand.params - half, space.lower)
            hi = np.minimum(cand.params + half, space.upper)
            newU.append(lo + (hi - lo) * rng.random((cfg.refine_points, k)))
        if not newU:
            break
        newU = np.vstack(newU)
        newX = np.asarray(space.chart(newU), dtype=float).reshape(len(newU), space.ambient_dim)
        res = _evaluate(space, newX, newU, cfg, seed, 2 + rnd, f"refine-{rnd + 1}")
        samples.extend(s for s, _ in res)
        spent += sum(n for _, n in res)
        half = 0.5 * half

    return _summarise(space.name, samples, cfg, spent, seed)


def point_report(space: MetricSpaceInstance, seed=None, cfg: Optional[EstimatorConfig] = None) -> DimensionReport:
    """Report for a finite (0-dimensional) piece: dimension 0."""
    pts = space.sample(1, 0, 0) if space.intrinsic_dim == 0 else None
    return DimensionReport(
        dimension=0.0,
        snapped=SnappedExponent(Fraction(0), True),
        argmax_witness=None if pts is None else pts[0],
        name=space.name,
        seed=seed,
        config=None if cfg is None else cfg.to_dict(),
    )


# -- unions and strata ------------------------------------------------------------------


def _key(dim):
    return math.inf if math.isinf(dim) else dim


def dimension_of_union(reports: Sequence[DimensionReport]) -> DimensionReport:
    """Dimension of a countable union: the maximum, with infinity dominating."""
    reports = list(reports)
    if not reports:
        raise ValueError("need at least one report")
    best = reports[0]
    for rep in reports[1:]:
        if _key(rep.dimension) > _key(best.dimension):
            best = rep
    return DimensionReport(
        dimension=best.dimension,
        snapped=best.snapped,
        argmax_witness=best.argmax_witness,
        samples=tuple(s for r in reports for s in r.samples),
        strata_breakdown={str(i): r for i, r in enumerate(reports)},
        budget_spent=sum(r.budget_spent for r in reports),
        name="union(" + ",".join(r.name for r in reports) + ")",
        discrete=any(r.discrete for r in reports),
        seed=best.seed,
        config=best.config,
    )


def stratified_dimension(strat: Stratification, cfg: EstimatorConfig = EstimatorConfig(), seed: int = 0) -> DimensionReport:
    """Maximum of the top-dimensional strata and, recursively, the remainder.

    0-dimensional strata are finite and contribute dimension 0 directly.
    """
    top = strat.top_dim
    if top == 0:
        return dimension_of_union([point_report(s, seed, cfg) for s in strat.strata])
    reports = []
    for i, s in enumerate(strat.strata):
        if s.intrinsic_dim == top:
            reports.append(hausdorff_dimension(s, cfg, child_seed(seed, 0x57, i)))
    rest = [s for s in strat.strata if s.intrinsic_dim < top]
    if rest:
        reports.append(stratified_dimension(Stratification(tuple(rest)), cfg, child_seed(seed, 0x58, top)))
    return dimension_of_union(reports)


# -- coverings ------------------------------------------------------------------------------


def covering_measure(
    space: MetricSpaceInstance,
    r: float,
    delta: float,
    budget: int = 4096,
    seed: int = 0,
    max_centers: Optional[int] = None,
) -> CoveringEstimate:
    """Greedy farthest-point cover of a sampled cloud by closed balls of diameter ``delta``.

    Returns ``ball_count * delta**r``, the cost of one admissible cover of
    the cloud, hence an upper estimate of ``H^r_delta`` of the sampled region.
    """
    if not r > 0 or not delta > 0:
        raise ValueError("r and delta must be positive")
    if budget < 1:
        raise ValueError("budget must be positive")
    cloud = space.sample(budget, seed, 0xC5)
    limit = budget if max_centers is None else int(max_centers)
    radius = 0.5 * delta
    gap = np.asarray(space.metric(cloud[:1], cloud), dtype=float)
    # start from an extremal point of the cloud
    start = int(np.argmax(gap))
    gap = np.asarray(space.metric(cloud[start : start + 1], cloud), dtype=float)
    count = 1
    while gap.max() > radius:
        if count >= limit:
            raise CoveringError(f"cloud not covered after {limit} balls; raise the budget")
        nxt = int(np.argmax(gap))
        gap = np.minimum(gap, np.asarray(space.metric(cloud[nxt : nxt + 1], cloud), dtype=float))
        count += 1
    return CoveringEstimate(float(r), float(delta), count * float(delta) ** r, count)
