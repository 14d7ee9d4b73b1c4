"""Metric spaces presented by charts, plus the built-in example families.

A space is a chart-presented set: a C^1 injective map from an axis-aligned
box in R^k into R^n, together with a metric on the image.  All callables are
vectorised over a leading sample axis:

* ``chart``: ``(N, k) -> (N, n)``
* ``metric``: ``(N, n), (N, n) -> (N,)`` (broadcasting a single row is fine)
* ``domain_test``: ``(N, n) -> (N,)`` boolean

Whether a user supplied metric is definable in some o-minimal structure is
not checked; the space author is trusted on that point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping, NamedTuple, Optional

import numpy as np
from scipy.optimize import least_squares
from scipy.spatial import cKDTree

from ._rng import generator

AXIOM_TOL = 1e-12

Chart = Callable[[np.ndarray], np.ndarray]
Metric = Callable[[np.ndarray, np.ndarray], np.ndarray]
DomainTest = Callable[[np.ndarray], np.ndarray]
BallFrame = Callable[[np.ndarray, float], np.ndarray]


class SpaceError(ValueError):
    """Raised for invalid space construction or out-of-domain points."""


class SamplerError(RuntimeError):
    """Raised when the reference sampler produces points outside the domain."""


def as_point(p, dim: int) -> np.ndarray:
    """Validate a point: finite coordinates, correct length."""
    arr = np.atleast_1d(np.asarray(p, dtype=float))
    if arr.ndim != 1 or arr.shape[0] != dim:
        raise SpaceError(f"expected a point with {dim} coordinates, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise SpaceError("point coordinates must be finite")
    return arr


@dataclass(frozen=True, eq=False)
class MetricSpaceInstance:
    """A sampleable metric space ``(X, d)``.

    ``lower``/``upper`` bound the chart box in parameter space.  The reference
    measure is k-dimensional Lebesgue measure on that box, so all volumes
    reported by :mod:`hausdim.volume` are in parameter units.

    ``ball_frame(u, t)`` is an optional hint: a ``(k, k)`` matrix ``A`` such
    that the parameter preimage of the closed ball of radius ``t`` about
    ``chart(u)`` lies inside ``u + A @ [-1, 1]^k``.  Without a hint the
    volume estimator searches for such a frame itself.
    """

    name: str
    ambient_dim: int
    intrinsic_dim: int
    lower: np.ndarray
    upper: np.ndarray
    chart: Chart
    metric: Metric
    domain_test: DomainTest
    diameter_hint: float
    oracle_dimension: Optional[float] = None
    ball_frame: Optional[BallFrame] = None
    chart_inverse: Optional[Callable[[np.ndarray], np.ndarray]] = None
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).reshape(-1)
        hi = np.asarray(self.upper, dtype=float).reshape(-1)
        if lo.shape != hi.shape or lo.shape[0] != self.intrinsic_dim:
            raise SpaceError("chart box must have intrinsic_dim bounds")
        if np.any(hi <= lo):
            raise SpaceError("chart box must have positive side lengths")
        if not 0 <= self.intrinsic_dim <= self.ambient_dim:
            raise SpaceError("need 0 <= intrinsic_dim <= ambient_dim")
        if not self.diameter_hint > 0:
            raise SpaceError("diameter_hint must be positive")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def box_volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    def sample_params(self, n: int, rng: np.random.Generator) -> np.ndarray:
        k = self.intrinsic_dim
        return self.lower + (self.upper - self.lower) * rng.random((n, k))

    def sample(self, n: int, seed: int, *keys: int) -> np.ndarray:
        """Reference sampler: ``n`` domain points, uniform in chart parameters."""
        u = self.sample_params(n, generator(seed, *keys))
        return np.asarray(self.chart(u), dtype=float).reshape(n, self.ambient_dim)

    def in_box(self, u: np.ndarray) -> np.ndarray:
        return np.all((u >= self.lower) & (u <= self.upper), axis=-1)

    def distance(self, p, q) -> float:
        p = as_point(p, self.ambient_dim)
        q = as_point(q, self.ambient_dim)
        return float(np.asarray(self.metric(p[None, :], q[None, :])).reshape(-1)[0])

    def contains(self, p) -> bool:
        p = as_point(p, self.ambient_dim)
        return bool(np.asarray(self.domain_test(p[None, :])).reshape(-1)[0])

    def locate(self, p) -> np.ndarray:
        """Chart parameters of the domain point ``p``."""
        p = as_point(p, self.ambient_dim)
        if not self.contains(p):
            raise SpaceError(f"point {p.tolist()} is outside the domain of {self.name}")
        if self.intrinsic_dim == 0:
            return np.zeros(0)
        if self.chart_inverse is not None:
            return np.asarray(self.chart_inverse(p[None, :]), dtype=float).reshape(-1)
        u, _ = _invert_chart(self.chart, self.lower, self.upper, p)
        return u


class FamilySpec(NamedTuple):
    """A parametrised family ``alpha -> (X_alpha, d_alpha)``."""

    name: str
    parameter_dim: int
    instantiate: Callable[[tuple], MetricSpaceInstance]


class AxiomCheck(NamedTuple):
    passed: bool
    violation: Optional[str]
    witness: Optional[tuple]


# -- helpers ---------------------------------------------------------------


def _invert_chart(chart: Chart, lo: np.ndarray, hi: np.ndarray, x: np.ndarray, starts: int = 9):
    k = lo.shape[0]
    best_u, best_res = None, math.inf
    grid = np.linspace(0.0, 1.0, starts)
    candidates = [lo + (hi - lo) * g for g in grid] if k == 1 else [
        lo + (hi - lo) * np.full(k, g) for g in grid
    ]
    for u0 in candidates:
        sol = least_squares(
            lambda u: np.asarray(chart(u[None, :]), dtype=float).reshape(-1) - x,
            u0,
            bounds=(lo, hi),
            xtol=1e-15,
            ftol=1e-15,
            gtol=1e-15,
        )
        res = float(np.linalg.norm(sol.fun))
        if res < best_res:
            best_u, best_res = sol.x, res
    return best_u, best_res


def _chart_domain_test(chart: Chart, lo, hi, tol: float = 1e-9) -> DomainTest:
    def test(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.empty(x.shape[0], dtype=bool)
        for i, row in enumerate(x):
            _, res = _invert_chart(chart, lo, hi, row)
            out[i] = res <= tol * max(1.0, float(np.max(np.abs(row))))
        return out

    return test


def _box_test(lo, hi) -> DomainTest:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)

    def test(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.all((x >= lo) & (x <= hi), axis=-1)

    return test


def check_injective(chart: Chart, lo, hi, n: int = 4000, seed: int = 0, ratio_floor: float = 1e-2) -> bool:
    """Sampled injectivity test.

    For each sampled image point, compare the distance to its nearest image
    neighbour with the parameter distance of the same pair.  Folds and
    collisions drive that ratio towards zero.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    k = lo.shape[0]
    if k == 0:
        return True
    rng = generator(seed, 0x1A)
    u = lo + (hi - lo) * rng.random((n, k))
    x = np.asarray(chart(u), dtype=float).reshape(n, -1)
    tree = cKDTree(x)
    dist, idx = tree.query(x, k=2)
    nb = idx[:, 1]
    du = np.linalg.norm(u - u[nb], axis=1)
    dx = dist[:, 1]
    scale = float(np.max(hi - lo))
    ok = du <= 1e-12 * scale
    ratio = np.where(ok, np.inf, dx / np.where(ok, 1.0, du))
    return bool(np.all(ratio >= ratio_floor))


def _euclidean(a, b):
    return np.sqrt(np.sum((np.asarray(a) - np.asarray(b)) ** 2, axis=-1))


# -- built-in families -------------------------------------------------------


def snowflake(r: float, *, check: bool = True) -> MetricSpaceInstance:
    """``[0, 1]`` with ``d(x, y) = |x - y|**r``; Hausdorff dimension ``1/r``.

    ``check=False`` admits ``r > 1`` (not a metric) for negative tests.
    """
    r = float(r)
    if check and not 0.0 < r <= 1.0:
        raise SpaceError(f"snowflake exponent must lie in (0, 1], got {r}")
    if not r > 0:
        raise SpaceError("snowflake exponent must be positive")

    def metric(a, b):
        return np.abs(np.asarray(a)[..., 0] - np.asarray(b)[..., 0]) ** r

    def frame(u, t):
        return np.array([[t ** (1.0 / r)]])

    return MetricSpaceInstance(
        name="snowflake",
        ambient_dim=1,
        intrinsic_dim=1,
        lower=np.zeros(1),
        upper=np.ones(1),
        chart=lambda u: np.asarray(u, dtype=float),
        metric=metric,
        domain_test=_box_test([0.0], [1.0]),
        diameter_hint=1.0,
        oracle_dimension=1.0 / r,
        ball_frame=frame,
        chart_inverse=lambda x: np.asarray(x, dtype=float),
        params={"r": r},
    )


def heisenberg_multiply(a, b) -> np.ndarray:
    """Group law of unipotent upper triangular 3x3 matrices in (x, y, z) coordinates."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x = a[..., 0] + b[..., 0]
    y = a[..., 1] + b[..., 1]
    z = a[..., 2] + b[..., 2] + a[..., 0] * b[..., 1]
    return np.stack([x, y, z], axis=-1)


def heisenberg_inverse(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    x, y, z = a[..., 0], a[..., 1], a[..., 2]
    return np.stack([-x, -y, x * y - z], axis=-1)


def heisenberg_norm(g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    return (g[..., 0] ** 4 + g[..., 1] ** 4 + g[..., 2] ** 2) ** 0.25


def koranyi_norm(g) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    x, y = g[..., 0], g[..., 1]
    tau = g[..., 2] - 0.5 * x * y
    return ((x * x + y * y) ** 2 + 16.0 * tau * tau) ** 0.25


def heisenberg(gauge: str = "matrix", half_width: float = 1.0) -> MetricSpaceInstance:
    """The Heisenberg group on the box ``[-w, w]^3``; Hausdorff dimension 4.

    ``gauge="matrix"`` uses ``d(A, B) = |A^-1 B|`` with the homogeneous gauge
    ``(x^4 + y^4 + z^2)^(1/4)`` in matrix coordinates.  Inversion sends
    ``z`` to ``xy - z``, so this ``d`` is not symmetric (the two orders differ
    by up to about 20%), and the triangle inequality fails on roughly 2e-4 of
    uniform triples.  It is left-invariant and homogeneous, which is all the
    volume scaling needs.  ``gauge="koranyi"`` uses the Koranyi-Cygan gauge,
    a genuine left-invariant metric with the same dilations.
    """
    w = float(half_width)
    if gauge == "matrix":

        def metric(a, b):
            a = np.asarray(a)
            b = np.asarray(b)
            dx = b[..., 0] - a[..., 0]
            dy = b[..., 1] - a[..., 1]
            dz = b[..., 2] - a[..., 2] - a[..., 0] * dy
            dx *= dx
            dy *= dy
            return np.sqrt(np.sqrt(dx * dx + dy * dy + dz * dz))

        def frame(u, t):
            return np.array([[t, 0.0, 0.0], [0.0, t, 0.0], [0.0, u[0] * t, t * t]])

    elif gauge == "koranyi":

        def metric(a, b):
            a = np.asarray(a)
            b = np.asarray(b)
            dx = b[..., 0] - a[..., 0]
            dy = b[..., 1] - a[..., 1]
            # z-coordinate of a^-1 b, written so that a == b gives an exact zero
            dz = b[..., 2] - a[..., 2] - a[..., 0] * dy
            return koranyi_norm(np.stack([dx, dy, dz], axis=-1))

        def frame(u, t):
            return np.array([[t, 0.0, 0.0], [0.0, t, 0.0], [0.0, u[0] * t, 0.5 * t * t]])

    else:
        raise SpaceError(f"unknown Heisenberg gauge {gauge!r}")

    corners = np.array([[sx, sy, sz] for sx in (-w, w) for sy in (-w, w) for sz in (-w, w)])
    diam = float(max(metric(c[None, :], corners).max() for c in corners))
    return MetricSpaceInstance(
        name="heisenberg",
        ambient_dim=3,
        intrinsic_dim=3,
        lower=np.full(3, -w),
        upper=np.full(3, w),
        chart=lambda u: np.asarray(u, dtype=float),
        metric=metric,
        domain_test=_box_test([-w] * 3, [w] * 3),
        diameter_hint=diam,
        oracle_dimension=4.0,
        ball_frame=frame,
        chart_inverse=lambda x: np.asarray(x, dtype=float),
        params={"gauge": gauge, "half_width": w},
    )


def euclidean_subset(
    chart: Chart,
    k: int,
    n: int,
    lower=None,
    upper=None,
    *,
    name: str = "euclidean",
    domain_test: Optional[DomainTest] = None,
    chart_inverse=None,
    ball_frame: Optional[BallFrame] = None,
    params: Optional[Mapping[str, Any]] = None,
    seed: int = 0,
) -> MetricSpaceInstance:
    """Image of an injective C^1 chart with the ambient euclidean metric.

    The box defaults to ``[0, 1]^k``.  Injectivity is checked on samples and a
    failure raises :class:`SpaceError`.
    """
    lower = np.zeros(k) if lower is None else np.asarray(lower, dtype=float).reshape(k)
    upper = np.ones(k) if upper is None else np.asarray(upper, dtype=float).reshape(k)

    if k == 0:
        p0 = np.asarray(chart(np.zeros((1, 0))), dtype=float).reshape(n)

        def point_test(x):
            x = np.atleast_2d(np.asarray(x, dtype=float))
            return np.all(x == p0, axis=-1)

        return MetricSpaceInstance(
            name=name,
            ambient_dim=n,
            intrinsic_dim=0,
            lower=lower,
            upper=upper,
            chart=lambda u: np.broadcast_to(p0, (np.asarray(u).shape[0], n)).copy(),
            metric=_euclidean,
            domain_test=domain_test or point_test,
            diameter_hint=1.0,
            oracle_dimension=0.0,
            params=dict(params or {}),
        )

    if not check_injective(chart, lower, upper, seed=seed):
        raise SpaceError(f"chart of {name} is not injective on samples")

    rng = generator(seed, 0xD1A)
    u = lower + (upper - lower) * rng.random((4096, k))
    corners = np.array(np.meshgrid(*[(a, b) for a, b in zip(lower, upper)])).reshape(k, -1).T
    img = np.asarray(chart(np.vstack([u, corners])), dtype=float).reshape(-1, n)
    span = img.max(axis=0) - img.min(axis=0)
    diam = float(np.linalg.norm(span)) * 1.01 or 1.0

    return MetricSpaceInstance(
        name=name,
        ambient_dim=n,
        intrinsic_dim=k,
        lower=lower,
        upper=upper,
        chart=chart,
        metric=_euclidean,
        domain_test=domain_test or _chart_domain_test(chart, lower, upper),
        diameter_hint=diam,
        oracle_dimension=float(k),
        ball_frame=ball_frame,
        chart_inverse=chart_inverse,
        params=dict(params or {}),
    )


def _identity_frame(u, t):
    return t * np.eye(len(u))


def unit_cube(k: int = 2) -> MetricSpaceInstance:
    """``[0, 1]^k`` with the euclidean metric (``k=1`` interval, ``k=2`` square)."""
    return euclidean_subset(
        lambda u: np.asarray(u, dtype=float),
        k,
        k,
        name="interval" if k == 1 else ("square" if k == 2 else "cube"),
        domain_test=_box_test([0.0] * k, [1.0] * k),
        chart_inverse=lambda x: np.asarray(x, dtype=float),
        ball_frame=_identity_frame,
        params={"k": k},
    )


def unit_interval() -> MetricSpaceInstance:
    return unit_cube(1)


def unit_square() -> MetricSpaceInstance:
    return unit_cube(2)


def parabola_graph() -> MetricSpaceInstance:
    """Graph of ``t -> t^2`` over ``[0, 1]`` in the euclidean plane."""

    def chart(u):
        u = np.asarray(u, dtype=float)
        return np.concatenate([u, u * u], axis=-1)

    def test(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return (x[:, 0] >= 0) & (x[:, 0] <= 1) & (np.abs(x[:, 1] - x[:, 0] ** 2) <= 1e-12)

    # |chart(u) - chart(v)| >= |u - v|, so a parameter interval of half-width t
    # contains the ball
    return euclidean_subset(
        chart,
        1,
        2,
        name="parabola",
        domain_test=test,
        chart_inverse=lambda x: np.asarray(x, dtype=float)[..., :1],
        ball_frame=_identity_frame,
    )


def single_point(coords=(0.0, 0.0)) -> MetricSpaceInstance:
    c = np.asarray(coords, dtype=float)
    return euclidean_subset(lambda u: c, 0, c.shape[0], name="point", params={"coords": c.tolist()})


def discrete_example() -> MetricSpaceInstance:
    """``[0, 1]`` with the discrete metric; not separable, so dimension is infinite."""

    def metric(a, b):
        return np.any(np.asarray(a) != np.asarray(b), axis=-1).astype(float)

    return MetricSpaceInstance(
        name="discrete",
        ambient_dim=1,
        intrinsic_dim=1,
        lower=np.zeros(1),
        upper=np.ones(1),
        chart=lambda u: np.asarray(u, dtype=float),
        metric=metric,
        domain_test=_box_test([0.0], [1.0]),
        diameter_hint=1.0,
        oracle_dimension=math.inf,
        chart_inverse=lambda x: np.asarray(x, dtype=float),
    )


def pullback_metric(space: MetricSpaceInstance, chart: Chart, lower, upper, *, seed: int = 0, name=None):
    """Isometric copy of ``space`` over a new parameter box.

    ``chart`` maps the new box into the domain of ``space``; the new metric is
    ``d'(u, v) = d(chart(u), chart(v))``.  Points of the new space are the new
    parameters themselves.
    """
    lower = np.asarray(lower, dtype=float).reshape(-1)
    upper = np.asarray(upper, dtype=float).reshape(-1)
    k = lower.shape[0]
    if k != space.intrinsic_dim:
        raise SpaceError("pullback box must have the source's intrinsic dimension")
    if not check_injective(chart, lower, upper, seed=seed):
        raise SpaceError("pullback chart is not injective on samples")
    base_metric = space.metric

    def metric(a, b):
        a = np.atleast_2d(np.asarray(a, dtype=float))
        b = np.atleast_2d(np.asarray(b, dtype=float))
        return base_metric(chart(a), chart(b))

    return MetricSpaceInstance(
        name=name or f"pullback({space.name})",
        ambient_dim=k,
        intrinsic_dim=k,
        lower=lower,
        upper=upper,
        chart=lambda u: np.asarray(u, dtype=float),
        metric=metric,
        domain_test=_box_test(lower, upper),
        diameter_hint=space.diameter_hint,
        oracle_dimension=space.oracle_dimension,
        chart_inverse=lambda x: np.asarray(x, dtype=float),
        params={"source": space.name, **dict(space.params)},
    )


# -- axiom checks ------------------------------------------------------------


def restrict_domain(space: MetricSpaceInstance, lower, upper, *, seed: int = 0) -> MetricSpaceInstance:
    """The same space over a smaller parameter box.

    Points, chart and metric are unchanged.  The diameter hint is re-measured
    on samples of the smaller box.
    """
    lower = np.asarray(lower, dtype=float).reshape(-1)
    upper = np.asarray(upper, dtype=float).reshape(-1)
    if lower.shape[0] != space.intrinsic_dim or upper.shape[0] != space.intrinsic_dim:
        raise SpaceError(f"domain of {space.name} needs {space.intrinsic_dim} bounds per side")
    if np.any(lower < space.lower) or np.any(upper > space.upper):
        raise SpaceError(f"domain must lie inside the box {space.lower.tolist()}..{space.upper.tolist()}")
    if space.intrinsic_dim == 0:
        return space
    base = space

    def params_of(x):
        if base.chart_inverse is not None:
            return np.asarray(base.chart_inverse(x), dtype=float).reshape(len(x), -1)
        return np.array([_invert_chart(base.chart, base.lower, base.upper, row)[0] for row in x])

    def domain_test(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        ok = np.asarray(base.domain_test(x), dtype=bool).copy()
        if np.any(ok):
            u = params_of(x[ok])
            slack = 1e-12 * (upper - lower)
            ok[ok] = np.all((u >= lower - slack) & (u <= upper + slack), axis=-1)
        return ok

    k = space.intrinsic_dim
    rng = generator(seed, 0xD1B)
    corners = np.array(np.meshgrid(*[(a, b) for a, b in zip(lower, upper)])).reshape(k, -1).T
    u = np.vstack([corners, lower + (upper - lower) * rng.random((256, k))])
    x = np.asarray(space.chart(u), dtype=float).reshape(len(u), space.ambient_dim)
    a = np.repeat(x, len(x), axis=0)
    b = np.tile(x, (len(x), 1))
    diam = min(1.01 * float(np.max(space.metric(a, b))), space.diameter_hint)
    return replace(space, lower=lower, upper=upper, domain_test=domain_test, diameter_hint=diam)


def triple_violations(space: MetricSpaceInstance, P, Q, R, tol: float = AXIOM_TOL):
    """Boolean masks of metric-axiom failures on aligned triples."""
    d = space.metric
    dpq, dqp = d(P, Q), d(Q, P)
    dqr, dpr = d(Q, R), d(P, R)
    drq, drp = d(R, Q), d(R, P)
    distinct = np.any(P != Q, axis=-1)
    return {
        "identity": np.abs(d(P, P)) > tol,
        "symmetry": np.abs(dpq - dqp) > tol,
        "positivity": distinct & ~(dpq > 0),
        "triangle": (dpr > dpq + dqr + tol) | (dpq > dpr + drq + tol) | (dqr > dqp + dpr + tol),
        "negative": (dpq < 0) | (dqr < 0) | (dpr < 0) | (drp < 0),
    }


def check_metric_axioms(space: MetricSpaceInstance, trials: int = 10_000, seed: int = 0) -> AxiomCheck:
    """Symmetry, identity, positivity and triangle inequality on sampled triples."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    P, Q, R = (space.sample(trials, seed, 0xA5, j) for j in range(3))
    for pts in (P, Q, R):
        if not np.all(space.domain_test(pts)):
            raise SamplerError(f"reference sampler of {space.name} left the domain")
    masks = triple_violations(space, P, Q, R)
    for kind, mask in masks.items():
        if np.any(mask):
            i = int(np.argmax(mask))
            return AxiomCheck(False, kind, (P[i].tolist(), Q[i].tolist(), R[i].tolist()))
    return AxiomCheck(True, None, None)


BUILTIN_SPACES: dict[str, Callable[..., MetricSpaceInstance]] = {
    "snowflake": snowflake,
    "heisenberg": heisenberg,
    "interval": unit_interval,
    "square": unit_square,
    "parabola": parabola_graph,
    "point": single_point,
    "discrete": discrete_example,
}
