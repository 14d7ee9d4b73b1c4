"""Volumes of metric balls.

Balls are closed, ``B(p, t) = {q in X : d(p, q) <= t}``, and volume means
k-dimensional Lebesgue measure of the chart preimage.  Estimates are Monte
Carlo over a *frame*: a parallelepiped ``c + A @ [-1, 1]^k`` in parameter
space that contains the ball.  Sampling the frame instead of the whole chart
box keeps the acceptance rate roughly independent of ``t``, which is what
makes relative errors comparable across a scale ladder.

Frames come from the space's ``ball_frame`` hint when it has one, and are
otherwise found by a pilot search: sample the previous (larger) frame, fit
principal axes to the accepted points, then grow each axis until no point on
the frame's faces lies in the ball.  The face test certifies containment of
the connected component of the ball through ``p``; balls of the built-in
spaces are connected.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from ._rng import generator
from .metric import MetricSpaceInstance, SpaceError, as_point

DEFAULT_BUDGET = 200_000
DEFAULT_SCALES = 10
DEFAULT_RATIO = 0.5
MIN_BUDGET = 100
BATCH = 1 << 16

_PILOT = 2048
_PILOT_MAX = 1 << 16
_PILOT_ACCEPT = 64
_FACE = 256
_GROW = 1.5
_MARGIN = 1.25


class UnsupportedOperationError(SpaceError):
    pass


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    std_error: float
    samples_used: int
    method: str = "monte-carlo"
    warning: Optional[str] = None

    def __post_init__(self):
        if self.value < 0 or self.std_error < 0:
            raise ValueError("volume estimates are nonnegative")
        if self.samples_used < 1:
            raise ValueError("samples_used must be positive")
        if self.method not in ("monte-carlo", "grid"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass(frozen=True)
class VolumeProfile:
    center: np.ndarray
    scales: np.ndarray
    estimates: tuple

    def __post_init__(self):
        s = np.asarray(self.scales, dtype=float)
        if s.ndim != 1 or len(s) != len(self.estimates):
            raise ValueError("scales and estimates must align")
        if np.any(s <= 0) or np.any(np.diff(s) >= 0):
            raise ValueError("scales must be positive and strictly decreasing")
        object.__setattr__(self, "scales", s)
        object.__setattr__(self, "estimates", tuple(self.estimates))

    @classmethod
    def from_values(cls, scales, values, std_errors=None, center=(0.0,)) -> "VolumeProfile":
        """Profile from raw numbers, e.g. an exact synthetic power law."""
        values = np.asarray(values, dtype=float)
        errs = np.zeros_like(values) if std_errors is None else np.asarray(std_errors, dtype=float)
        ests = tuple(VolumeEstimate(float(v), float(e), 1, "grid") for v, e in zip(values, errs))
        return cls(np.asarray(center, dtype=float), np.asarray(scales, dtype=float), ests)

    @property
    def values(self) -> np.ndarray:
        return np.array([e.value for e in self.estimates])

    @property
    def std_errors(self) -> np.ndarray:
        return np.array([e.std_error for e in self.estimates])

    def __len__(self):
        return len(self.scales)

    def to_table(self, sep: str = "\t") -> str:
        rows = [sep.join(("scale", "value", "std_error"))]
        for t, e in zip(self.scales, self.estimates):
            rows.append(sep.join((repr(float(t)), repr(e.value), repr(e.std_error))))
        return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class BoxBoundsEstimate:
    inner_volume: float
    outer_volume: float
    resolution: int


class Frame(NamedTuple):
    center: np.ndarray
    axes: np.ndarray  # columns span the half-extents

    @property
    def volume(self) -> float:
        k = self.center.shape[0]
        return float((2.0**k) * abs(np.linalg.det(self.axes))) if k else 1.0

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        k = self.center.shape[0]
        return self.center + (2.0 * rng.random((n, k)) - 1.0) @ self.axes.T


def _clip(space: MetricSpaceInstance, frame: Frame) -> Frame:
    """Intersect an axis-aligned frame with the parameter box."""
    A = frame.axes
    if A.size == 0 or np.count_nonzero(A - np.diag(np.diag(A))):
        return frame
    half = np.abs(np.diag(A))
    lo = np.maximum(frame.center - half, space.lower)
    hi = np.minimum(frame.center + half, space.upper)
    return Frame((lo + hi) / 2.0, np.diag((hi - lo) / 2.0))


def _hinted(space: MetricSpaceInstance, u: np.ndarray, t: float) -> Frame:
    return _clip(space, Frame(u, np.asarray(space.ball_frame(u, t), dtype=float)))


# -- ball membership ------------------------------------------------------


def _in_ball(space: MetricSpaceInstance, p: np.ndarray, u: np.ndarray, t: float) -> np.ndarray:
    inside = space.in_box(u)
    hit = np.zeros(u.shape[0], dtype=bool)
    if np.any(inside):
        x = np.asarray(space.chart(u[inside]), dtype=float).reshape(-1, space.ambient_dim)
        hit[inside] = np.asarray(space.metric(p[None, :], x)) <= t
    return hit


# -- frame search -----------------------------------------------------------


def _box_frame(space: MetricSpaceInstance, u: np.ndarray) -> Frame:
    half = np.maximum(u - space.lower, space.upper - u)
    return Frame(u, np.diag(half))


def _faces_clear(space, p, frame: Frame, t, rng) -> np.ndarray:
    """Per-axis flags: True where neither face of that axis meets the ball."""
    k = frame.center.shape[0]
    clear = np.ones(k, dtype=bool)
    for i in range(k):
        for sign in (-1.0, 1.0):
            U = 2.0 * rng.random((_FACE, k)) - 1.0
            U[:, i] = sign
            u = frame.center + U @ frame.axes.T
            if np.any(_in_ball(space, p, u, t)):
                clear[i] = False
                break
    return clear


def _refine(space, p, frame: Frame, t: float, rng) -> Frame:
    """Shrink ``frame`` (a container for a larger ball) to fit ``B(p, t)``."""
    k = frame.center.shape[0]
    n = _PILOT
    while True:
        u = frame.draw(n, rng)
        acc = u[_in_ball(space, p, u, t)]
        if len(acc) >= _PILOT_ACCEPT or n >= _PILOT_MAX:
            break
        n *= 2
    if len(acc) < k + 1:
        return frame

    D = acc - frame.center
    _, R = np.linalg.eigh(D.T @ D)
    ext = _MARGIN * np.max(np.abs(D @ R), axis=0)
    ext = np.maximum(ext, 1e-12 * max(float(ext.max()), 1e-300))
    for _ in range(40):
        cand = Frame(frame.center, R * ext)
        clear = _faces_clear(space, p, cand, t, rng)
        if clear.all():
            return cand if cand.volume < frame.volume else frame
        ext = np.where(clear, ext, ext * _GROW)
    return frame


def _descend(space, p, frame: Frame, t_from: float, t_to: float, rng) -> Frame:
    """Refine through halving stages from radius ``t_from`` down to ``t_to``."""
    s = t_from
    while s * 0.5 > t_to:
        s *= 0.5
        frame = _refine(space, p, frame, s, rng)
    return _refine(space, p, frame, t_to, rng)


def ball_frame(space: MetricSpaceInstance, p, t: float, seed: int = 0, u=None) -> Frame:
    """A parameter-space frame containing the ball ``B(p, t)``."""
    p = as_point(p, space.ambient_dim)
    u = space.locate(p) if u is None else np.asarray(u, dtype=float)
    if space.ball_frame is not None:
        return _hinted(space, u, t)
    rng = generator(seed, 0xF4)
    return _clip(space, _descend(space, p, _box_frame(space, u), space.diameter_hint, t, rng))


# -- Monte Carlo ----------------------------------------------------------------


def _count_batch(space, p, frame, t, n, seed, keys):
    rng = generator(seed, *keys)
    return int(np.count_nonzero(_in_ball(space, p, frame.draw(n, rng), t)))


def _mc_volume(space, p, frame: Frame, t, budget, seed, keys, workers=1) -> VolumeEstimate:
    sizes = [BATCH] * (budget // BATCH)
    if budget % BATCH:
        sizes.append(budget % BATCH)
    jobs = [(space, p, frame, t, n, seed, (*keys, b)) for b, n in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(lambda a: _count_batch(*a), jobs))
    else:
        counts = [_count_batch(*a) for a in jobs]
    hits = sum(counts)
    frac = hits / budget
    vol = frame.volume
    return VolumeEstimate(
        value=vol * frac,
        std_error=vol * math.sqrt(frac * (1.0 - frac) / budget),
        samples_used=budget,
    )


def _point_volume(budget) -> VolumeEstimate:
    # counting measure on a 0-dimensional space: every ball holds the point
    return VolumeEstimate(1.0, 0.0, 1, "grid")


def _check_args(space, p, t, budget):
    p = as_point(p, space.ambient_dim)
    if not space.contains(p):
        raise SpaceError(f"point {p.tolist()} is outside the domain of {space.name}")
    if not t > 0:
        raise ValueError("radius must be positive")
    if budget < MIN_BUDGET:
        raise ValueError(f"budget must be at least {MIN_BUDGET}")
    return p


def estimate_ball_volume(
    space: MetricSpaceInstance,
    p,
    t: float,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    *,
    workers: int = 1,
) -> VolumeEstimate:
    """Unbiased Monte Carlo estimate of the reference volume of ``B(p, t)``.

    The standard error is the binomial one for the acceptance fraction,
    scaled by the frame volume.  Deterministic given ``seed``.
    """
    p = _check_args(space, p, t, budget)
    note = None
    if t > space.diameter_hint:
        note = "radius exceeds diameter_hint"
        warnings.warn(f"{space.name}: {note}", stacklevel=2)
    if space.intrinsic_dim == 0:
        est = _point_volume(budget)
    else:
        frame = ball_frame(space, p, t, seed)
        est = _mc_volume(space, p, frame, t, budget, seed, (0xB0,), workers)
    if note:
        est = VolumeEstimate(est.value, est.std_error, est.samples_used, est.method, note)
    return est


def volume_profile(
    space: MetricSpaceInstance,
    p,
    t0: Optional[float] = None,
    num_scales: int = DEFAULT_SCALES,
    ratio: float = DEFAULT_RATIO,
    budget: int = DEFAULT_BUDGET,
    seed: int = 0,
    *,
    u=None,
    workers: int = 1,
) -> VolumeProfile:
    """Ball volumes on the ladder ``t_j = t0 * ratio**j``.

    ``budget`` is the mean number of samples per scale.  The total is split
    across scales in proportion to ``(1 - f) / f`` for the pilot acceptance
    fraction ``f`` of each frame, which equalises relative standard errors.
    ``u`` optionally gives the chart parameters of ``p`` (skips inversion).
    """
    if num_scales < 4:
        raise ValueError("a profile needs at least 4 scales")
    if not 0.0 < ratio < 1.0:
        raise ValueError("ratio must lie in (0, 1)")
    t0 = space.diameter_hint / 8.0 if t0 is None else float(t0)
    p = _check_args(space, p, t0, budget)
    scales = t0 * ratio ** np.arange(num_scales)

    if space.intrinsic_dim == 0:
        return VolumeProfile(p, scales, tuple(_point_volume(budget) for _ in scales))

    u = space.locate(p) if u is None else np.asarray(u, dtype=float)
    rng = generator(seed, 0xF4)
    frames = []
    if space.ball_frame is not None:
        frames = [_hinted(space, u, t) for t in scales]
    else:
        frame = _descend(space, p, _box_frame(space, u), space.diameter_hint, scales[0], rng)
        frames.append(_clip(space, frame))
        for prev, t in zip(scales[:-1], scales[1:]):
            frame = _descend(space, p, frame, prev, t, rng)
            frames.append(_clip(space, frame))

    fracs = []
    for j, (frame, t) in enumerate(zip(frames, scales)):
        pilot = _in_ball(space, p, frame.draw(_PILOT, generator(seed, 0xAF, j)), t)
        fracs.append((pilot.sum() + 0.5) / (_PILOT + 1.0))
    fracs = np.asarray(fracs)
    weight = (1.0 - fracs) / fracs
    alloc = budget * num_scales * weight / weight.sum()
    alloc = np.clip(np.round(alloc), MIN_BUDGET, 4 * budget).astype(int)

    note = "radius exceeds diameter_hint" if t0 > space.diameter_hint else None
    ests = []
    for j, (frame, t, n) in enumerate(zip(frames, scales, alloc)):
        est = _mc_volume(space, p, frame, t, int(n), seed, (0xB1, j), workers)
        if note and t > space.diameter_hint:
            est = VolumeEstimate(est.value, est.std_error, est.samples_used, est.method, note)
        ests.append(est)
    return VolumeProfile(p, scales, tuple(ests))


# -- deterministic brackets --------------------------------------------------------


def box_bounds(space: MetricSpaceInstance, p, t: float, resolution: int) -> BoxBoundsEstimate:
    """Inner/outer grid approximations of the ball volume.

    The grid spans the axis-aligned hull of the ball's frame, clipped to the
    chart box.  A cell is inner when its centre and every corner lie in the
    ball; it is outer when its centre lies within ``t`` plus the cell
    diagonal, measured as twice the largest centre-to-corner distance in d.
    """
    if space.intrinsic_dim != space.ambient_dim:
        raise UnsupportedOperationError(
            f"box_bounds needs a full-dimensional space; {space.name} has k={space.intrinsic_dim} "
            f"< n={space.ambient_dim}, use estimate_ball_volume on the chart instead"
        )
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    p = _check_args(space, p, t, MIN_BUDGET)
    u = space.locate(p)
    k = space.intrinsic_dim
    frame = ball_frame(space, p, t, seed=0, u=u)
    reach = np.abs(frame.axes).sum(axis=1)
    lo = np.maximum(frame.center - reach, space.lower)
    hi = np.minimum(frame.center + reach, space.upper)

    edges = [np.linspace(a, b, resolution + 1) for a, b in zip(lo, hi)]
    cell = np.prod((hi - lo) / resolution)
    verts = np.stack(np.meshgrid(*edges, indexing="ij"), axis=-1)
    vdist = np.asarray(space.metric(p[None, :], space.chart(verts.reshape(-1, k)))).reshape(verts.shape[:-1])
    mids = [0.5 * (e[1:] + e[:-1]) for e in edges]
    cen = np.stack(np.meshgrid(*mids, indexing="ij"), axis=-1).reshape(-1, k)
    cx = space.chart(cen)
    cdist = np.asarray(space.metric(p[None, :], cx)).reshape((resolution,) * k)

    inner = cdist <= t
    radius = np.zeros((resolution,) * k)
    for offs in np.ndindex(*([2] * k)):
        sl = tuple(slice(o, o + resolution) for o in offs)
        inner &= vdist[sl] <= t
        corner = verts[sl].reshape(-1, k)
        radius = np.maximum(radius, np.asarray(space.metric(cx, space.chart(corner))).reshape(radius.shape))
    outer = cdist <= t + 2.0 * radius
    return BoxBoundsEstimate(float(inner.sum() * cell), float(outer.sum() * cell), int(resolution))

