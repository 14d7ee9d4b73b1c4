"""Limit exponents of volume profiles.

``F(p) = lim log f(t) / log t`` is estimated as the slope of ``log f``
against ``log t`` with an intercept, so multiplicative constants drop out.
Convergence is judged by comparing the slope over the finest half of the
ladder with the slope over the finest quarter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

import numpy as np

from .volume import VolumeProfile

DEFAULT_TOLERANCE = 0.02
DEFAULT_MAX_DENOMINATOR = 12
CI_SIGMAS = 4.0
# relative floor on the snapping window: exact profiles still carry roundoff
SNAP_ROUNDOFF = 1e-9


class InsufficientDataError(ValueError):
    pass


class UnconvergedError(ValueError):
    pass


@dataclass(frozen=True)
class ExponentEstimate:
    value: float
    ci_halfwidth: float
    residual: float
    converged: bool
    intercept: float = 0.0

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)


@dataclass(frozen=True)
class PowerFieldMode:
    kind: str = "polynomially-bounded"
    max_denominator: int = DEFAULT_MAX_DENOMINATOR

    def __post_init__(self):
        if self.kind not in ("general", "polynomially-bounded"):
            raise ValueError(f"unknown power-field mode {self.kind!r}")
        if self.max_denominator < 1:
            raise ValueError("max_denominator must be >= 1")

    @property
    def polybounded(self) -> bool:
        return self.kind == "polynomially-bounded"


@dataclass(frozen=True)
class SnappedExponent:
    """Outcome of snapping: a ``Fraction`` when snapped, else the raw float."""

    value: Union[Fraction, float]
    snapped: bool

    def __float__(self):
        return float(self.value)

    def __str__(self):
        if isinstance(self.value, Fraction):
            return str(self.value)
        return "inf" if math.isinf(self.value) else repr(float(self.value))


# -- regression ----------------------------------------------------------------


def _wls(x, y, w):
    """Weighted least-squares line; returns slope, intercept, slope std error, rms residual."""
    w = w / w.sum()
    xm = np.dot(w, x)
    ym = np.dot(w, y)
    dx = x - xm
    sxx = np.dot(w, dx * dx)
    slope = np.dot(w, dx * (y - ym)) / sxx
    icpt = ym - slope * xm
    res = y - (icpt + slope * x)
    rms = math.sqrt(float(np.dot(w, res * res)))
    return float(slope), float(icpt), rms, dx, sxx


def _log_weights(values, errs):
    rel = errs / values
    if np.all(rel == 0):
        return np.ones_like(values), rel
    floor = rel[rel > 0].min()
    rel = np.maximum(rel, floor)
    return 1.0 / rel**2, rel


def _slope_sigma(rel, x):
    """Standard error of the weighted slope from the per-point log errors."""
    if np.all(rel == 0):
        return 0.0
    w = 1.0 / rel**2
    xm = np.dot(w, x) / w.sum()
    return float(1.0 / math.sqrt(np.dot(w, (x - xm) ** 2)))


def _window(n: int, frac: int) -> int:
    return max(2, -(-n // frac))


def fit_log_slope(profile: VolumeProfile, tolerance: float = DEFAULT_TOLERANCE) -> ExponentEstimate:
    """Fit the log-log slope of a volume profile over its finest scales.

    Volumes that are exactly zero with zero error form the zero floor.  When
    every scale of the finest half sits on that floor the exponent is
    infinite.  Otherwise the fit uses positive volumes only, and needs at
    least four of them.
    """
    vals = profile.values
    errs = profile.std_errors
    n = len(vals)
    half = _window(n, 2)
    floor = (vals == 0) & (errs == 0)
    if n >= 4 and np.all(floor[-half:]):
        return ExponentEstimate(math.inf, 0.0, 0.0, True)

    keep = vals > 0
    if keep.sum() < 4:
        raise InsufficientDataError(f"need at least 4 positive volumes, got {int(keep.sum())}")
    x = np.log(profile.scales[keep])
    y = np.log(vals[keep])
    w, rel = _log_weights(vals[keep], errs[keep])
    m = len(x)
    h, q = _window(m, 2), _window(m, 4)

    slope, icpt, rms, _, _ = _wls(x[-h:], y[-h:], w[-h:])
    slope_q, _, _, _, _ = _wls(x[-q:], y[-q:], w[-q:])
    drift = abs(slope - slope_q)
    ci = max(CI_SIGMAS * _slope_sigma(rel[-h:], x[-h:]), drift)
    return ExponentEstimate(
        value=slope,
        ci_halfwidth=ci,
        residual=rms,
        converged=bool(drift < tolerance and ci <= tolerance),
        intercept=icpt,
    )


# -- snapping --------------------------------------------------------------------


def convergents(x: float, max_terms: int = 64) -> Iterator[Fraction]:
    """Continued-fraction convergents of ``x``, exact from its binary value."""
    frac = Fraction(x)
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    for _ in range(max_terms):
        a = frac.numerator // frac.denominator
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        yield Fraction(h1, k1)
        rest = frac - a
        if rest == 0:
            return
        frac = 1 / rest


def nearest_rational(x: float, max_denominator: int) -> Fraction:
    """Closest fraction to ``x`` with denominator at most ``max_denominator``.

    The answer is the last admissible convergent or the best semiconvergent
    that follows it.
    """
    if max_denominator < 1:
        raise ValueError("max_denominator must be >= 1")
    target = Fraction(x)
    prev_h, prev_k = 0, 1
    h, k = 1, 0
    frac = target
    while True:
        a = frac.numerator // frac.denominator
        nh, nk = a * h + prev_h, a * k + prev_k
        if nk > max_denominator:
            # largest semiconvergent with admissible denominator
            j = (max_denominator - prev_k) // k
            semi = Fraction(j * h + prev_h, j * k + prev_k)
            conv = Fraction(h, k)
            return semi if abs(semi - target) < abs(conv - target) else conv
        prev_h, prev_k, h, k = h, k, nh, nk
        rest = frac - a
        if rest == 0:
            return Fraction(h, k)
        frac = 1 / rest


def snap_exponent(est: ExponentEstimate, mode: PowerFieldMode) -> SnappedExponent:
    """Snap a converged exponent into the rationals (polynomially bounded mode).

    The nearest rational with bounded denominator is accepted only when it
    lies inside the estimate's confidence half-width (never narrower than
    a roundoff floor of ``SNAP_ROUNDOFF`` relative to the value).
    """
    if not est.converged:
        raise UnconvergedError("cannot snap an unconverged estimate")
    if math.isinf(est.value):
        return SnappedExponent(math.inf, True)
    if not mode.polybounded:
        return SnappedExponent(float(est.value), False)
    cand = nearest_rational(est.value, mode.max_denominator)
    window = max(est.ci_halfwidth, SNAP_ROUNDOFF * max(1.0, abs(est.value)))
    if abs(float(cand) - est.value) <= window:
        return SnappedExponent(cand, True)
    return SnappedExponent(float(est.value), False)


def slope_ratio_check(profile_numer: VolumeProfile, profile_denom: VolumeProfile) -> float:
    """Limit of ``log numer / log denom`` as the scale shrinks.

    Both logs diverge, so the ratio's limit equals the slope of ``log numer``
    against ``log denom``; it is fitted with an intercept over the finest
    half of the shared ladder.
    """
    if len(profile_numer) != len(profile_denom) or not np.array_equal(
        profile_numer.scales, profile_denom.scales
    ):
        raise ValueError("profiles must share the same scale ladder")
    a = profile_numer.values
    b = profile_denom.values
    if np.any(a <= 0) or np.any(b <= 0):
        raise ValueError("slope ratio needs positive volumes")
    h = _window(len(a), 2)
    x = np.log(b[-h:])
    y = np.log(a[-h:])
    dx = x - x.mean()
    dy = y - y.mean()
    return float(np.dot(dx, dy) / np.dot(dx, dx))
