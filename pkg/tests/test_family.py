import json
import math
from fractions import Fraction

import numpy as np
import pytest

from hausdim.config import EstimatorConfig
from hausdim.exponent import PowerFieldMode, SnappedExponent
from hausdim.family import (
    SweepResult,
    _distortion,
    _introduces_violation,
    bilipschitz_invariance_test,
    constant_family,
    distorted_copy,
    family_sweep,
    finiteness_check,
    mixed_family,
    snowflake_family,
)
from hausdim.hausdorff import hausdorff_dimension
from hausdim.metric import (
    FamilySpec,
    check_metric_axioms,
    heisenberg,
    pullback_metric,
    single_point,
    snowflake,
    unit_interval,
    unit_square,
)

FAST = EstimatorConfig(budget=20_000, coarse_points=8, top_candidates=2, refine_rounds=1, refine_points=2)
TINY = EstimatorConfig(budget=5_000, coarse_points=2, refine_rounds=0)
RS = [1 / 3, 1 / 2, 2 / 3, 1.0]


@pytest.fixture(scope="module")
def snow_sweep():
    return family_sweep(snowflake_family(), RS, FAST, seed=1)


def test_snowflake_sweep_values(snow_sweep):
    assert [d.value for d in snow_sweep.dims] == [3, 2, Fraction(3, 2), 1]
    assert all(d.snapped for d in snow_sweep.dims)


def test_snowflake_sweep_monotone(snow_sweep):
    vals = [float(d.value) for d in snow_sweep.dims]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_sweep_result_invariants(snow_sweep):
    assert len(snow_sweep.dims) == len(snow_sweep.grid) == 4
    assert snow_sweep.distinct_values == frozenset(d.value for d in snow_sweep.dims)


def test_sweep_table_and_document(snow_sweep):
    lines = snow_sweep.to_table().splitlines()
    assert lines[0].split("\t") == ["alpha0", "dim", "snapped", "converged"]
    assert [ln.split("\t")[2] for ln in lines[1:]] == ["3", "2", "3/2", "1"]
    doc = json.loads(json.dumps(snow_sweep.to_dict()))
    assert doc["distinct_values"] == ["1", "2", "3", "3/2"]


def test_sweep_determinism():
    a = family_sweep(snowflake_family(), [0.5, 0.25], TINY, seed=3)
    b = family_sweep(snowflake_family(), [0.5, 0.25], TINY, seed=3)
    assert a.to_dict() == b.to_dict()


def test_sweep_point_independent_of_grid_order():
    a = family_sweep(snowflake_family(), [0.5, 0.25], TINY, seed=3)
    b = family_sweep(snowflake_family(), [0.5, 0.75], TINY, seed=3)
    assert a.entries[0].report.to_dict() == b.entries[0].report.to_dict()


def test_constant_family_fifty_points():
    sweep = family_sweep(constant_family(), np.linspace(0, 1, 50), TINY, seed=0)
    assert sweep.distinct_values == {2}
    res = finiteness_check(sweep)
    assert res.passed and res.distinct_count == 1


def test_mixed_family():
    sweep = family_sweep(mixed_family(), [-1.0, -0.5, 0.0, 0.5], TINY, seed=0)
    assert sweep.distinct_values == {math.inf, 2}
    assert finiteness_check(sweep).passed


def test_failures_are_recorded():
    def boom(a):
        if a[0] > 0:
            raise ValueError("no space here")
        return snowflake(0.5)

    sweep = family_sweep(FamilySpec("partial", 1, boom), [-1.0, 1.0], TINY)
    assert sweep.dims[0].value == 2 and sweep.dims[1] is None
    assert "no space here" in sweep.entries[1].error
    assert len(sweep.dims) == 2


def test_sweep_grid_validation():
    with pytest.raises(ValueError):
        family_sweep(snowflake_family(), [], TINY)
    with pytest.raises(ValueError):
        family_sweep(snowflake_family(), [[0.5, 0.5]], TINY)


def test_finiteness_flags_irrational():
    dims = (SnappedExponent(Fraction(2), True), SnappedExponent(math.sqrt(2) + 1, False))
    sweep = SweepResult(((0.0,), (1.0,)), dims)
    res = finiteness_check(sweep)
    assert res.applicable and not res.passed
    assert res.offending


def test_finiteness_cap():
    dims = tuple(SnappedExponent(Fraction(i, 1), True) for i in range(5))
    sweep = SweepResult(tuple((float(i),) for i in range(5)), dims)
    assert finiteness_check(sweep, cap=5).passed
    assert not finiteness_check(sweep, cap=4).passed


def test_finiteness_general_mode_not_applicable(snow_sweep):
    res = finiteness_check(snow_sweep, PowerFieldMode("general"))
    assert not res.applicable and res.passed is None


# -- bilipschitz ---------------------------------------------------------------------------


def test_distortion_ratio_bounds():
    L = 1.5
    sq = unit_square()
    D = distorted_copy(sq, L, seed=4)
    rng = np.random.default_rng(0)
    u, v = rng.random((2, 5000, 2))
    ratio = D.metric(u, v) / sq.metric(u, v)
    assert ratio.min() >= 1 / L - 1e-12 and ratio.max() <= L + 1e-12


def test_distorted_copy_is_a_metric():
    for sp in (snowflake(0.5), unit_square(), unit_interval()):
        assert check_metric_axioms(distorted_copy(sp, 1.5, 2), 2000, 0).passed


def test_inherited_quasi_metric_violations_are_not_rejections():
    H = heisenberg()
    warped, to_base = _distortion(H, 1.5, 0)
    assert not check_metric_axioms(warped, 20_000, 1).passed
    assert not _introduces_violation(H, warped, to_base, 20_000, 1)


def test_bilipschitz_identity_trivially_passes():
    res = bilipschitz_invariance_test(snowflake(0.5), L=1.0, trials=2, cfg=TINY)
    assert res.passed and res.rejected_trials == 0


def test_bilipschitz_snowflake():
    res = bilipschitz_invariance_test(snowflake(0.5), 1.5, 2, FAST, seed=1)
    assert res.passed
    assert all(abs(e - 2) < 0.05 for e in res.estimates)


def test_bilipschitz_point():
    assert bilipschitz_invariance_test(single_point(), 1.5, 3, FAST).passed


def test_bilipschitz_preconditions():
    with pytest.raises(ValueError):
        bilipschitz_invariance_test(snowflake(0.5), 0.9)
    with pytest.raises(ValueError):
        bilipschitz_invariance_test(snowflake(0.5), 1.5, trials=0)


def test_snowflake_under_quadratic_chart():
    # t -> t + t^2/4 has derivative in [1, 1.5] and maps [0, 2(sqrt2 - 1)] onto [0, 1]
    end = 2 * (math.sqrt(2) - 1)
    sp = pullback_metric(snowflake(0.5), lambda t: t + t * t / 4, [0.0], [end])
    assert hausdorff_dimension(sp, FAST, seed=0).dimension == pytest.approx(2, abs=0.04)


def test_square_under_shear():
    shear = lambda v: np.stack([v[..., 0] + 0.2 * v[..., 1], v[..., 1]], axis=-1)
    sp = pullback_metric(unit_square(), shear, [0.0, 0.0], [0.8, 1.0])
    assert hausdorff_dimension(sp, FAST, seed=0).dimension == pytest.approx(2, abs=0.05)
