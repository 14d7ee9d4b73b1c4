import dataclasses
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hausdim.config import EstimatorConfig
from hausdim.exponent import SnappedExponent
from hausdim.hausdorff import (
    CoveringError,
    DimensionReport,
    InconclusiveError,
    Stratification,
    covering_measure,
    detect_infinite_discrete,
    dimension_of_union,
    hausdorff_dimension,
    local_density,
    local_dimension,
    point_report,
    stratified_dimension,
)
from hausdim.metric import (
    discrete_example,
    euclidean_subset,
    heisenberg,
    parabola_graph,
    pullback_metric,
    single_point,
    snowflake,
    unit_interval,
    unit_square,
)

FAST = EstimatorConfig(budget=20_000, coarse_points=8, top_candidates=2, refine_rounds=1, refine_points=2)


def edge_with_snowflake(r):
    """The bottom edge of the unit square carrying the metric |x - y|^r."""
    edge = euclidean_subset(
        lambda u: np.concatenate([u, np.zeros_like(u)], axis=-1), 1, 2, name="edge"
    )
    return dataclasses.replace(
        edge,
        metric=lambda a, b: np.abs(np.asarray(a)[..., 0] - np.asarray(b)[..., 0]) ** r,
        ball_frame=lambda u, t: np.array([[t ** (1.0 / r)]]),
        diameter_hint=1.0,
        oracle_dimension=1.0 / r,
    )


# -- local dimension ---------------------------------------------------------------------


@pytest.mark.parametrize(
    "space,p,dim,tol",
    [
        (unit_square(), [0.5, 0.5], 2.0, 0.05),
        (snowflake(0.5), [0.5], 2.0, 0.02),
        (heisenberg(), [0.0, 0.0, 0.0], 4.0, 0.1),
        (edge_with_snowflake(1 / 3), [0.4, 0.0], 3.0, 0.02),
    ],
)
def test_local_dimension_examples(space, p, dim, tol):
    est = local_dimension(space, p, seed=1)
    assert est.converged
    assert est.value == pytest.approx(dim, abs=tol)


def test_local_dimension_rejects_outside_point():
    with pytest.raises(ValueError):
        local_dimension(unit_interval(), [3.0])


@pytest.mark.parametrize("r,expected", [(0.5, 0.0), (2.0, math.inf)])
def test_local_density_degenerate(r, expected):
    assert local_density(unit_interval(), [0.5], r) == expected


def test_local_density_interval_finite():
    assert local_density(unit_interval(), [0.5], 1.0) == pytest.approx(2.0, rel=1e-9)


def test_local_density_requires_positive_r():
    with pytest.raises(ValueError):
        local_density(unit_interval(), [0.5], 0.0)


@pytest.mark.parametrize(
    "space,p",
    [(snowflake(0.5), [0.3]), (unit_square(), [0.4, 0.6]), (heisenberg(), [0.1, 0.2, -0.3])],
)
def test_density_consistent_with_local_dimension(space, p):
    cfg = EstimatorConfig()
    v = local_dimension(space, p, cfg, seed=2).value
    gap = 2 * cfg.tolerance + 0.01
    assert local_density(space, p, v + gap, cfg, seed=2) == math.inf
    assert local_density(space, p, v - gap, cfg, seed=2) == 0.0


@pytest.mark.parametrize(
    "space,points",
    [
        (snowflake(1 / 3), 20),
        (snowflake(0.5), 20),
        (snowflake(2 / 3), 20),
        (heisenberg(), 20),
    ],
)
def test_phi_constant_on_homogeneous_spaces(space, points):
    U = space.sample_params(points, np.random.default_rng(3))
    vals = []
    for i, u in enumerate(U):
        est = local_dimension(space, space.chart(u[None, :])[0], seed=i, u=u)
        if est.converged:
            vals.append(est.value)
    assert len(vals) >= points // 2
    assert np.std(vals) < 0.05


# -- discreteness -------------------------------------------------------------------------


def test_discrete_detected():
    assert detect_infinite_discrete(discrete_example(), 1000, 0.5, seed=0)


@pytest.mark.parametrize("space", [unit_square(), snowflake(0.5), unit_interval()])
def test_connected_spaces_not_discrete(space):
    assert not detect_infinite_discrete(space, 1000, 0.5, seed=0)
    assert not detect_infinite_discrete(space, 500, seed=1)


def test_point_not_discrete():
    assert not detect_infinite_discrete(single_point(), 100, 0.5)


def test_discrete_budget_precondition():
    with pytest.raises(ValueError):
        detect_infinite_discrete(unit_square(), 1)


# -- sup search -------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def snow_report():
    return hausdorff_dimension(snowflake(0.5), FAST, seed=5)


def test_sup_search_snowflake(snow_report):
    assert snow_report.dimension == pytest.approx(2.0, abs=0.02)
    assert snow_report.snapped.snapped and snow_report.snapped.value == 2


def test_report_dimension_is_max_of_converged(snow_report):
    conv = [s for s in snow_report.samples if s.exponent.converged]
    best = max(s.exponent.value for s in conv)
    assert snow_report.dimension == best
    first = next(s for s in conv if s.exponent.value == best)
    np.testing.assert_array_equal(snow_report.argmax_witness, first.point)


def test_report_points_in_domain(snow_report):
    pts = np.array([s.point for s in snow_report.samples])
    assert np.all(snowflake(0.5).domain_test(pts))
    stages = {s.stage for s in snow_report.samples}
    assert stages == {"coarse", "refine-1"}


def test_report_serialises(snow_report):
    doc = json.loads(json.dumps(snow_report.to_dict()))
    assert doc["snapped"] == "2"
    assert doc["config"]["t0"] == "auto"
    assert len(doc["samples"]) == len(snow_report.samples)


def test_discrete_report_is_infinite():
    rep = hausdorff_dimension(discrete_example(), FAST, seed=0)
    assert math.isinf(rep.dimension) and rep.discrete
    assert rep.to_dict()["dimension"] == "inf"
    assert str(rep.snapped) == "inf"


def test_parabola_dimension():
    rep = hausdorff_dimension(parabola_graph(), FAST, seed=2)
    assert rep.dimension == pytest.approx(1.0, abs=0.1)


def test_inconclusive_carries_partial_report():
    cfg = FAST.with_(tolerance=1e-6, refine_rounds=0, coarse_points=3)
    with pytest.raises(InconclusiveError) as info:
        hausdorff_dimension(unit_square(), cfg, seed=0)
    partial = info.value.report
    assert partial is not None and len(partial.samples) == 3
    assert not any(s.exponent.converged for s in partial.samples)


def test_sup_search_deterministic():
    a = hausdorff_dimension(snowflake(2 / 3), FAST, seed=3).to_dict()
    b = hausdorff_dimension(snowflake(2 / 3), FAST, seed=3).to_dict()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_workers_do_not_change_report():
    a = hausdorff_dimension(snowflake(0.5), FAST, seed=4).to_dict()
    b = hausdorff_dimension(snowflake(0.5), FAST.with_(workers=3), seed=4).to_dict()
    a["config"].pop("workers")
    b["config"].pop("workers")
    assert a == b


@pytest.mark.parametrize("h", [lambda v: v / 2, lambda v: (v + v * v / 2) / 4])
def test_isometry_invariance(h):
    S = snowflake(0.5)
    P = pullback_metric(S, h, [0.0], [2.0])
    a = hausdorff_dimension(S, FAST, seed=6).dimension
    b = hausdorff_dimension(P, FAST, seed=6).dimension
    assert abs(a - b) <= 2 * FAST.tolerance


def test_isometry_invariance_square():
    S = unit_square()
    P = pullback_metric(S, lambda v: np.asarray(v)[..., ::-1] / 2, [0.0, 0.0], [2.0, 2.0])
    a = hausdorff_dimension(S, FAST, seed=7).dimension
    b = hausdorff_dimension(P, FAST, seed=7).dimension
    assert abs(a - b) <= 2 * FAST.tolerance


# -- unions and strata -------------------------------------------------------------------------


def fake(dim, name="x"):
    snapped = SnappedExponent(math.inf if math.isinf(dim) else Fraction(dim).limit_denominator(12), True)
    return DimensionReport(dim, snapped, np.zeros(1), name=name)


def test_union_examples():
    assert dimension_of_union([fake(2.0), fake(1.5)]).dimension == 2.0
    assert math.isinf(dimension_of_union([fake(math.inf), fake(3.0)]).dimension)


def test_union_of_real_pieces():
    reps = [
        hausdorff_dimension(snowflake(0.5), FAST, seed=1),
        hausdorff_dimension(unit_interval(), FAST, seed=2),
        point_report(single_point()),
    ]
    u = dimension_of_union(reps)
    assert u.dimension == pytest.approx(2.0, abs=0.02)
    assert set(u.strata_breakdown) == {"0", "1", "2"}


dims = st.one_of(st.sampled_from([0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, math.inf]), st.floats(0, 10))


@settings(max_examples=100, deadline=None)
@given(st.lists(dims, min_size=1, max_size=6), st.lists(dims, min_size=1, max_size=6), st.randoms())
def test_union_laws(xs, ys, rnd):
    A = [fake(x) for x in xs]
    B = [fake(y) for y in ys]
    U = dimension_of_union
    # associativity
    assert U([U(A), U(B)]).dimension == U(A + B).dimension
    # commutativity
    shuffled = list(A)
    rnd.shuffle(shuffled)
    assert U(shuffled).dimension == U(A).dimension
    # idempotence
    assert U(A + A).dimension == U(A).dimension
    # the point report is the identity
    assert U(A + [point_report(single_point())]).dimension == U(A).dimension
    assert U(A).dimension == max(xs)


def test_stratified_single_stratum():
    rep = stratified_dimension(Stratification((snowflake(0.5),)), FAST, seed=0)
    assert rep.dimension == pytest.approx(2.0, abs=0.02)


def test_stratified_lower_stratum_dominates():
    strat = Stratification((unit_square(), edge_with_snowflake(1 / 3)))
    assert strat.top_dim == 2
    rep = stratified_dimension(strat, FAST, seed=0)
    assert rep.dimension == pytest.approx(3.0, abs=0.05)
    assert rep.snapped.value == 3


def test_stratified_zero_dimensional():
    rep = stratified_dimension(Stratification((single_point(), single_point((1.0, 1.0)))), FAST)
    assert rep.dimension == 0


def test_stratification_top_dim_checked():
    with pytest.raises(ValueError):
        Stratification((unit_square(),), top_dim=1)
    with pytest.raises(ValueError):
        Stratification(())


# -- coverings -------------------------------------------------------------------------------------


@pytest.mark.parametrize("r,delta", [(0.5, 0.1), (2.0, 0.01)])
def test_covering_point(r, delta):
    c = covering_measure(single_point(), r, delta)
    assert c.ball_count == 1
    assert c.value == pytest.approx(delta**r)


def test_covering_interval_oracles():
    c1 = covering_measure(unit_interval(), 1.0, 1 / 64, seed=0)
    assert 0.5 <= c1.value <= 2.0
    c2 = covering_measure(unit_interval(), 2.0, 1 / 64, seed=0)
    assert 0.5 / 64 <= c2.value <= 2.0 / 64


def test_covering_budget_error():
    with pytest.raises(CoveringError):
        covering_measure(unit_interval(), 1.0, 1 / 64, budget=4096, max_centers=10)


def test_covering_rejects_bad_arguments():
    with pytest.raises(ValueError):
        covering_measure(unit_interval(), 0.0, 0.1)
    with pytest.raises(ValueError):
        covering_measure(unit_interval(), 1.0, -0.1)


@pytest.mark.parametrize(
    "space,oracle,deltas",
    [
        (unit_interval(), 1.0, [2.0**-j for j in range(3, 8)]),
        (unit_square(), 2.0, [2.0**-j for j in range(2, 6)]),
        (snowflake(0.5), 2.0, [2.0**-j for j in range(2, 6)]),
    ],
)
def test_covering_trend(space, oracle, deltas):
    below = [covering_measure(space, oracle - 0.5, d, budget=8192).value for d in deltas]
    above = [covering_measure(space, oracle + 0.5, d, budget=8192).value for d in deltas]
    assert all(b > a for a, b in zip(below, below[1:]))
    assert all(b < a for a, b in zip(above, above[1:]))
