"""Numerical Hausdorff dimension of chart-presented metric spaces.

The estimate rests on the identity ``dim_H = sup_p phi(p)``, where ``phi(p)``
is the exponent of ``t -> mu(B(p, t))`` as the radius shrinks.
"""

from .config import ConfigError, EstimatorConfig
from .exponent import (
    ExponentEstimate,
    InsufficientDataError,
    PowerFieldMode,
    SnappedExponent,
    UnconvergedError,
    fit_log_slope,
    nearest_rational,
    slope_ratio_check,
    snap_exponent,
)
from .family import (
    BilipschitzResult,
    FinitenessResult,
    SweepResult,
    bilipschitz_invariance_test,
    constant_family,
    distorted_copy,
    family_sweep,
    finiteness_check,
    mixed_family,
    snowflake_family,
)
from .hausdorff import (
    CoveringError,
    CoveringEstimate,
    DimensionReport,
    InconclusiveError,
    LocalDimensionSample,
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
from .metric import (
    BUILTIN_SPACES,
    AxiomCheck,
    FamilySpec,
    MetricSpaceInstance,
    SamplerError,
    SpaceError,
    check_metric_axioms,
    discrete_example,
    euclidean_subset,
    heisenberg,
    parabola_graph,
    pullback_metric,
    restrict_domain,
    single_point,
    snowflake,
    unit_cube,
    unit_interval,
    unit_square,
)
from .volume import (
    BoxBoundsEstimate,
    UnsupportedOperationError,
    VolumeEstimate,
    VolumeProfile,
    box_bounds,
    estimate_ball_volume,
    volume_profile,
)

__version__ = "0.1.0"
