"""Command-line front end.

A run reads a space document (JSON)::

    {"family": "snowflake", "params": {"r": 0.5},
     "domain": {"lower": [0.0], "upper": [1.0]},
     "strata": [ ...more space documents... ]}

and writes one JSON report that echoes the resolved configuration, so a
report alone is enough to rerun it.  Output files are written atomically.

Exit codes: 0 success, 2 malformed input, 3 unknown family, 4 failed
precondition, 5 budget too small, 6 inconclusive estimate, 7 failed
validation.
"""

from __future__ import annotations

import itertools
import json
import math
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Optional

import click
import numpy as np

from . import __version__
from ._rng import child_seed
from .config import ConfigError, EstimatorConfig
from .exponent import InsufficientDataError, PowerFieldMode, snap_exponent
from .family import family_sweep, finiteness_check
from .hausdorff import (
    CoveringError,
    InconclusiveError,
    Stratification,
    covering_measure,
    detect_infinite_discrete,
    hausdorff_dimension,
    local_density,
    local_dimension,
    point_report,
    stratified_dimension,
)
from .metric import (
    FamilySpec,
    MetricSpaceInstance,
    SpaceError,
    check_metric_axioms,
    discrete_example,
    heisenberg,
    parabola_graph,
    restrict_domain,
    single_point,
    snowflake,
    unit_cube,
    unit_interval,
    unit_square,
)
from .volume import MIN_BUDGET

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_UNKNOWN_FAMILY = 3
EXIT_PRECONDITION = 4
EXIT_BUDGET = 5
EXIT_INCONCLUSIVE = 6
EXIT_VALIDATION = 7


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# -- space documents ---------------------------------------------------------------


def _mixed(alpha: float) -> MetricSpaceInstance:
    return discrete_example() if alpha < 0 else snowflake(0.5)


# name -> (builder taking keyword params, required params, optional params with defaults)
FAMILIES: dict[str, tuple[Callable[..., MetricSpaceInstance], tuple, dict]] = {
    "snowflake": (lambda r: snowflake(float(r)), ("r",), {}),
    "heisenberg": (
        lambda gauge, half_width: heisenberg(str(gauge), float(half_width)),
        (),
        {"gauge": "matrix", "half_width": 1.0},
    ),
    "interval": (unit_interval, (), {}),
    "square": (unit_square, (), {}),
    "cube": (lambda k: unit_cube(int(k)), ("k",), {}),
    "parabola": (parabola_graph, (), {}),
    "point": (lambda coords: single_point(tuple(float(c) for c in coords)), (), {"coords": [0.0, 0.0]}),
    "discrete": (discrete_example, (), {}),
    "mixed": (lambda alpha: _mixed(float(alpha)), ("alpha",), {}),
    "constant": (lambda alpha: unit_square(), ("alpha",), {}),
}


def _load_json(path: str, what: str) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"cannot read {what} {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_PARSE, f"{what} {path} is not valid JSON: {exc}") from None


def normalise_spec(doc: Any, where: str = "space") -> dict:
    """Validate a space document and fill in defaults."""
    if not isinstance(doc, dict):
        raise CliError(EXIT_PARSE, f"{where}: expected a JSON object")
    unknown = set(doc) - {"family", "params", "domain", "strata", "seed", "path"}
    if unknown:
        raise CliError(EXIT_PARSE, f"{where}: unknown fields {sorted(unknown)}")
    name = doc.get("family")
    if not isinstance(name, str):
        raise CliError(EXIT_PARSE, f"{where}: 'family' must be a string")
    if name not in FAMILIES:
        raise CliError(EXIT_UNKNOWN_FAMILY, f"{where}: unknown family {name!r}; known: {', '.join(sorted(FAMILIES))}")
    _, required, optional = FAMILIES[name]
    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise CliError(EXIT_PARSE, f"{where}: 'params' must be an object")
    extra = set(params) - set(required) - set(optional)
    if extra:
        raise CliError(EXIT_PARSE, f"{where}: family {name!r} takes no parameters {sorted(extra)}")
    missing = [p for p in required if p not in params]
    if missing:
        raise CliError(EXIT_PARSE, f"{where}: family {name!r} needs parameters {missing}")
    out = {"family": name, "params": {**optional, **params}}
    dom = doc.get("domain")
    if dom is not None:
        if not isinstance(dom, dict) or set(dom) != {"lower", "upper"}:
            raise CliError(EXIT_PARSE, f"{where}: 'domain' must be {{\"lower\": [...], \"upper\": [...]}}")
        try:
            out["domain"] = {k: [float(x) for x in dom[k]] for k in ("lower", "upper")}
        except (TypeError, ValueError):
            raise CliError(EXIT_PARSE, f"{where}: domain bounds must be lists of numbers") from None
    strata = doc.get("strata")
    if strata is not None:
        if not isinstance(strata, list):
            raise CliError(EXIT_PARSE, f"{where}: 'strata' must be a list")
        out["strata"] = [normalise_spec(s, f"{where}.strata[{i}]") for i, s in enumerate(strata)]
    if "seed" in doc:
        if not isinstance(doc["seed"], int) or isinstance(doc["seed"], bool):
            raise CliError(EXIT_PARSE, f"{where}: 'seed' must be an integer")
        out["seed"] = doc["seed"]
    if "path" in doc:
        out["path"] = doc["path"]
    return out


def build_space(spec: dict) -> MetricSpaceInstance:
    builder, _, _ = FAMILIES[spec["family"]]
    try:
        space = builder(**spec["params"])
        if "domain" in spec:
            space = restrict_domain(space, spec["domain"]["lower"], spec["domain"]["upper"])
    except SpaceError as exc:
        raise CliError(EXIT_PRECONDITION, f"cannot build {spec['family']}: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise CliError(EXIT_PARSE, f"bad parameters for {spec['family']}: {exc}") from None
    return space


# -- serialisation -------------------------------------------------------------------------


def _clean(obj):
    """JSON-ready copy: infinities become "inf", NaN becomes null."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps(doc: dict) -> str:
    return json.dumps(_clean(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _atomic_write(path: str, text: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _tsv(header, rows) -> str:
    lines = ["\t".join(header)]
    for row in rows:
        cells = []
        for v in row:
            v = _clean(v)
            cells.append("nan" if v is None else (repr(v) if isinstance(v, float) else str(v)))
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


# -- shared options ----------------------------------------------------------------------------


def _estimator_options(f):
    opts = [
        click.option("--space", "space_path", required=True, type=click.Path(dir_okay=False), help="Space document (JSON)."),
        click.option("--budget", type=int, default=None, help="Monte Carlo samples per scale."),
        click.option("--scales", type=int, default=None, help="Number of scales in the ladder."),
        click.option("--ratio", type=float, default=None, help="Ratio between consecutive scales."),
        click.option("--t0", default="auto", show_default=True, help="Largest scale, or 'auto' for diameter/8."),
        click.option("--mode", type=click.Choice(["polybounded", "general"]), default="polybounded", show_default=True),
        click.option("--max-denominator", type=int, default=None, help="Largest denominator when snapping."),
        click.option("--tolerance", type=float, default=None, help="Convergence tolerance of slope fits."),
        click.option("--seed", type=int, default=None, help="Master seed (default: the document's seed, else 0)."),
        click.option("--coarse-points", type=int, default=None, help="Points in the coarse sup search."),
        click.option("--refine-rounds", type=int, default=None, help="Refinement rounds of the sup search."),
        click.option("--refine-points", type=int, default=None, help="Points per candidate per round."),
        click.option("--top-candidates", type=int, default=None, help="Candidates refined per round."),
        click.option("--workers", type=int, default=1, show_default=True, help="Threads for local evaluations."),
        click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False), help="Report path (default stdout)."),
        click.option("--emit-table", "table_path", default=None, type=click.Path(dir_okay=False), help="Also write tab-separated plot data."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _config(opts: dict) -> EstimatorConfig:
    if opts["budget"] is not None and opts["budget"] < MIN_BUDGET:
        raise CliError(EXIT_BUDGET, f"budget {opts['budget']} is below the minimum {MIN_BUDGET}")
    t0 = opts["t0"]
    if t0 == "auto":
        t0 = None
    else:
        try:
            t0 = float(t0)
        except ValueError:
            raise CliError(EXIT_PARSE, f"--t0 must be a number or 'auto', got {opts['t0']!r}") from None
    mode = PowerFieldMode(
        "polynomially-bounded" if opts["mode"] == "polybounded" else "general",
        **({} if opts["max_denominator"] is None else {"max_denominator": opts["max_denominator"]}),
    )
    fields = {
        "budget": opts["budget"],
        "num_scales": opts["scales"],
        "ratio": opts["ratio"],
        "tolerance": opts["tolerance"],
        "coarse_points": opts["coarse_points"],
        "refine_rounds": opts["refine_rounds"],
        "refine_points": opts["refine_points"],
        "top_candidates": opts["top_candidates"],
    }
    try:
        return EstimatorConfig(
            t0=t0, mode=mode, workers=opts["workers"], **{k: v for k, v in fields.items() if v is not None}
        )
    except (ConfigError, ValueError) as exc:
        raise CliError(EXIT_PRECONDITION, f"invalid configuration: {exc}") from None


def _seed(opts: dict, spec: dict) -> int:
    if opts["seed"] is not None:
        return int(opts["seed"])
    return int(spec.get("seed", 0))


def _envelope(command: str, spec: dict, cfg: EstimatorConfig, seed: int, space=None, extra=None) -> dict:
    conf = cfg.to_dict()
    if space is not None:
        conf["t0_resolved"] = space.diameter_hint / 8.0 if cfg.t0 is None else cfg.t0
        conf["separation_resolved"] = 0.1 * space.diameter_hint if cfg.separation is None else cfg.separation
    conf.update(extra or {})
    return {
        "command": command,
        "version": __version__,
        "seed": seed,
        "space": {k: v for k, v in spec.items() if k != "path"},
        "config": conf,
    }


def _emit(opts: dict, doc: dict, table: Optional[str] = None) -> None:
    text = dumps(doc)
    if opts["out_path"]:
        _atomic_write(opts["out_path"], text)
    else:
        click.echo(text, nl=False)
    if opts["table_path"] and table is not None:
        _atomic_write(opts["table_path"], table)


def _run(fn):
    """Map library errors onto exit codes."""

    def wrapper(**opts):
        try:
            code = fn(opts) or EXIT_OK
        except CliError as exc:
            click.echo(f"error: {exc}", err=True)
            code = exc.code
        except CoveringError as exc:
            click.echo(f"error: {exc}", err=True)
            code = EXIT_BUDGET
        except (SpaceError, InsufficientDataError, ConfigError, ValueError) as exc:
            click.echo(f"error: {exc}", err=True)
            code = EXIT_PRECONDITION
        sys.exit(code)

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _prepare(opts):
    spec = normalise_spec(_load_json(opts["space_path"], "space document"))
    cfg = _config(opts)
    return spec, cfg, _seed(opts, spec)


# -- commands ----------------------------------------------------------------------------------


@click.group()
@click.version_option(__version__, prog_name="hausdim")
def cli():
    """Estimate Hausdorff dimensions of chart-presented metric spaces."""


@cli.command()
@_estimator_options
@_run
def estimate(opts):
    """Hausdorff dimension of a space (or of a union of strata)."""
    spec, cfg, seed = _prepare(opts)
    space = build_space(spec)
    doc = _envelope("estimate", spec, cfg, seed, space)
    try:
        if "strata" in spec:
            pieces = (space,) + tuple(build_space(s) for s in spec["strata"])
            report = stratified_dimension(Stratification(pieces), cfg, seed)
        elif space.intrinsic_dim == 0:
            report = point_report(space, seed, cfg)
        else:
            report = hausdorff_dimension(space, cfg, seed)
    except InconclusiveError as exc:
        doc["status"] = "inconclusive"
        doc["result"] = None if exc.report is None else exc.report.to_dict()
        _emit(opts, doc, _sample_table(exc.report) if exc.report else None)
        click.echo(f"inconclusive: {exc}", err=True)
        return EXIT_INCONCLUSIVE
    doc["status"] = "ok"
    doc["result"] = report.to_dict()
    _emit(opts, doc, _sample_table(report))
    return EXIT_OK


def _sample_table(report) -> str:
    rows = []

    def walk(rep, stratum):
        for s in rep.samples:
            rows.append(
                [stratum, s.stage, " ".join(repr(float(c)) for c in s.point), s.exponent.value,
                 s.exponent.ci_halfwidth, str(bool(s.exponent.converged)).lower()]
            )

    if report.strata_breakdown:
        for key, sub in report.strata_breakdown.items():
            walk(sub, key)
    else:
        walk(report, "0")
    return _tsv(["stratum", "stage", "point", "phi", "ci_halfwidth", "converged"], rows)


def _path_params(space: MetricSpaceInstance, path) -> np.ndarray:
    if not isinstance(path, dict):
        raise CliError(EXIT_PARSE, "path must be an object with 'from'/'to'/'points' or 'params'")
    k = space.intrinsic_dim
    try:
        if "params" in path:
            U = np.asarray(path["params"], dtype=float).reshape(-1, k)
        else:
            a = np.asarray(path["from"], dtype=float).reshape(k)
            b = np.asarray(path["to"], dtype=float).reshape(k)
            n = int(path.get("points", 8))
            if n < 1:
                raise ValueError("points must be positive")
            s = np.linspace(0.0, 1.0, n)[:, None]
            U = a + s * (b - a)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(EXIT_PARSE, f"malformed path: {exc}") from None
    if not np.all(space.in_box(U)):
        raise CliError(EXIT_PRECONDITION, "path leaves the chart box")
    return U


@cli.command()
@_estimator_options
@click.option("--path", "path_path", default=None, type=click.Path(dir_okay=False),
              help="Path document: {'from': u0, 'to': u1, 'points': n} or {'params': [...]}.")
@_run
def profile(opts):
    """Local dimension phi along a path in chart parameters."""
    spec, cfg, seed = _prepare(opts)
    space = build_space(spec)
    if space.intrinsic_dim == 0:
        raise CliError(EXIT_PRECONDITION, "profiles need a space of positive intrinsic dimension")
    path = _load_json(opts["path_path"], "path document") if opts["path_path"] else spec.get("path")
    if path is None:
        raise CliError(EXIT_PARSE, "no path given (use --path or a 'path' field)")
    U = _path_params(space, path)
    X = np.asarray(space.chart(U), dtype=float).reshape(len(U), space.ambient_dim)
    rows, table = [], []
    for i, (u, x) in enumerate(zip(U, X)):
        est = local_dimension(space, x, cfg, child_seed(seed, 0x9A, i), u=u)
        snapped = str(snap_exponent(est, cfg.mode)) if est.converged else None
        rows.append(
            {"index": i, "params": u, "point": x, "phi": est.value, "ci_halfwidth": est.ci_halfwidth,
             "residual": est.residual, "converged": est.converged, "snapped": snapped}
        )
        table.append([i] + list(u) + [est.value, est.ci_halfwidth, str(bool(est.converged)).lower()])
    doc = _envelope("profile", spec, cfg, seed, space, {"path": path})
    doc["status"] = "ok"
    doc["result"] = {"points": rows}
    header = ["index"] + [f"u{j}" for j in range(space.intrinsic_dim)] + ["phi", "ci_halfwidth", "converged"]
    _emit(opts, doc, _tsv(header, table))


@cli.command()
@_estimator_options
@click.option("--r", "exponents", type=float, multiple=True, required=True, help="Exponent r (repeatable).")
@click.option("--delta0", type=float, default=None, help="Largest diameter (default diameter/8).")
@click.option("--halvings", type=int, default=4, show_default=True, help="Number of halvings of delta.")
@click.option("--cloud", type=int, default=4096, show_default=True, help="Sampled cloud size.")
@_run
def covering(opts):
    """Greedy covering estimates of H^r_delta over a delta ladder."""
    spec, cfg, seed = _prepare(opts)
    space = build_space(spec)
    if opts["cloud"] < 1:
        raise CliError(EXIT_BUDGET, "cloud size must be positive")
    if opts["halvings"] < 0:
        raise CliError(EXIT_PRECONDITION, "halvings must be nonnegative")
    d0 = space.diameter_hint / 8.0 if opts["delta0"] is None else opts["delta0"]
    deltas = [d0 * 0.5**j for j in range(opts["halvings"] + 1)]
    rows = []
    for r in opts["exponents"]:
        for d in deltas:
            c = covering_measure(space, r, d, opts["cloud"], seed)
            rows.append({"r": c.r, "delta": c.delta, "ball_count": c.ball_count, "value": c.value})
    extra = {"exponents": list(opts["exponents"]), "delta0": d0, "halvings": opts["halvings"], "cloud": opts["cloud"]}
    doc = _envelope("covering", spec, cfg, seed, space, extra)
    doc["status"] = "ok"
    doc["result"] = {"coverings": rows}
    table = _tsv(["r", "delta", "ball_count", "value"], [[x["r"], x["delta"], x["ball_count"], x["value"]] for x in rows])
    _emit(opts, doc, table)


def _grid_points(grid_doc) -> tuple[list[str], list[tuple]]:
    if not isinstance(grid_doc, dict):
        raise CliError(EXIT_PARSE, "grid document must be an object")
    if "params" in grid_doc:
        axes = grid_doc["params"]
        if not isinstance(axes, dict) or not axes:
            raise CliError(EXIT_PARSE, "grid 'params' must map parameter names to value lists")
        names = sorted(axes)
        try:
            values = [[float(v) for v in axes[n]] for n in names]
        except (TypeError, ValueError):
            raise CliError(EXIT_PARSE, "grid values must be numbers") from None
        return names, list(itertools.product(*values))
    if "points" in grid_doc:
        pts = grid_doc["points"]
        if not isinstance(pts, list) or not pts or not all(isinstance(p, dict) for p in pts):
            raise CliError(EXIT_PARSE, "grid 'points' must be a non-empty list of objects")
        names = sorted(pts[0])
        if any(sorted(p) != names for p in pts):
            raise CliError(EXIT_PARSE, "all grid points must name the same parameters")
        try:
            return names, [tuple(float(p[n]) for n in names) for p in pts]
        except (TypeError, ValueError):
            raise CliError(EXIT_PARSE, "grid values must be numbers") from None
    raise CliError(EXIT_PARSE, "grid document needs 'params' or 'points'")


@cli.command()
@_estimator_options
@click.option("--grid", "grid_path", required=True, type=click.Path(dir_okay=False),
              help="Grid document: {'params': {name: [values]}} or {'points': [{name: value}, ...]}.")
@click.option("--cap", type=int, default=16, show_default=True, help="Distinct-value cap of the finiteness check.")
@_run
def sweep(opts):
    """Snapped dimensions across a parameter grid of a family."""
    spec, cfg, seed = _prepare(opts)
    names, points = _grid_points(_load_json(opts["grid_path"], "grid document"))
    if not points:
        raise CliError(EXIT_PRECONDITION, "grid is empty")
    _, required, optional = FAMILIES[spec["family"]]
    bad = set(names) - set(required) - set(optional)
    if bad:
        raise CliError(EXIT_PARSE, f"family {spec['family']!r} has no parameters {sorted(bad)}")

    def instantiate(alpha):
        params = {**spec["params"], **dict(zip(names, alpha))}
        return build_space({**spec, "params": params})

    def guarded(alpha):
        try:
            return instantiate(alpha)
        except CliError as exc:
            raise SpaceError(str(exc)) from None

    result = family_sweep(FamilySpec(spec["family"], len(names), guarded), points, cfg, seed)
    fin = finiteness_check(result, cfg.mode, opts["cap"])
    doc = _envelope("sweep", spec, cfg, seed, None, {"grid_names": names, "cap": opts["cap"]})
    doc["status"] = "ok"
    doc["result"] = {
        "sweep": result.to_dict(),
        "finiteness": {
            "applicable": fin.applicable,
            "passed": fin.passed,
            "distinct_count": fin.distinct_count,
            "offending": list(fin.offending),
        },
    }
    _emit(opts, doc, result.to_table(names=names))


@cli.command()
@_estimator_options
@click.option("--trials", type=int, default=10_000, show_default=True, help="Sampled triples for the axiom check.")
@click.option("--points", type=int, default=4, show_default=True, help="Sample points for local checks.")
@_run
def validate(opts):
    """Metric axioms plus estimator invariants on one space."""
    spec, cfg, seed = _prepare(opts)
    space = build_space(spec)
    if opts["trials"] < 1 or opts["points"] < 1:
        raise CliError(EXIT_PRECONDITION, "trials and points must be positive")
    checks = {}
    ax = check_metric_axioms(space, opts["trials"], seed)
    checks["metric_axioms"] = {"passed": ax.passed, "violation": ax.violation, "witness": ax.witness}
    pts = space.sample(max(opts["points"], 64), seed, 0x7A)
    checks["sampler_in_domain"] = {"passed": bool(np.all(space.domain_test(pts)))}
    discrete = detect_infinite_discrete(space, cfg.discrete_budget, cfg.separation, seed)
    oracle = space.oracle_dimension
    checks["discreteness"] = {
        "detected": discrete,
        "passed": (oracle is None) or (discrete == (oracle is not None and math.isinf(oracle))),
    }
    if space.intrinsic_dim > 0 and not discrete:
        U = space.sample_params(opts["points"], np.random.default_rng(child_seed(seed, 0x7B)))
        X = np.asarray(space.chart(U), dtype=float).reshape(len(U), space.ambient_dim)
        ests = [local_dimension(space, x, cfg, child_seed(seed, 0x7C, i), u=u) for i, (u, x) in enumerate(zip(U, X))]
        vals = [e.value for e in ests if e.converged]
        spread = float(np.std(vals)) if vals else math.nan
        entry = {"values": [e.value for e in ests], "converged": [e.converged for e in ests], "spread": spread}
        entry["passed"] = bool(vals)
        if oracle is not None and vals:
            entry["oracle"] = oracle
            entry["passed"] = abs(max(vals) - oracle) <= max(2 * cfg.tolerance, 0.05 * oracle)
        checks["local_dimension"] = entry
        if vals:
            i = next(j for j, e in enumerate(ests) if e.converged)
            v = ests[i].value
            gap = 2 * cfg.tolerance + 0.01
            hi = local_density(space, X[i], v + gap, cfg, child_seed(seed, 0x7C, i))
            lo = local_density(space, X[i], max(v - gap, 1e-3), cfg, child_seed(seed, 0x7C, i))
            checks["density_consistency"] = {
                "phi": v, "above": hi, "below": lo,
                "passed": math.isinf(hi) and (lo == 0.0 or v - gap <= 0),
            }
    passed = all(c["passed"] for c in checks.values())
    doc = _envelope("validate", spec, cfg, seed, space, {"trials": opts["trials"], "points": opts["points"]})
    doc["status"] = "ok" if passed else "failed"
    doc["result"] = {"passed": passed, "checks": checks}
    rows = [[name, str(bool(c["passed"])).lower()] for name, c in checks.items()]
    _emit(opts, doc, _tsv(["check", "passed"], rows))
    return EXIT_OK if passed else EXIT_VALIDATION


def main(argv=None):
    cli.main(args=argv, prog_name="hausdim")


if __name__ == "__main__":
    main()
