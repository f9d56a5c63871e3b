"""Configuration-driven orchestration of the full analysis sequence.

One staged executor covers the full pipeline and every subcommand subset,
so a partial run's files and report sections are byte-identical to the
matching pieces of a full run.  Any stage failure surfaces as a
PipelineError tagged with the stage name.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from ._version import __version__
from . import cluster as _cluster
from . import hotspot as _hotspot
from . import ols as _ols
from . import render as _render
from . import spatial_models as _spatial
from . import stats as _stats
from . import weights as _weights
from .ingest import (
    drop_missing_rows,
    merge,
    parse_attributes,
    parse_geometry,
    to_feature_collection,
)

__all__ = [
    "PipelineConfig",
    "PipelineError",
    "load_config",
    "run_pipeline",
    "run_subcommand",
    "SUBCOMMANDS",
]

SUBCOMMANDS = ("pipeline", "weights", "hotspot", "regress", "cluster")


class PipelineError(Exception):
    """A stage failure; the message carries the stage tag."""

    def __init__(self, stage: str, cause: str):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")


@dataclass
class PipelineConfig:
    """Everything a run needs, mirroring the flat config file."""

    geometry_path: str
    attributes_path: str
    id_property: str
    id_column: str
    outcome_column: str
    candidate_predictor_columns: list[str]
    contiguity: str = "queen"
    snap_tolerance: float | None = None
    alpha: float = 0.05
    vif_threshold: float = 10.0
    fdr_alpha: float = 0.05
    group_k: int = 5
    top_features_for_grouping: int = 4
    output_dir: str = "."
    spearman_column: str | None = None
    merge_policy: str = "drop-with-report"
    allow_islands: bool = False

    def validate(self) -> None:
        for name in ("geometry_path", "attributes_path", "id_property",
                     "id_column", "outcome_column", "output_dir"):
            value = getattr(self, name)
            if not isinstance(value, str) or not value:
                raise ValueError(f"config field {name} must be a nonempty string")
        preds = self.candidate_predictor_columns
        if not isinstance(preds, list) or not preds:
            raise ValueError("candidate_predictor_columns must be a nonempty list")
        if len(set(preds)) != len(preds):
            raise ValueError("candidate_predictor_columns contains duplicates")
        if self.outcome_column in preds:
            raise ValueError(
                f"outcome column {self.outcome_column!r} may not also be a predictor"
            )
        if self.contiguity not in ("queen", "rook"):
            raise ValueError(f"contiguity must be queen or rook, got {self.contiguity!r}")
        if self.snap_tolerance is not None and not self.snap_tolerance > 0:
            raise ValueError("snap_tolerance must be positive when given")
        for name in ("alpha", "fdr_alpha"):
            v = getattr(self, name)
            if not (0 < v < 1):
                raise ValueError(f"{name} must lie in (0, 1)")
        if not self.vif_threshold > 0:
            raise ValueError("vif_threshold must be positive")
        for name in ("group_k", "top_features_for_grouping"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.merge_policy not in ("drop-with-report", "fail-on-any-unmatched"):
            raise ValueError(f"unknown merge policy {self.merge_policy!r}")
        if self.spearman_column is not None:
            if not isinstance(self.spearman_column, str) or not self.spearman_column:
                raise ValueError("spearman_column must be a nonempty string when given")
            if self.spearman_column == self.outcome_column:
                raise ValueError("spearman_column may not be the outcome column")

    def as_dict(self) -> dict:
        return {
            "geometry_path": self.geometry_path,
            "attributes_path": self.attributes_path,
            "id_property": self.id_property,
            "id_column": self.id_column,
            "outcome_column": self.outcome_column,
            "candidate_predictor_columns": list(self.candidate_predictor_columns),
            "contiguity": self.contiguity,
            "snap_tolerance": self.snap_tolerance,
            "alpha": self.alpha,
            "vif_threshold": self.vif_threshold,
            "fdr_alpha": self.fdr_alpha,
            "group_k": self.group_k,
            "top_features_for_grouping": self.top_features_for_grouping,
            "output_dir": self.output_dir,
            "spearman_column": self.spearman_column,
            "merge_policy": self.merge_policy,
            "allow_islands": self.allow_islands,
        }


_CONFIG_DEFAULTS = {
    "contiguity": "queen",
    "snap_tolerance": None,
    "alpha": 0.05,
    "vif_threshold": 10.0,
    "fdr_alpha": 0.05,
    "group_k": 5,
    "top_features_for_grouping": 4,
    "output_dir": ".",
    "spearman_column": None,
    "merge_policy": "drop-with-report",
    "allow_islands": False,
}
_CONFIG_REQUIRED = (
    "geometry_path",
    "attributes_path",
    "id_property",
    "id_column",
    "outcome_column",
    "candidate_predictor_columns",
)


def load_config(path: str) -> PipelineConfig:
    """Read the flat key-value config document."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise PipelineError("config", f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise PipelineError("config", f"malformed config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise PipelineError("config", "config document must be a flat object")
    known = set(_CONFIG_REQUIRED) | set(_CONFIG_DEFAULTS)
    unknown = sorted(set(doc) - known)
    if unknown:
        raise PipelineError("config", f"unknown config keys {unknown}")
    missing = sorted(k for k in _CONFIG_REQUIRED if k not in doc)
    if missing:
        raise PipelineError("config", f"missing config keys {missing}")
    merged = dict(_CONFIG_DEFAULTS)
    merged.update(doc)
    for key in ("alpha", "vif_threshold", "fdr_alpha"):
        if isinstance(merged[key], int):
            merged[key] = float(merged[key])
    if isinstance(merged["snap_tolerance"], int):
        merged["snap_tolerance"] = float(merged["snap_tolerance"])
    config = PipelineConfig(**merged)
    try:
        config.validate()
    except ValueError as exc:
        raise PipelineError("config", str(exc)) from exc
    return config


@contextmanager
def _stage(name: str):
    try:
        yield
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(name, str(exc)) from exc


def _stars(p: float) -> str:
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


def _fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.6g}"


def _sanitize(obj):
    # JSON cannot carry non-finite floats; encode them as strings/null
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "Infinity" if x > 0 else "-Infinity"
        return x
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


@dataclass(eq=False)
class _Context:
    """Accumulated state shared by the stages of one run."""

    config: PipelineConfig
    dataset: object = None
    dropped_missing: list = field(default_factory=list)
    adjacency: object = None
    island_ids: list = field(default_factory=list)
    w_gi: object = None
    w_rs: object = None
    gi: object = None
    summary_rows: list = field(default_factory=list)
    z_outcome: np.ndarray = None
    z_columns: dict = field(default_factory=dict)
    design_full: object = None
    vif_removed: list = field(default_factory=list)
    design_vif: object = None
    stepwise_trace: list = field(default_factory=list)
    design_step: object = None
    sig_removed: list = field(default_factory=list)
    design_final: object = None
    fit_final: object = None
    diagnostics: object = None
    kb_skipped: str = None
    lm_suite: object = None
    spatial_skip_reason: str = None
    decision: str = None
    decision_warning: str = None
    spatial_fit: object = None
    comparison: object = None
    cluster_features: list = field(default_factory=list)
    dendrogram: object = None
    assignments: np.ndarray = None
    profiles: list = field(default_factory=list)
    spearman_column: str = None
    spearman_rows: list = field(default_factory=list)
    spearman_skip_reason: str = None


def _analysis_columns(config: PipelineConfig, table_columns: list[str]) -> list[str]:
    cols = [config.outcome_column] + list(config.candidate_predictor_columns)
    if config.spearman_column and config.spearman_column not in cols:
        cols.append(config.spearman_column)
    missing = [c for c in cols if c not in table_columns]
    if missing:
        raise ValueError(f"attribute table lacks analysis columns {missing}")
    return cols


def _stage_ingest(ctx: _Context) -> None:
    cfg = ctx.config
    try:
        with open(cfg.geometry_path, "rb") as fh:
            geo_bytes = fh.read()
    except OSError as exc:
        raise ValueError(f"cannot read geometry {cfg.geometry_path}: {exc}") from exc
    try:
        with open(cfg.attributes_path, "rb") as fh:
            attr_bytes = fh.read()
    except OSError as exc:
        raise ValueError(f"cannot read attributes {cfg.attributes_path}: {exc}") from exc
    units = parse_geometry(geo_bytes, cfg.id_property)
    table = parse_attributes(attr_bytes, cfg.id_column)
    merged = merge(units, table, policy=cfg.merge_policy)
    cols = _analysis_columns(cfg, merged.table.columns)
    reduced, dropped_missing = drop_missing_rows(merged, cols)
    if reduced.n < 3:
        raise ValueError(f"only {reduced.n} units remain after merge and missing-value drops")
    ctx.dataset = reduced
    ctx.dropped_missing = dropped_missing


def _stage_weights(ctx: _Context) -> None:
    cfg = ctx.config
    build = (
        _weights.queen_contiguity if cfg.contiguity == "queen" else _weights.rook_contiguity
    )
    adjacency = build(ctx.dataset.units, cfg.snap_tolerance)
    islands = _weights.detect_islands(adjacency)
    ctx.adjacency = adjacency
    ctx.island_ids = [ctx.dataset.units[i].id for i in islands]
    ctx.w_gi = _weights.to_weights(adjacency, "binary", include_self=True)
    if not islands:
        ctx.w_rs = _weights.to_weights(adjacency, "row-standardized")
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ctx.w_rs = _weights.to_weights(adjacency, "row-standardized")


def _stage_summarize(ctx: _Context) -> None:
    cols = _analysis_columns(ctx.config, ctx.dataset.table.columns)
    idx = [ctx.dataset.table.columns.index(c) for c in cols]
    sub = type(ctx.dataset.table)(
        ids=ctx.dataset.table.ids,
        columns=cols,
        values=ctx.dataset.table.values[:, idx],
    )
    ctx.summary_rows = _stats.summarize(sub)


def _stage_zscore(ctx: _Context) -> None:
    cfg = ctx.config
    table = ctx.dataset.table

    def z(name: str) -> np.ndarray:
        try:
            return _stats.zscore(table.column(name))
        except ValueError as exc:
            raise ValueError(f"column {name!r}: {exc}") from exc

    ctx.z_outcome = z(cfg.outcome_column)
    ctx.z_columns = {c: z(c) for c in cfg.candidate_predictor_columns}
    ctx.design_full = _ols.design_matrix(
        [(c, ctx.z_columns[c]) for c in cfg.candidate_predictor_columns]
    )


def _stage_gi_star(ctx: _Context) -> None:
    x = ctx.dataset.table.column(ctx.config.outcome_column)
    ctx.gi = _hotspot.gi_star(ctx.w_gi, x, fdr_alpha=ctx.config.fdr_alpha)


def _stage_vif_prune(ctx: _Context) -> None:
    design, removed = _ols.vif_prune(ctx.design_full, ctx.config.vif_threshold)
    ctx.design_vif = design
    ctx.vif_removed = removed


def _stage_stepwise(ctx: _Context) -> None:
    design, _, trace = _ols.stepwise_aic(ctx.design_vif, ctx.z_outcome)
    ctx.design_step = design
    ctx.stepwise_trace = trace


def _stage_significance(ctx: _Context) -> None:
    design, final_fit, removed = _ols.significance_prune(
        ctx.design_step, ctx.z_outcome, ctx.config.alpha
    )
    ctx.design_final = design
    ctx.fit_final = final_fit
    ctx.sig_removed = removed


def _stage_diagnostics(ctx: _Context) -> None:
    jb = _ols.jarque_bera(ctx.fit_final.residuals)
    cond = _ols.condition_number(ctx.design_final)
    if ctx.design_final.q >= 2:
        kb = _ols.koenker_bassett(ctx.design_final, ctx.fit_final.residuals)
    else:
        kb = None
        ctx.kb_skipped = "final model has no slopes; heteroskedasticity test undefined"
    ctx.diagnostics = _ols.DiagnosticsReport(
        jarque_bera=jb, koenker_bassett=kb, condition_number=cond
    )


def _island_guidance(ctx: _Context) -> str:
    return (
        f"{len(ctx.island_ids)} isolated units ({ctx.island_ids}) have no "
        "neighbors; row-standardized weights and spatial models are "
        "undefined. Remove or reconnect them, raise snap_tolerance, or set "
        "allow_islands to skip the spatial stages."
    )


def _stage_lm(ctx: _Context) -> None:
    if ctx.island_ids:
        if ctx.config.allow_islands:
            ctx.spatial_skip_reason = _island_guidance(ctx)
            return
        raise ValueError(_island_guidance(ctx))
    ctx.lm_suite = _ols.lm_tests(
        ctx.design_final, ctx.z_outcome, ctx.fit_final, ctx.w_rs
    )


def _stage_decision(ctx: _Context) -> None:
    if ctx.spatial_skip_reason:
        return
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        ctx.decision = _ols.model_decision(ctx.lm_suite, ctx.config.alpha)
    for w in caught:
        ctx.decision_warning = str(w.message)


def _stage_spatial(ctx: _Context) -> None:
    if ctx.spatial_skip_reason or ctx.decision == "stay-OLS":
        return
    cache = _spatial.spectral_cache(ctx.w_rs)
    fit_fn = (
        _spatial.fit_error_ml if ctx.decision == "fit-error" else _spatial.fit_lag_ml
    )
    ctx.spatial_fit = fit_fn(ctx.design_final, ctx.z_outcome, ctx.w_rs, cache=cache)


def _stage_compare(ctx: _Context) -> None:
    if ctx.spatial_fit is None:
        return
    ctx.comparison = _spatial.compare(ctx.fit_final, ctx.spatial_fit)


def _final_slope_ranking(ctx: _Context) -> list[str]:
    if ctx.spatial_fit is not None:
        names = ctx.spatial_fit.names
        betas = ctx.spatial_fit.beta
    else:
        names = ctx.fit_final.names
        betas = ctx.fit_final.beta
    slopes = [(abs(float(b)), i, name) for i, (name, b) in enumerate(zip(names, betas)) if name != _ols.INTERCEPT]
    # largest magnitude first; design order breaks exact ties
    slopes.sort(key=lambda t: (-t[0], t[1]))
    return [name for _, _, name in slopes]


def _stage_cluster(ctx: _Context) -> None:
    ranked = _final_slope_ranking(ctx)
    if not ranked:
        raise ValueError("final model retained no predictors to group on")
    count = min(ctx.config.top_features_for_grouping, len(ranked))
    ctx.cluster_features = ranked[:count]
    points = np.column_stack([ctx.z_columns[c] for c in ctx.cluster_features])
    ctx.dendrogram = _cluster.ward_cluster(points)
    ctx.assignments = _cluster.cut(ctx.dendrogram, ctx.config.group_k)


def _stage_profile(ctx: _Context) -> None:
    names = [ctx.config.outcome_column] + ctx.cluster_features
    feats = np.column_stack(
        [ctx.z_outcome] + [ctx.z_columns[c] for c in ctx.cluster_features]
    )
    ctx.profiles = _cluster.profile(ctx.assignments, feats, names)


def _stage_spearman(ctx: _Context) -> None:
    cfg = ctx.config
    column = cfg.spearman_column
    if column is None and ctx.vif_removed:
        column = ctx.vif_removed[0][0]
    if column is None:
        ctx.spearman_skip_reason = (
            "no comparison column configured and collinearity pruning removed nothing"
        )
        return
    ctx.spearman_column = column
    base = ctx.dataset.table.column(column)
    rows = []
    for versus in [cfg.outcome_column] + ctx.cluster_features:
        if versus == column:
            continue
        rho, p = _stats.spearman(base, ctx.dataset.table.column(versus))
        rows.append({"versus": versus, "rho": rho, "p": p, "stars": _stars(p)})
    ctx.spearman_rows = rows


# ---------------------------------------------------------------------------
# report assembly


def _coef_rows(names, beta, se, p, t=None) -> list[dict]:
    rows = []
    for i, name in enumerate(names):
        row = {
            "name": name,
            "coefficient": float(beta[i]),
            "se": None if se is None else float(se[i]),
            "p": None if p is None else float(p[i]),
            "stars": "" if p is None else _stars(float(p[i])),
        }
        if t is not None:
            row["t"] = float(t[i])
        rows.append(row)
    return rows


def _section_weights(ctx: _Context) -> dict:
    links = int(sum(len(nb) for nb in ctx.adjacency.neighbors))
    return {
        "n": ctx.adjacency.n,
        "contiguity": ctx.config.contiguity,
        "mode": "row-standardized",
        "directed_links": links,
        "islands": list(ctx.island_ids),
    }


def _section_hotspot(ctx: _Context) -> dict:
    counts = {c: 0 for c in _hotspot.CLASS_ORDER}
    for c in ctx.gi.classes:
        counts[c] += 1
    return {
        "fdr_alpha": ctx.config.fdr_alpha,
        "counts": counts,
        "max_z": float(np.max(ctx.gi.z)),
        "min_z": float(np.min(ctx.gi.z)),
    }


def _section_selection(ctx: _Context) -> dict:
    return {
        "candidates": list(ctx.config.candidate_predictor_columns),
        "vif_removed": [
            {"column": name, "vif": float(v)} for name, v in ctx.vif_removed
        ],
        "stepwise_trace": [
            {"action": t["action"], "column": t["column"], "aic": float(t["aic"])}
            for t in ctx.stepwise_trace
        ],
        "significance_removed": list(ctx.sig_removed),
        "final_columns": list(ctx.design_final.slope_names),
    }


def _section_ols(ctx: _Context) -> dict:
    fit = ctx.fit_final
    diag = ctx.diagnostics
    kb = diag.koenker_bassett
    lm = None
    if ctx.lm_suite is not None:
        lm = {
            name: {"stat": float(stat), "p": float(p)}
            for name, stat, p in ctx.lm_suite.as_rows()
        }
        lm["degenerate"] = bool(ctx.lm_suite.degenerate)
    return {
        "coefficients": _coef_rows(fit.names, fit.beta, fit.se, fit.p, t=fit.t),
        "n": fit.n,
        "q": fit.q,
        "r2": float(fit.r2),
        "adj_r2": float(fit.adj_r2),
        "sigma2": float(fit.sigma2),
        "sigma2_ml": float(fit.sigma2_ml),
        "log_likelihood": float(fit.log_likelihood),
        "aic": float(fit.aic),
        "diagnostics": {
            "jarque_bera": {"stat": float(diag.jarque_bera[0]), "p": float(diag.jarque_bera[1])},
            "koenker_bassett": (
                None if kb is None else {"stat": float(kb[0]), "p": float(kb[1])}
            ),
            "koenker_bassett_skipped": ctx.kb_skipped,
            "condition_number": float(diag.condition_number),
        },
        "lm_tests": lm,
    }


def _spatial_coef_rows(ctx: _Context) -> list[dict]:
    sf = ctx.spatial_fit
    se_ok = sf.se_available
    param_name = "lambda" if sf.kind == "error" else "rho"
    rows = []
    rows.append(
        {
            "name": sf.names[0],
            "coefficient": float(sf.beta[0]),
            "se": float(sf.beta_se[0]) if se_ok else None,
            "p": float(sf.beta_p[0]) if se_ok else None,
            "stars": _stars(float(sf.beta_p[0])) if se_ok else "",
        }
    )
    rows.append(
        {
            "name": param_name,
            "coefficient": float(sf.param),
            "se": float(sf.param_se) if se_ok else None,
            "p": float(sf.param_p) if se_ok else None,
            "stars": _stars(float(sf.param_p)) if se_ok else "",
        }
    )
    for i in range(1, len(sf.names)):
        rows.append(
            {
                "name": sf.names[i],
                "coefficient": float(sf.beta[i]),
                "se": float(sf.beta_se[i]) if se_ok else None,
                "p": float(sf.beta_p[i]) if se_ok else None,
                "stars": _stars(float(sf.beta_p[i])) if se_ok else "",
            }
        )
    return rows


def _section_spatial(ctx: _Context):
    if ctx.spatial_fit is None:
        return None
    sf = ctx.spatial_fit
    return {
        "kind": sf.kind,
        "coefficients": _spatial_coef_rows(ctx),
        "sigma2": float(sf.sigma2),
        "log_likelihood": float(sf.log_likelihood),
        "aic": float(sf.aic),
        "pseudo_r2": float(sf.pseudo_r2),
        "se_available": bool(sf.se_available),
    }


def _section_comparison(ctx: _Context):
    if ctx.comparison is None:
        return None
    return {
        "rows": [dict(r) for r in ctx.comparison.rows],
        "preferred": ctx.comparison.preferred,
        "note": ctx.comparison.note,
    }


def _section_groups(ctx: _Context) -> dict:
    return {
        "k": ctx.config.group_k,
        "linkage": "ward-d2",
        "features": list(ctx.cluster_features),
        "thresholds": [0.25, 1.0],
        "profiles": [
            {
                "group": pr.group,
                "count": pr.count,
                "means": {n: float(m) for n, m in zip(pr.feature_names, pr.means)},
                "labels": dict(zip(pr.feature_names, pr.labels)),
            }
            for pr in ctx.profiles
        ],
    }


def _section_spearman(ctx: _Context) -> dict:
    if ctx.spearman_skip_reason:
        return {"skipped_reason": ctx.spearman_skip_reason}
    return {
        "column": ctx.spearman_column,
        "rows": [dict(r) for r in ctx.spearman_rows],
    }


def _build_report(ctx: _Context, which: str) -> dict:
    report = {
        "tool": {"name": "arealstat", "version": __version__, "command": which},
        "config": ctx.config.as_dict(),
        "dropped_units": {
            "geometry_only": list(ctx.dataset.dropped_geometry_ids),
            "attributes_only": list(ctx.dataset.dropped_table_ids),
            "missing_values": list(ctx.dropped_missing),
        },
        "weights": _section_weights(ctx),
    }
    if which in ("hotspot", "pipeline"):
        report["hotspot"] = _section_hotspot(ctx)
    if which == "pipeline":
        report["summary"] = [
            {
                "name": r.name,
                "mean": r.mean,
                "sd": r.sd,
                "n": r.n,
                "min": r.minimum,
                "max": r.maximum,
            }
            for r in ctx.summary_rows
        ]
    if which in ("regress", "cluster", "pipeline"):
        report["selection"] = _section_selection(ctx)
        report["ols"] = _section_ols(ctx)
        report["decision"] = {
            "alpha": ctx.config.alpha,
            "decision": ctx.decision,
            "warning": ctx.decision_warning,
            "skipped_reason": ctx.spatial_skip_reason,
        }
        report["spatial"] = _section_spatial(ctx)
        report["comparison"] = _section_comparison(ctx)
    if which in ("cluster", "pipeline"):
        report["groups"] = _section_groups(ctx)
    if which == "pipeline":
        report["spearman"] = _section_spearman(ctx)
    return report


# ---------------------------------------------------------------------------
# text rendering


def _render_report_text(report: dict) -> str:
    lines: list[str] = []
    tool = report["tool"]
    lines.append(f"{tool['name']} {tool['version']} report ({tool['command']})")
    lines.append("=" * len(lines[0]))
    lines.append("")
    lines.append("config")
    lines.append("------")
    for key in sorted(report["config"]):
        lines.append(f"  {key} = {report['config'][key]!r}")
    lines.append("")

    dropped = report["dropped_units"]
    lines.append("dropped units")
    lines.append("-------------")
    lines.append(f"  geometry only: {dropped['geometry_only'] or 'none'}")
    lines.append(f"  attributes only: {dropped['attributes_only'] or 'none'}")
    lines.append(f"  missing values: {dropped['missing_values'] or 'none'}")
    lines.append("")

    w = report["weights"]
    lines.append("weights")
    lines.append("-------")
    lines.append(
        f"  {w['contiguity']} contiguity over {w['n']} units, "
        f"{w['directed_links']} directed links, mode {w['mode']}"
    )
    lines.append(f"  islands: {w['islands'] or 'none'}")
    lines.append("")

    if "summary" in report:
        lines.append("summary")
        lines.append("-------")
        lines.append("  name mean sd n min max")
        for r in report["summary"]:
            lines.append(
                f"  {r['name']} {_fmt(r['mean'])} {_fmt(r['sd'])} {r['n']} "
                f"{_fmt(r['min'])} {_fmt(r['max'])}"
            )
        lines.append("")

    if "hotspot" in report:
        h = report["hotspot"]
        lines.append("hot and cold spots")
        lines.append("------------------")
        lines.append(f"  fdr alpha {_fmt(h['fdr_alpha'])}")
        counts = " ".join(f"{k}={v}" for k, v in h["counts"].items())
        lines.append(f"  counts: {counts}")
        lines.append(f"  z range: [{_fmt(h['min_z'])}, {_fmt(h['max_z'])}]")
        lines.append("")

    if "selection" in report:
        s = report["selection"]
        lines.append("model selection")
        lines.append("---------------")
        lines.append(f"  candidates: {', '.join(s['candidates'])}")
        if s["vif_removed"]:
            for r in s["vif_removed"]:
                lines.append(f"  removed by collinearity: {r['column']} (VIF={_fmt(r['vif'])})")
        else:
            lines.append("  removed by collinearity: none")
        for t in s["stepwise_trace"]:
            col = "" if t["column"] is None else f" {t['column']}"
            lines.append(f"  stepwise {t['action']}{col}: AIC {_fmt(t['aic'])}")
        lines.append(
            f"  removed by significance: {', '.join(s['significance_removed']) or 'none'}"
        )
        lines.append(f"  final columns: {', '.join(s['final_columns']) or 'none'}")
        lines.append("")

        o = report["ols"]
        lines.append("final least-squares fit")
        lines.append("-----------------------")
        lines.append("  name coefficient se t p")
        for c in o["coefficients"]:
            lines.append(
                f"  {c['name']} {_fmt(c['coefficient'])} {_fmt(c['se'])} "
                f"{_fmt(c.get('t'))} {_fmt(c['p'])}{c['stars']}"
            )
        lines.append(
            f"  n={o['n']} q={o['q']} r2={_fmt(o['r2'])} adj_r2={_fmt(o['adj_r2'])} "
            f"sigma2={_fmt(o['sigma2'])}"
        )
        lines.append(
            f"  log_likelihood={_fmt(o['log_likelihood'])} aic={_fmt(o['aic'])}"
        )
        d = o["diagnostics"]
        jb = d["jarque_bera"]
        lines.append(f"  jarque-bera: stat {_fmt(jb['stat'])}, p {_fmt(jb['p'])}")
        if d["koenker_bassett"] is None:
            lines.append(f"  koenker-bassett: skipped ({d['koenker_bassett_skipped']})")
        else:
            kb = d["koenker_bassett"]
            lines.append(f"  koenker-bassett: stat {_fmt(kb['stat'])}, p {_fmt(kb['p'])}")
        cn = d["condition_number"]
        cn_text = cn if isinstance(cn, str) else _fmt(cn)
        lines.append(f"  condition number: {cn_text}")
        if o["lm_tests"] is not None:
            lm = o["lm_tests"]
            lines.append("  spatial dependence tests (chi-squared, 1 df):")
            for key in ("lm_error", "lm_lag", "robust_lm_error", "robust_lm_lag"):
                lines.append(
                    f"    {key}: stat {_fmt(lm[key]['stat'])}, p {_fmt(lm[key]['p'])}"
                )
            if lm["degenerate"]:
                lines.append("    robust variants degenerate")
        lines.append("")

        dec = report["decision"]
        lines.append("decision")
        lines.append("--------")
        if dec["skipped_reason"]:
            lines.append(f"  skipped: {dec['skipped_reason']}")
        else:
            lines.append(f"  {dec['decision']} (alpha {_fmt(dec['alpha'])})")
            if dec["warning"]:
                lines.append(f"  warning: {dec['warning']}")
        lines.append("")

        if report["spatial"] is not None:
            sp_ = report["spatial"]
            title = "spatial error model" if sp_["kind"] == "error" else "spatial lag model"
            lines.append(title)
            lines.append("-" * len(title))
            lines.append("  name coefficient se p")
            for c in sp_["coefficients"]:
                lines.append(
                    f"  {c['name']} {_fmt(c['coefficient'])} {_fmt(c['se'])} "
                    f"{_fmt(c['p'])}{c['stars']}"
                )
            lines.append(
                f"  sigma2={_fmt(sp_['sigma2'])} log_likelihood={_fmt(sp_['log_likelihood'])} "
                f"aic={_fmt(sp_['aic'])} pseudo_r2={_fmt(sp_['pseudo_r2'])}"
            )
            if not sp_["se_available"]:
                lines.append("  standard errors unavailable (Hessian not negative definite)")
            lines.append("")

        if report["comparison"] is not None:
            cmp_ = report["comparison"]
            lines.append("model comparison")
            lines.append("----------------")
            lines.append("  model fit_statistic fit_value log_likelihood aic n_params")
            for r in cmp_["rows"]:
                lines.append(
                    f"  {r['model']} {r['fit_statistic']} {_fmt(r['fit_value'])} "
                    f"{_fmt(r['log_likelihood'])} {_fmt(r['aic'])} {r['n_params']}"
                )
            lines.append(f"  preferred: {cmp_['preferred']}")
            lines.append(f"  note: {cmp_['note']}")
            lines.append("")

    if "groups" in report:
        g = report["groups"]
        lines.append("groups")
        lines.append("------")
        lines.append(
            f"  k={g['k']} linkage={g['linkage']} features: {', '.join(g['features'])}"
        )
        for pr in g["profiles"]:
            lines.append(f"  group {pr['group']} (n={pr['count']}):")
            for name in pr["means"]:
                lines.append(
                    f"    {name}: mean {_fmt(pr['means'][name])} ({pr['labels'][name]})"
                )
        lines.append("")

    if "spearman" in report:
        s = report["spearman"]
        lines.append("rank correlations")
        lines.append("-----------------")
        if "skipped_reason" in s:
            lines.append(f"  skipped: {s['skipped_reason']}")
        else:
            lines.append(f"  comparison column: {s['column']}")
            for r in s["rows"]:
                lines.append(
                    f"  vs {r['versus']}: rho {_fmt(r['rho'])}, p {_fmt(r['p'])}{r['stars']}"
                )
        lines.append("")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# file outputs


def _write(path: str, data: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(data)


def _csv_bytes(header: list[str], rows: list[list[str]]) -> bytes:
    lines = [",".join(header)]
    lines += [",".join(r) for r in rows]
    return ("\n".join(lines) + "\n").encode("utf-8")


def _write_weights_files(ctx: _Context, outdir: str) -> None:
    _write(os.path.join(outdir, "weights.txt"), _weights.write_weights(ctx.w_rs).encode("utf-8"))
    island_text = "".join(f"{uid}\n" for uid in ctx.island_ids)
    _write(os.path.join(outdir, "islands.txt"), island_text.encode("utf-8"))


def _write_summary(ctx: _Context, outdir: str) -> None:
    rows = [
        [r.name, _fmt(r.mean), _fmt(r.sd), str(r.n), _fmt(r.minimum), _fmt(r.maximum)]
        for r in ctx.summary_rows
    ]
    _write(
        os.path.join(outdir, "summary.csv"),
        _csv_bytes(["name", "mean", "sd", "n", "min", "max"], rows),
    )


def _write_hotspot(ctx: _Context, outdir: str) -> None:
    x = ctx.dataset.table.column(ctx.config.outcome_column)
    rows = []
    for i, unit in enumerate(ctx.dataset.units):
        rows.append(
            [
                unit.id,
                _fmt(x[i]),
                _fmt(ctx.gi.z[i]),
                _fmt(ctx.gi.p[i]),
                _fmt(ctx.gi.adjusted_p[i]),
                ctx.gi.classes[i],
            ]
        )
    _write(
        os.path.join(outdir, "hotspot.csv"),
        _csv_bytes(["id", "x", "z", "p", "adjusted_p", "class"], rows),
    )


def _write_hotspot_maps(ctx: _Context, outdir: str) -> None:
    outcome = ctx.config.outcome_column
    x = ctx.dataset.table.column(outcome)
    svg = _render.render_choropleth(
        ctx.dataset.units, x, kind="quantile", title=outcome
    )
    _write(os.path.join(outdir, "map_outcome.svg"), svg.encode("utf-8"))
    svg = _render.render_choropleth(
        ctx.dataset.units,
        ctx.gi.classes,
        kind="hotspot",
        title=f"{outcome} hot and cold spots",
    )
    _write(os.path.join(outdir, "map_hotspot.svg"), svg.encode("utf-8"))


def _write_regress_files(ctx: _Context, outdir: str) -> None:
    fit = ctx.fit_final
    rows = [
        [
            name,
            _fmt(fit.beta[i]),
            _fmt(fit.se[i]),
            _fmt(fit.t[i]),
            _fmt(fit.p[i]),
            _stars(float(fit.p[i])),
        ]
        for i, name in enumerate(fit.names)
    ]
    _write(
        os.path.join(outdir, "ols_coefficients.csv"),
        _csv_bytes(["name", "coefficient", "se", "t", "p", "stars"], rows),
    )
    if ctx.spatial_fit is not None:
        srows = [
            [
                c["name"],
                _fmt(c["coefficient"]),
                _fmt(c["se"]) if c["se"] is not None else "",
                _fmt(c["p"]) if c["p"] is not None else "",
                c["stars"],
            ]
            for c in _spatial_coef_rows(ctx)
        ]
        _write(
            os.path.join(outdir, "spatial_coefficients.csv"),
            _csv_bytes(["name", "coefficient", "se", "p", "stars"], srows),
        )
    if ctx.comparison is not None:
        crows = [
            [
                r["model"],
                r["fit_statistic"],
                _fmt(r["fit_value"]),
                _fmt(r["log_likelihood"]),
                _fmt(r["aic"]),
                str(r["n_params"]),
                "yes" if r["model"] == ctx.comparison.preferred else "no",
            ]
            for r in ctx.comparison.rows
        ]
        _write(
            os.path.join(outdir, "comparison.csv"),
            _csv_bytes(
                [
                    "model",
                    "fit_statistic",
                    "fit_value",
                    "log_likelihood",
                    "aic",
                    "n_params",
                    "preferred",
                ],
                crows,
            ),
        )


def _write_cluster_files(ctx: _Context, outdir: str) -> None:
    names = [ctx.config.outcome_column] + ctx.cluster_features
    header = ["group", "count"]
    for n in names:
        header += [f"mean_{n}", f"label_{n}"]
    rows = []
    for pr in ctx.profiles:
        row = [str(pr.group), str(pr.count)]
        for n, m, lab in zip(pr.feature_names, pr.means, pr.labels):
            row += [_fmt(m), lab]
        rows.append(row)
    _write(os.path.join(outdir, "groups.csv"), _csv_bytes(header, rows))
    svg = _render.render_choropleth(
        ctx.dataset.units,
        ctx.assignments,
        kind="group",
        title=f"{ctx.config.group_k} groups",
    )
    _write(os.path.join(outdir, "map_groups.svg"), svg.encode("utf-8"))


def _write_spearman(ctx: _Context, outdir: str) -> None:
    if ctx.spearman_skip_reason:
        return
    rows = [
        [ctx.spearman_column, r["versus"], _fmt(r["rho"]), _fmt(r["p"]), r["stars"]]
        for r in ctx.spearman_rows
    ]
    _write(
        os.path.join(outdir, "spearman.csv"),
        _csv_bytes(["column", "versus", "rho", "p", "stars"], rows),
    )
    svg = _render.render_choropleth(
        ctx.dataset.units,
        ctx.dataset.table.column(ctx.spearman_column),
        kind="quantile",
        title=ctx.spearman_column,
    )
    _write(os.path.join(outdir, "map_comparison.svg"), svg.encode("utf-8"))


def _write_augmented(ctx: _Context, outdir: str) -> None:
    extra = {
        "gi_z": [float(v) for v in ctx.gi.z],
        "gi_p": [float(v) for v in ctx.gi.p],
        "gi_p_adj": [float(v) for v in ctx.gi.adjusted_p],
        "gi_class": list(ctx.gi.classes),
        "group": [int(g) for g in ctx.assignments],
    }
    doc = to_feature_collection(ctx.dataset.units, extra)
    _write(
        os.path.join(outdir, "augmented.geojson"),
        (json.dumps(doc, sort_keys=True) + "\n").encode("utf-8"),
    )


def _write_report(ctx: _Context, report: dict, outdir: str) -> None:
    payload = json.dumps(_sanitize(report), indent=2, sort_keys=True) + "\n"
    _write(os.path.join(outdir, "report.json"), payload.encode("utf-8"))
    _write(
        os.path.join(outdir, "report.txt"),
        _render_report_text(_sanitize(report)).encode("utf-8"),
    )


# ---------------------------------------------------------------------------
# drivers


def _run(config: PipelineConfig, which: str) -> dict:
    if which not in SUBCOMMANDS:
        raise PipelineError("config", f"unknown subcommand {which!r}")
    with _stage("config"):
        config.validate()
        os.makedirs(config.output_dir, exist_ok=True)
    ctx = _Context(config=config)

    with _stage("ingest"):
        _stage_ingest(ctx)
    with _stage("weights"):
        _stage_weights(ctx)

    if which == "pipeline":
        with _stage("summarize"):
            _stage_summarize(ctx)
        with _stage("zscore"):
            _stage_zscore(ctx)
    if which in ("hotspot", "pipeline"):
        with _stage("gi_star"):
            _stage_gi_star(ctx)

    if which in ("regress", "cluster", "pipeline"):
        if which != "pipeline":
            with _stage("zscore"):
                _stage_zscore(ctx)
        with _stage("vif_prune"):
            _stage_vif_prune(ctx)
        with _stage("stepwise_aic"):
            _stage_stepwise(ctx)
        with _stage("significance_prune"):
            _stage_significance(ctx)
        with _stage("diagnostics"):
            _stage_diagnostics(ctx)
        with _stage("lm_tests"):
            _stage_lm(ctx)
        with _stage("model_decision"):
            _stage_decision(ctx)
        with _stage("spatial_fit"):
            _stage_spatial(ctx)
        with _stage("compare"):
            _stage_compare(ctx)

    if which in ("cluster", "pipeline"):
        with _stage("ward_cluster"):
            _stage_cluster(ctx)
        with _stage("profile"):
            _stage_profile(ctx)

    if which == "pipeline":
        with _stage("spearman"):
            _stage_spearman(ctx)

    report = _build_report(ctx, which)
    with _stage("outputs"):
        outdir = config.output_dir
        if which in ("weights", "pipeline"):
            _write_weights_files(ctx, outdir)
        if which in ("hotspot", "pipeline"):
            _write_hotspot(ctx, outdir)
            _write_hotspot_maps(ctx, outdir)
        if which in ("regress", "pipeline"):
            _write_regress_files(ctx, outdir)
        if which in ("cluster", "pipeline"):
            _write_cluster_files(ctx, outdir)
        if which == "pipeline":
            _write_summary(ctx, outdir)
            _write_spearman(ctx, outdir)
            _write_augmented(ctx, outdir)
        _write_report(ctx, report, outdir)
    return report


def run_pipeline(config: PipelineConfig) -> dict:
    """Execute every stage and write all outputs; returns the report."""
    return _run(config, "pipeline")


def run_subcommand(config: PipelineConfig, which: str) -> dict:
    """Execute the stages one subcommand needs and write only its outputs."""
    return _run(config, which)
