"""End-to-end orchestration: generate, screen, model, test paths, report.

The stage order is fixed: scenario -> generate -> quality gate -> feature
prep (one-hot) -> EDA -> VIF pruning -> outcome models (fixed formulas plus
stepwise cross-checks) -> mediation/moderation -> standardized-coefficient
heatmap -> report assembly. A stage failure aborts the run but the report
assembled so far travels with the raised PipelineError.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__ as _pkg_version
from . import linmodel, patheffects, synthgen
from .scenario import ScenarioSpec, serialize_scenario, validate_scenario
from .stats import pearson_corr, standardize, summarize
from .table import BINARY, CATEGORICAL, CONTINUOUS, DataTable

SCHEMA_VERSION = 1

VIF_THRESHOLD = 5.0
DEFAULT_BOOTSTRAP_B = 5000


class PipelineError(Exception):
    """A pipeline stage failed; carries the stage name and partial report."""

    def __init__(self, stage: str, cause: Exception, partial: "PipelineReport"):
        self.stage = stage
        self.cause = cause
        self.partial = partial
        super().__init__(f"pipeline stage '{stage}' failed: {cause}")


# ---------------------------------------------------------------------------
# Model configuration
# ---------------------------------------------------------------------------

@dataclass
class OutcomeModelSpec:
    response: str
    predictors: list[str]
    kind: str  # "continuous" (OLS) or "binary" (logit)


@dataclass
class MediationPlan:
    x: str
    m: str
    y: str
    controls: list[str]
    outcome_kind: str


@dataclass
class ModerationPlan:
    label: str
    x: str
    moderator: str
    y: str
    controls: list[str]
    outcome_kind: str


@dataclass
class ModelConfig:
    """Which models the analysis stages fit.

    ``outcome_models`` are fixed formulas fit as declared; stepwise runs as
    a cross-check for the continuous ones. ``heatmap_models`` define the
    standardized-coefficient matrix columns; ``headline_moderation`` names
    the moderation plan whose interaction test the summary quotes.
    """

    outcome_models: dict[str, OutcomeModelSpec]
    mediation: MediationPlan
    moderations: list[ModerationPlan]
    headline_moderation: str
    heatmap_models: dict[str, list[str]]


def default_model_config() -> ModelConfig:
    """The shipped analysis layout for the default firm-response scenario."""
    return ModelConfig(
        outcome_models={
            "Y2": OutcomeModelSpec("Y2", ["X2", "M2", "X6"], CONTINUOUS),
            "Y3": OutcomeModelSpec("Y3", ["M2", "X5"], CONTINUOUS),
            "Y1": OutcomeModelSpec("Y1", ["X3", "M1", "X6"], BINARY),
        },
        mediation=MediationPlan(x="X3", m="M1", y="Y1", controls=["X6"],
                                outcome_kind=BINARY),
        moderations=[
            ModerationPlan(label="survival_interaction", x="X3", moderator="MOD1",
                           y="Y1", controls=["M1", "X6"], outcome_kind=BINARY),
            ModerationPlan(label="mediator_path_interaction", x="X3", moderator="MOD1",
                           y="M1", controls=[], outcome_kind=CONTINUOUS),
        ],
        headline_moderation="survival_interaction",
        heatmap_models={
            "Y1": ["X3", "M1", "MOD1", "X6"],
            "Y2": ["X2", "M2", "X6"],
            "Y3": ["M2", "X5", "X6"],
        },
    )


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------

@dataclass
class PipelineReport:
    """Structured result of one pipeline run; ``to_dict`` is the JSON shape."""

    schema_version: int = SCHEMA_VERSION
    run: dict = field(default_factory=dict)
    scenario: dict | None = None
    quality: dict | None = None
    eda: dict | None = None
    vif: dict | None = None
    models: dict = field(default_factory=dict)
    mediation: dict | None = None
    moderation: dict = field(default_factory=dict)
    heatmap: dict | None = None
    strategy_evaluation: dict | None = None
    failed_stage: str | None = None
    error: str | None = None
    table: DataTable | None = field(default=None, repr=False)
    analysis_table: DataTable | None = field(default=None, repr=False)
    traces: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "run": self.run,
            "scenario": self.scenario,
            "quality": self.quality,
            "eda": self.eda,
            "vif": self.vif,
            "models": self.models,
            "mediation": self.mediation,
            "moderation": self.moderation,
            "heatmap": self.heatmap,
            "strategy_evaluation": self.strategy_evaluation,
            "failed_stage": self.failed_stage,
            "error": self.error,
        }


def _utc_now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def run_pipeline(spec: ScenarioSpec | None = None, table: DataTable | None = None,
                 config: ModelConfig | None = None, boot_b: int = DEFAULT_BOOTSTRAP_B,
                 boot_seed: int | None = None) -> PipelineReport:
    """Execute the full analysis pipeline.

    Either ``spec`` (simulate, then analyze) or ``table`` (analyze ingested
    data) must be given; with both, the table is checked against the
    scenario's quality gate instead of being regenerated.
    """
    if spec is None and table is None:
        raise ValueError("run_pipeline needs a scenario, a table, or both")
    config = config or default_model_config()
    report = PipelineReport()
    report.run = {
        "timestamp": _utc_now(),
        "package_version": _pkg_version,
        "seed": spec.seed if spec is not None else None,
        "n": spec.n if spec is not None else (table.n_rows if table is not None else None),
        "bootstrap_resamples": boot_b,
    }

    def stage(name):
        def wrap(fn, *args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except Exception as exc:
                report.failed_stage = name
                report.error = str(exc)
                raise PipelineError(name, exc, report) from exc
        return wrap

    # -- scenario ----------------------------------------------------------
    if spec is not None:
        def check_spec():
            violations = validate_scenario(spec)
            if violations:
                raise synthgen.InvalidScenarioError(violations)
            return json.loads(serialize_scenario(spec))
        report.scenario = stage("scenario")(check_spec)

    # -- generate ------------------------------------------------------------
    if table is None:
        table = stage("generate")(synthgen.generate, spec)
    report.table = table

    # -- quality gate --------------------------------------------------------
    if spec is not None:
        gate = stage("quality_gate")(synthgen.quality_gate, table, spec)
        report.quality = gate.to_dict()

    # -- feature prep ----------------------------------------------------------
    def prep() -> DataTable:
        declared = {}
        if spec is not None:
            declared = {v.name: v.levels for v in spec.variables if v.levels}
        work = table
        for name in list(work.names):
            if work.kinds.get(name) == CATEGORICAL:
                work = synthgen.one_hot(work, name, levels=declared.get(name))
        return work
    analysis = stage("features")(prep)
    report.analysis_table = analysis

    # -- EDA -------------------------------------------------------------------
    def eda() -> dict:
        numeric = analysis.numeric_names()
        summaries = {name: vars(summarize(analysis.col(name))) for name in numeric}
        corr = []
        for a in numeric:
            row = []
            for b in numeric:
                if a == b:
                    row.append(1.0)
                else:
                    try:
                        row.append(pearson_corr(analysis.col(a), analysis.col(b)))
                    except ValueError:
                        row.append(None)
            corr.append(row)
        return {"summaries": summaries, "correlation": {"columns": numeric, "matrix": corr}}
    report.eda = stage("eda")(eda)

    # -- VIF pruning -------------------------------------------------------------
    responses = set(config.outcome_models)

    def vif_stage():
        candidates = [n for n in analysis.numeric_names() if n not in responses]
        retained, viftab = linmodel.vif_prune(analysis, candidates, VIF_THRESHOLD)
        return retained, viftab
    retained, viftab = stage("vif")(vif_stage)
    report.vif = {"threshold": VIF_THRESHOLD, "retained": retained, **viftab.to_dict()}

    # -- outcome models ------------------------------------------------------------
    def fit_models() -> dict:
        out: dict = {}
        for name, ms in config.outcome_models.items():
            formula = f"{ms.response} ~ {' + '.join(ms.predictors)}"
            try:
                if ms.kind == BINARY:
                    fit = linmodel.logit_fit(analysis, ms.response, ms.predictors)
                    X, _ = linmodel.design_matrix(analysis, ms.predictors, intercept=True)
                    scores = X @ fit.coef
                    roc = linmodel.roc_auc(scores, analysis.col(ms.response))
                    out[name] = {"kind": ms.kind, "fit": fit.to_dict(), "auc": roc.auc,
                                 "roc": roc.to_dict()}
                else:
                    fit = linmodel.ols_fit(analysis, ms.response, ms.predictors)
                    entry = {"kind": ms.kind, "fit": fit.to_dict()}
                    stepfit, trace = linmodel.stepwise(
                        analysis, ms.response, list(retained), direction="both",
                        criterion="aic",
                    )
                    entry["stepwise"] = {"fit": stepfit.to_dict(), "trace": trace.to_dict()}
                    report.traces[f"stepwise:{name}"] = trace
                    out[name] = entry
            except linmodel.MissingColumnError as exc:
                raise linmodel.FitError(f"model {name} ({formula}): {exc}") from exc
        return out
    report.models = stage("models")(fit_models)

    # -- path effects -----------------------------------------------------------------
    def path_effects():
        plan = config.mediation
        seed = boot_seed if boot_seed is not None else (spec.seed if spec is not None else 0)
        med = patheffects.mediate(
            analysis, plan.x, plan.m, plan.y, plan.controls, plan.outcome_kind,
            B=boot_b, seed=seed,
        )
        mods = {}
        for mplan in config.moderations:
            rep = patheffects.moderation(
                analysis, mplan.x, mplan.moderator, mplan.y, mplan.controls,
                mplan.outcome_kind,
            )
            mods[mplan.label] = rep.to_dict()
        return med, mods
    med, mods = stage("path_effects")(path_effects)
    report.mediation = med.to_dict()
    if med.outcome_kind == BINARY:
        report.mediation["note"] = (
            "indirect effect multiplies a linear-scale a path by a log-odds "
            "b path; interpret its magnitude with care"
        )
    report.moderation = {"headline": config.headline_moderation, **mods}

    # -- heatmap --------------------------------------------------------------------------
    report.heatmap = stage("heatmap")(
        standardized_heatmap, analysis, config,
    )

    # -- strategy evaluation ----------------------------------------------------------------
    def headline() -> dict:
        out: dict = {}
        for name, entry in report.models.items():
            if entry["kind"] == BINARY:
                out[f"{name}_auc"] = entry["auc"]
            else:
                out[f"{name}_r2"] = entry["fit"]["r2"]
        out["indirect_effect"] = report.mediation["indirect"]
        out["indirect_ci"] = report.mediation["bootstrap"]["ci"]
        out["mediation_classification"] = report.mediation["classification"]
        hm = report.moderation[config.headline_moderation]
        out["moderation_interaction_p"] = hm["interaction"]["p"]
        return {"headline": out}
    report.strategy_evaluation = stage("strategy_evaluation")(headline)
    return report


def standardized_heatmap(analysis: DataTable, config: ModelConfig) -> dict:
    """Standardized-coefficient matrix (predictors x outcomes) from refits.

    Continuous outcomes: OLS on z-scored response and predictors. Binary
    outcomes: logit on z-scored predictors with the raw 0/1 response
    (flagged, since those cells stay on the log-odds scale).
    """
    rows: list[str] = []
    order = {name: i for i, name in enumerate(analysis.names)}
    for preds in config.heatmap_models.values():
        for p in preds:
            if p not in rows:
                rows.append(p)
    rows.sort(key=order.__getitem__)
    cols = list(config.heatmap_models)

    cells: dict[str, dict[str, float | None]] = {r: {c: None for c in cols} for r in rows}
    notes = {}
    for resp, preds in config.heatmap_models.items():
        kind = config.outcome_models[resp].kind if resp in config.outcome_models else CONTINUOUS
        zcols = {p: standardize(analysis.col(p)) for p in preds}
        if kind == BINARY:
            zcols[resp] = np.asarray(analysis.col(resp), dtype=float)
            ztab = DataTable(zcols, kinds={**{p: CONTINUOUS for p in preds}, resp: BINARY})
            fit = linmodel.logit_fit(ztab, resp, preds)
            notes[resp] = "log-odds per 1 sd of predictor (binary outcome)"
        else:
            zcols[resp] = standardize(analysis.col(resp))
            ztab = DataTable(zcols, kinds={c: CONTINUOUS for c in zcols})
            fit = linmodel.ols_fit(ztab, resp, preds)
            notes[resp] = "sd of outcome per 1 sd of predictor"
        for p in preds:
            cells[p][resp] = fit.coef_for(p)
    return {"rows": rows, "columns": cols, "cells": cells, "scale_notes": notes}


# ---------------------------------------------------------------------------
# Output emission
# ---------------------------------------------------------------------------

def _sanitize(obj):
    """Make a report dict strictly JSON-serializable (finite floats only)."""
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)  # 'inf', '-inf', 'nan'
    if isinstance(obj, (np.floating, np.integer)):
        return _sanitize(obj.item())
    return obj


def report_json(report: PipelineReport) -> str:
    return json.dumps(_sanitize(report.to_dict()), indent=2) + "\n"


def heatmap_csv(report: PipelineReport) -> str:
    hm = report.heatmap or {"rows": [], "columns": [], "cells": {}}
    lines = ["predictor," + ",".join(hm["columns"])]
    for r in hm["rows"]:
        vals = []
        for c in hm["columns"]:
            v = hm["cells"][r][c]
            vals.append("" if v is None else repr(float(v)))
        lines.append(r + "," + ",".join(vals))
    return "\n".join(lines) + "\n"


def trace_text(report: PipelineReport) -> str:
    lines = ["== collinearity screening =="]
    if report.vif:
        for name, v in report.vif["values"].items():
            lines.append(f"  VIF {name}: {v:.4f}")
        if report.vif["removed"]:
            for name, v in report.vif["removed"]:
                lines.append(f"  removed {name} (VIF {v:.4f} at removal)")
        else:
            lines.append("  nothing removed")
        lines.append(f"  retained: {', '.join(report.vif['retained'])}")
    for key, trace in sorted(report.traces.items()):
        lines.append(f"== {key} ==")
        if not trace.steps:
            lines.append("  no moves accepted")
        for s in trace.steps:
            lines.append(f"  {s.action} {s.term} (criterion {s.criterion:.4f}) "
                         f"-> {', '.join(s.terms_after) or '(intercept only)'}")
    return "\n".join(lines) + "\n"


def emit_outputs(report: PipelineReport, out_dir) -> list[dict]:
    """Write report.json, data.csv, heatmap.csv and trace.txt into out_dir.

    Returns the manifest: one entry per file with its size and sha256
    digest. The manifest itself is also written as manifest.json.
    """
    os.makedirs(out_dir, exist_ok=True)
    artifacts = {
        "report.json": report_json(report),
        "data.csv": report.table.to_csv() if report.table is not None else "",
        "heatmap.csv": heatmap_csv(report),
        "trace.txt": trace_text(report),
    }
    manifest = []
    for name, text in artifacts.items():
        path = os.path.join(out_dir, name)
        data = text.encode("utf-8")
        try:
            with open(path, "wb") as fh:
                fh.write(data)
        except OSError as exc:
            raise OSError(f"failed writing '{path}': {exc}") from exc
        manifest.append({
            "file": name,
            "bytes": len(data),
            "sha256": hashlib.sha256(data).hexdigest(),
        })
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return manifest
