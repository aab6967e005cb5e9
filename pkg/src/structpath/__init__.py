"""structpath: deterministic scenario simulation with structural path regression.

Declare a causal scenario (variables, weighted paths, interactions, noise),
generate a synthetic firm-response dataset from it, and run the full
analysis pipeline: quality gate, EDA, VIF pruning, OLS/stepwise and logit
models, mediation with bootstrap intervals, moderation with simple slopes,
and a standardized-coefficient heatmap.
"""

__version__ = "0.1.0"

from .scenario import (
    InteractionSpec,
    NoiseSpec,
    NormalDist,
    PathSpec,
    ScenarioError,
    ScenarioSpec,
    VariableSpec,
    default_scenario,
    load_scenario,
    loads_scenario,
    serialize_scenario,
    topological_order,
    validate_scenario,
)
from .rng import RngStream
from .stats import SummaryStats, pearson_corr, quantile, sample_sd, standardize, summarize
from .table import DataTable
from .synthgen import (
    ColumnMismatchError,
    InvalidScenarioError,
    QualityCheck,
    QualityReport,
    generate,
    one_hot,
    quality_gate,
)
from .linmodel import (
    FitError,
    LogitFit,
    MissingColumnError,
    OlsFit,
    RankDeficiencyError,
    RocCurve,
    SeparationError,
    SingleClassError,
    StepwiseTrace,
    VifTable,
    logit_fit,
    ols_fit,
    roc_auc,
    stepwise,
    vif,
    vif_prune,
)
from .patheffects import (
    BootstrapError,
    BootstrapResult,
    MediationReport,
    ModerationReport,
    baron_kenny,
    bootstrap_indirect,
    mediate,
    moderation,
)
from .pipeline import (
    ModelConfig,
    PipelineError,
    PipelineReport,
    default_model_config,
    emit_outputs,
    run_pipeline,
)

__all__ = [
    "__version__",
    # scenario
    "ScenarioSpec", "VariableSpec", "PathSpec", "InteractionSpec", "NoiseSpec",
    "NormalDist", "ScenarioError", "default_scenario", "load_scenario",
    "loads_scenario", "serialize_scenario", "validate_scenario", "topological_order",
    # rng / stats
    "RngStream", "SummaryStats", "pearson_corr", "standardize", "quantile",
    "sample_sd", "summarize",
    # data
    "DataTable", "generate", "one_hot", "quality_gate", "QualityReport",
    "QualityCheck", "InvalidScenarioError", "ColumnMismatchError",
    # models
    "OlsFit", "LogitFit", "VifTable", "RocCurve", "StepwiseTrace",
    "ols_fit", "vif", "vif_prune", "stepwise", "logit_fit", "roc_auc",
    "FitError", "MissingColumnError", "RankDeficiencyError", "SeparationError",
    "SingleClassError",
    # path effects
    "MediationReport", "ModerationReport", "BootstrapResult", "BootstrapError",
    "baron_kenny", "bootstrap_indirect", "mediate", "moderation",
    # pipeline
    "ModelConfig", "PipelineReport", "PipelineError", "default_model_config",
    "run_pipeline", "emit_outputs",
]
