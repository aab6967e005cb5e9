"""Synthetic dataset generation from a scenario, plus the structural quality gate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linmodel
from .rng import RngStream
from .scenario import ScenarioSpec, topological_order, validate_scenario
from .stats import pearson_corr
from .table import BINARY, CATEGORICAL, CONTINUOUS, DataTable


class InvalidScenarioError(Exception):
    """Raised when a scenario fails validation before generation."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("invalid scenario:\n  " + "\n  ".join(self.violations))


class ColumnMismatchError(Exception):
    """Table columns do not match the scenario they are checked against."""


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def generate(spec: ScenarioSpec) -> DataTable:
    """Simulate one dataset from the scenario's structural equations.

    Sampled variables draw from their declared distributions; each mediator
    and outcome is built in dependency order as intercept + weighted parents
    + weighted interaction products + Gaussian noise. Binary outcomes push
    that linear predictor through the logistic function and take a Bernoulli
    draw. Every variable owns the sub-stream numbered by its declaration
    index, so editing one variable never reshuffles the draws of the rest.
    """
    violations = validate_scenario(spec)
    if violations:
        raise InvalidScenarioError(violations)

    n = spec.n
    streams = {v.name: RngStream(spec.seed, i) for i, v in enumerate(spec.variables)}
    byname = {v.name: v for v in spec.variables}
    values: dict[str, np.ndarray] = {}

    for name in topological_order(spec):
        var = byname[name]
        rng = streams[name]
        if var.is_sampled:
            if var.kind == "categorical":
                idx = rng.categorical(var.probs, size=n)
                lv = np.array(var.levels, dtype=object)
                values[name] = lv[idx]
            else:
                values[name] = rng.normal_sample(var.dist.mean, var.dist.sd, size=n)
            continue
        lp = np.full(n, var.intercept, dtype=float)
        for path in spec.paths_into(name):
            lp += path.weight * values[path.source]
        for inter in spec.interactions_into(name):
            lp += inter.weight * (values[inter.factor_a] * values[inter.factor_b])
        sd = spec.noise_sd(name)
        if sd > 0:
            lp = lp + rng.normal_sample(0.0, sd, size=n)
        if var.kind == "binary":
            values[name] = rng.bernoulli(_sigmoid(lp))
        else:
            values[name] = lp

    columns = {v.name: values[v.name] for v in spec.variables}
    kinds = {v.name: v.kind for v in spec.variables}
    levels = {v.name: v.levels for v in spec.variables if v.kind == "categorical"}
    return DataTable(columns=columns, kinds=kinds, levels=levels)


def one_hot(table: DataTable, column: str, levels=None) -> DataTable:
    """Replace a categorical column with k-1 reference-coded indicators.

    The first declared level is the reference and gets no column; indicator
    columns are named ``column=level``. Passing ``levels`` overrides the
    level order recorded on the table.
    """
    if column not in table.columns:
        raise KeyError(f"no column named '{column}'")
    if table.kinds.get(column) != CATEGORICAL:
        raise ValueError(f"column '{column}' is not categorical")
    if levels is None:
        levels = table.levels.get(column)
    if levels is None:
        levels = tuple(sorted(set(table.col(column).tolist())))
    levels = tuple(levels)
    if len(levels) < 2:
        raise ValueError(f"column '{column}' needs at least 2 levels, got {levels}")

    raw = table.col(column)
    unseen = sorted(set(raw.tolist()) - set(levels))
    if unseen:
        raise ValueError(f"column '{column}' contains unseen level(s): {', '.join(map(str, unseen))}")

    columns: dict[str, np.ndarray] = {}
    kinds: dict[str, str] = {}
    group: list[str] = []
    for name in table.names:
        if name != column:
            columns[name] = table.columns[name]
            kinds[name] = table.kinds[name]
            continue
        for level in levels[1:]:
            ind_name = f"{column}={level}"
            columns[ind_name] = (raw == level).astype(float)
            kinds[ind_name] = BINARY
            group.append(ind_name)
    new_levels = {k: v for k, v in table.levels.items() if k != column}
    groups = dict(table.onehot_groups)
    groups[column] = group
    return DataTable(columns=columns, kinds=kinds, levels=new_levels, onehot_groups=groups)


# ---------------------------------------------------------------------------
# Quality gate
# ---------------------------------------------------------------------------

@dataclass
class QualityCheck:
    name: str
    target: str
    observed: str
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "target": self.target,
                "observed": self.observed, "passed": self.passed}


@dataclass
class QualityReport:
    checks: list[QualityCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[QualityCheck]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


MIN_SIGN_WEIGHT = 0.1
MIN_PARENT_R2 = 0.2
SD_RELATIVE_TOL = 0.2


def quality_gate(table: DataTable, spec: ScenarioSpec) -> QualityReport:
    """Run the five structural quality checks of a generated dataset.

    (a) structure: every declared variable is present with its declared kind;
    (b) distribution: sampled continuous columns match their target mean
        (within 3*sd/sqrt(n)) and sd (within 20%);
    (c) sign consistency: every path with |weight| >= 0.1 shows a sample
        correlation of the same sign;
    (d) regressibility: each continuous derived variable regressed on its
        parents reaches R^2 >= 0.2;
    (e) completeness: no missing or non-finite values anywhere.

    Check results are data; only a table/scenario column mismatch raises.
    """
    missing = [v.name for v in spec.variables if v.name not in table.columns]
    if missing:
        raise ColumnMismatchError(
            "table lacks scenario column(s): " + ", ".join(missing)
        )

    report = QualityReport()
    n = table.n_rows

    # (a) structure
    for v in spec.variables:
        kind = table.kinds.get(v.name)
        ok = kind == v.kind
        observed = kind or "absent"
        if ok and v.kind == "categorical":
            seen = set(table.col(v.name).tolist())
            extra = seen - set(v.levels or ())
            if extra:
                ok = False
                observed = f"unexpected level(s) {sorted(extra)}"
        report.checks.append(QualityCheck(
            name=f"structure:{v.name}", target=v.kind, observed=observed, passed=ok,
        ))

    # (e) completeness, checked early so later numeric checks can assume finite data
    complete = True
    detail = "all values finite"
    for name in table.names:
        col = table.columns[name]
        if table.kinds[name] == CATEGORICAL:
            if any(x is None or str(x) == "" for x in col.tolist()):
                complete = False
                detail = f"missing label in '{name}'"
                break
        elif not np.isfinite(col).all():
            complete = False
            detail = f"non-finite value in '{name}'"
            break
    report.checks.append(QualityCheck(
        name="completeness", target="no missing or non-finite values",
        observed=detail, passed=complete,
    ))

    # (b) distribution of sampled continuous columns
    for v in spec.variables:
        if not (v.is_sampled and v.kind == "continuous" and v.dist is not None):
            continue
        col = np.asarray(table.col(v.name), dtype=float)
        if not np.isfinite(col).all():
            report.checks.append(QualityCheck(
                name=f"distribution:{v.name}", target="finite sample",
                observed="non-finite values", passed=False,
            ))
            continue
        mean_tol = 3.0 * v.dist.sd / math.sqrt(n)
        mean_obs = float(col.mean())
        sd_obs = float(np.std(col, ddof=1)) if n > 1 else 0.0
        mean_ok = abs(mean_obs - v.dist.mean) <= mean_tol
        sd_ok = abs(sd_obs - v.dist.sd) <= SD_RELATIVE_TOL * v.dist.sd
        report.checks.append(QualityCheck(
            name=f"distribution:{v.name}",
            target=f"mean {v.dist.mean}+-{mean_tol:.4g}, sd {v.dist.sd}+-20%",
            observed=f"mean {mean_obs:.4g}, sd {sd_obs:.4g}",
            passed=bool(mean_ok and sd_ok),
        ))

    # (c) sign consistency of material paths
    kinds = table.kinds
    for path in spec.paths:
        if abs(path.weight) < MIN_SIGN_WEIGHT:
            continue
        if kinds.get(path.source) == CATEGORICAL or kinds.get(path.target) == CATEGORICAL:
            continue
        try:
            r = pearson_corr(table.col(path.source), table.col(path.target))
            ok = (r > 0) == (path.weight > 0) and r != 0
            observed = f"corr {r:+.4f}"
        except ValueError as exc:
            ok = False
            observed = str(exc)
        report.checks.append(QualityCheck(
            name=f"sign:{path.source}->{path.target}",
            target=f"corr sign {'+' if path.weight > 0 else '-'} (weight {path.weight:+g})",
            observed=observed, passed=ok,
        ))

    # (d) regressibility of continuous derived variables
    for v in spec.variables:
        if v.is_sampled or v.kind != "continuous":
            continue
        parents = [p.source for p in spec.paths_into(v.name)]
        inters = spec.interactions_into(v.name)
        if not parents and not inters:
            continue
        work = table
        regressors = list(parents)
        for i, inter in enumerate(inters):
            pname = f"_ix{i}"
            work = work.with_column(
                pname,
                np.asarray(work.col(inter.factor_a), dtype=float)
                * np.asarray(work.col(inter.factor_b), dtype=float),
            )
            regressors.append(pname)
        try:
            fit = linmodel.ols_fit(work, v.name, regressors)
            ok = fit.r2 >= MIN_PARENT_R2
            observed = f"R2 {fit.r2:.4f}"
        except linmodel.FitError as exc:
            ok = False
            observed = f"fit failed: {exc}"
        report.checks.append(QualityCheck(
            name=f"regressibility:{v.name}", target=f"R2 >= {MIN_PARENT_R2}",
            observed=observed, passed=ok,
        ))

    return report
