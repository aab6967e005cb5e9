"""Mediation and moderation analysis on fitted structural paths."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sstats

from . import linmodel
from .linmodel import FitError, design_matrix, irls, ols_coefs
from .rng import RngStream
from .stats import quantile, sample_sd
from .table import DataTable

ALPHA = 0.05

CONTINUOUS = "continuous"
BINARY = "binary"


class BootstrapError(Exception):
    """Raised when too many bootstrap resamples fail to refit."""


def _fit_outcome(table: DataTable, response: str, predictors, outcome_kind: str):
    if outcome_kind == BINARY:
        return linmodel.logit_fit(table, response, predictors)
    if outcome_kind == CONTINUOUS:
        return linmodel.ols_fit(table, response, predictors)
    raise ValueError(f"unknown outcome_kind '{outcome_kind}'")


# ---------------------------------------------------------------------------
# Mediation
# ---------------------------------------------------------------------------

@dataclass
class MediationReport:
    x: str
    m: str
    y: str
    controls: list[str]
    outcome_kind: str
    a: float
    b: float
    c: float
    c_prime: float
    p_a: float
    p_b: float
    p_c: float
    p_c_prime: float
    indirect: float
    classification: str
    boot_ci: tuple[float, float] | None = None
    boot_level: float | None = None
    boot_b: int | None = None
    boot_failed: int | None = None
    boot_mean: float | None = None
    boot_sd: float | None = None

    def to_dict(self) -> dict:
        return {
            "x": self.x, "m": self.m, "y": self.y,
            "controls": list(self.controls),
            "outcome_kind": self.outcome_kind,
            "paths": {
                "a": self.a, "b": self.b, "c": self.c, "c_prime": self.c_prime,
                "p_a": self.p_a, "p_b": self.p_b, "p_c": self.p_c,
                "p_c_prime": self.p_c_prime,
            },
            "indirect": self.indirect,
            "classification": self.classification,
            "bootstrap": None if self.boot_ci is None else {
                "ci": [self.boot_ci[0], self.boot_ci[1]],
                "level": self.boot_level,
                "resamples": self.boot_b,
                "failed": self.boot_failed,
                "mean": self.boot_mean,
                "sd": self.boot_sd,
            },
        }


def classify_mediation(p_a: float, p_b: float, p_c: float, p_c_prime: float,
                       alpha: float = ALPHA) -> str:
    """Classical decomposition verdict from the four path p values.

    full: a, b and the total effect are significant while the direct effect
    is not; partial: all four significant; none: the indirect chain or the
    total effect is broken.
    """
    chain = p_a < alpha and p_b < alpha and p_c < alpha
    if not chain:
        return "none"
    return "full" if p_c_prime >= alpha else "partial"


def baron_kenny(table: DataTable, x: str, m: str, y: str, controls=(),
                outcome_kind: str = CONTINUOUS) -> MediationReport:
    """Classical stepwise mediation decomposition.

    Fits the total-effect model (y ~ x + controls), the action model
    (m ~ x + controls, always OLS) and the joint model
    (y ~ x + m + controls); outcome models use OLS or logit per
    ``outcome_kind``. The indirect effect is a*b. Note that for binary
    outcomes a is on the linear scale while b is a log-odds coefficient,
    so the product mixes scales; reports carry this caveat.
    """
    controls = list(controls)
    step1 = _fit_outcome(table, y, [x] + controls, outcome_kind)
    step2 = linmodel.ols_fit(table, m, [x] + controls)
    step3 = _fit_outcome(table, y, [x, m] + controls, outcome_kind)

    a = step2.coef_for(x)
    b = step3.coef_for(m)
    c = step1.coef_for(x)
    c_prime = step3.coef_for(x)
    p_a = step2.p_for(x)
    p_b = step3.p_for(m)
    p_c = step1.p_for(x)
    p_c_prime = step3.p_for(x)

    return MediationReport(
        x=x, m=m, y=y, controls=controls, outcome_kind=outcome_kind,
        a=a, b=b, c=c, c_prime=c_prime,
        p_a=p_a, p_b=p_b, p_c=p_c, p_c_prime=p_c_prime,
        indirect=a * b,
        classification=classify_mediation(p_a, p_b, p_c, p_c_prime),
    )


@dataclass
class BootstrapResult:
    lower: float
    upper: float
    level: float
    resamples: int
    failed: int
    mean: float
    sd: float
    point: float


def _indirect_refitter(table: DataTable, x: str, m: str, y: str, controls,
                       outcome_kind: str):
    """Precompute design matrices; return a closure refitting a*b on row indices."""
    controls = list(controls)
    Xa, _ = design_matrix(table, [x] + controls, intercept=True)
    mvec = np.asarray(table.col(m), dtype=float)
    Xb, _ = design_matrix(table, [x, m] + controls, intercept=True)
    yvec = np.asarray(table.col(y), dtype=float)
    binary = outcome_kind == BINARY

    def refit(idx) -> float:
        a_coef = ols_coefs(Xa[idx], mvec[idx])[1]
        if binary:
            ysub = yvec[idx]
            if ysub.min() == ysub.max():
                raise linmodel.SingleClassError("resample lost one outcome class")
            beta, _, converged, _, _ = irls(Xb[idx], ysub)
            if not converged:
                raise FitError("logit refit did not converge")
            b_coef = beta[2]
        else:
            b_coef = ols_coefs(Xb[idx], yvec[idx])[2]
        return float(a_coef * b_coef)

    return refit


def bootstrap_indirect(table: DataTable, x: str, m: str, y: str, controls=(),
                       outcome_kind: str = CONTINUOUS, B: int = 5000,
                       level: float = 0.95, seed: int = 0,
                       exhaustive: bool = False,
                       max_failure_rate: float = 0.1) -> BootstrapResult:
    """Percentile bootstrap interval for the indirect effect a*b.

    Case resampling: each of the B resamples draws n rows with replacement
    and refits the a and b paths. Resample r draws from the sub-stream
    (seed, r), so the result does not depend on execution order. Resamples
    whose refit fails (rank loss, lost class, separation) are discarded and
    counted; more than ``max_failure_rate`` failures aborts. With
    ``exhaustive=True`` every one of the n^n ordered resamples is evaluated
    instead (only sensible for toy tables; guarded at n <= 7).
    """
    if not 0 < level < 1:
        raise ValueError(f"confidence level must be in (0, 1), got {level}")
    n = table.n_rows
    refit = _indirect_refitter(table, x, m, y, controls, outcome_kind)
    point = refit(np.arange(n))

    if exhaustive:
        if n > 7:
            raise ValueError("exhaustive bootstrap is limited to tables with <= 7 rows")
        draws = (np.array(tup) for tup in itertools.product(range(n), repeat=n))
        total = n ** n
    else:
        if B < 1:
            raise ValueError("B must be positive")

        def _random_draws():
            for r in range(B):
                yield RngStream(seed, r).resample_indices(n)

        draws = _random_draws()
        total = B

    stats: list[float] = []
    failed = 0
    for idx in draws:
        try:
            stats.append(refit(idx))
        except FitError:
            failed += 1
    if failed > max_failure_rate * total:
        raise BootstrapError(
            f"{failed} of {total} bootstrap resamples failed to refit "
            f"(limit {max_failure_rate:.0%}); the model is too fragile for "
            "case resampling on this table"
        )
    if not stats:
        raise BootstrapError("every bootstrap resample failed to refit")

    arr = np.array(stats)
    tail = (1.0 - level) / 2.0
    return BootstrapResult(
        lower=quantile(arr, tail),
        upper=quantile(arr, 1.0 - tail),
        level=level,
        resamples=total,
        failed=failed,
        mean=float(arr.mean()),
        sd=float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0,
        point=point,
    )


def mediate(table: DataTable, x: str, m: str, y: str, controls=(),
            outcome_kind: str = CONTINUOUS, B: int = 5000, level: float = 0.95,
            seed: int = 0) -> MediationReport:
    """baron_kenny plus bootstrap_indirect, merged into one report."""
    report = baron_kenny(table, x, m, y, controls, outcome_kind)
    boot = bootstrap_indirect(table, x, m, y, controls, outcome_kind,
                              B=B, level=level, seed=seed)
    report.boot_ci = (boot.lower, boot.upper)
    report.boot_level = level
    report.boot_b = B
    report.boot_failed = boot.failed
    report.boot_mean = boot.mean
    report.boot_sd = boot.sd
    return report


# ---------------------------------------------------------------------------
# Moderation
# ---------------------------------------------------------------------------

@dataclass
class SimpleSlope:
    at: str           # "-1sd" | "mean" | "+1sd"
    moderator_value: float
    slope: float
    se: float
    stat: float
    p: float

    def to_dict(self) -> dict:
        return {"at": self.at, "moderator_value": self.moderator_value,
                "slope": self.slope, "se": self.se, "stat": self.stat, "p": self.p}


@dataclass
class SubgroupSlope:
    group: str        # "low" | "high"
    n: int
    slope: float
    se: float
    p: float

    def to_dict(self) -> dict:
        return {"group": self.group, "n": self.n, "slope": self.slope,
                "se": self.se, "p": self.p}


@dataclass
class ModerationReport:
    x: str
    moderator: str
    y: str
    controls: list[str]
    outcome_kind: str
    interaction_coef: float
    interaction_se: float
    interaction_p: float
    model_terms: list[str]
    simple_slopes: list[SimpleSlope] = field(default_factory=list)
    subgroups: list[SubgroupSlope] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "x": self.x, "moderator": self.moderator, "y": self.y,
            "controls": list(self.controls), "outcome_kind": self.outcome_kind,
            "interaction": {"coef": self.interaction_coef, "se": self.interaction_se,
                            "p": self.interaction_p},
            "model_terms": list(self.model_terms),
            "simple_slopes": [s.to_dict() for s in self.simple_slopes],
            "subgroups": [s.to_dict() for s in self.subgroups],
        }


def moderation(table: DataTable, x: str, moderator: str, y: str, controls=(),
               outcome_kind: str = CONTINUOUS) -> ModerationReport:
    """Interaction-term moderation test with simple slopes and a median split.

    The focal predictor and the moderator are mean-centered internally
    before forming their product, so the interaction coefficient is
    invariant to location shifts of either input. Simple slopes of x are
    reported at moderator = mean -1sd / mean / mean +1sd with standard
    errors from the coefficient covariance; subgroup slopes refit the
    no-interaction model on the median-split halves.
    """
    controls = list(controls)
    xv = np.asarray(table.col(x), dtype=float)
    mv = np.asarray(table.col(moderator), dtype=float)
    if np.ptp(mv) == 0.0:
        raise FitError(f"moderator '{moderator}' has zero variance")
    xc = xv - xv.mean()
    mc = mv - mv.mean()

    xc_name = f"{x}_c"
    mc_name = f"{moderator}_c"
    int_name = f"{x}_x_{moderator}"
    work = (table.with_column(xc_name, xc)
                 .with_column(mc_name, mc)
                 .with_column(int_name, xc * mc))
    fit = _fit_outcome(work, y, [xc_name, mc_name, int_name] + controls, outcome_kind)

    sd_m = sample_sd(mv)
    ix = fit.terms.index(xc_name)
    ii = fit.terms.index(int_name)
    coef_x = float(fit.coef[ix])
    coef_int = float(fit.coef[ii])
    vxx = float(fit.vcov[ix, ix])
    vii = float(fit.vcov[ii, ii])
    vxi = float(fit.vcov[ix, ii])

    slopes = []
    for label, lvl in (("-1sd", -sd_m), ("mean", 0.0), ("+1sd", sd_m)):
        slope = coef_x + coef_int * lvl
        var = vxx + lvl * lvl * vii + 2.0 * lvl * vxi
        se = float(np.sqrt(max(var, 0.0)))
        stat = slope / se if se > 0 else float("inf") * np.sign(slope or 1.0)
        if outcome_kind == BINARY:
            p = 2.0 * float(sstats.norm.sf(abs(stat)))
        else:
            p = 2.0 * float(sstats.t.sf(abs(stat), fit.df_resid))
        slopes.append(SimpleSlope(at=label, moderator_value=float(lvl),
                                  slope=float(slope), se=se, stat=float(stat), p=p))

    med = quantile(mv, 0.5)
    low_idx = np.where(mv <= med)[0]
    high_idx = np.where(mv > med)[0]
    subgroups = []
    for label, idx in (("low", low_idx), ("high", high_idx)):
        sub = table.take_rows(idx)
        subfit = _fit_outcome(sub, y, [x] + controls, outcome_kind)
        subgroups.append(SubgroupSlope(
            group=label, n=int(idx.size), slope=subfit.coef_for(x),
            se=subfit.se_for(x), p=subfit.p_for(x),
        ))

    return ModerationReport(
        x=x, moderator=moderator, y=y, controls=controls, outcome_kind=outcome_kind,
        interaction_coef=coef_int, interaction_se=float(fit.se[ii]),
        interaction_p=float(fit.p[ii]), model_terms=list(fit.terms),
        simple_slopes=slopes, subgroups=subgroups,
    )
