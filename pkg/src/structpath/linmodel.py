"""Regression engine: OLS, VIF screening, stepwise selection, logit, ROC.

All fits are pure functions of an immutable DataTable. Conventions used
throughout (documented once here): sample n-1 variances, AIC for OLS is
n*ln(RSS/n) + 2k and for logit -2*loglik + 2k, two-sided p values from the
t distribution (OLS, df = n - k) or the normal (logit).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla
from scipy import stats as sstats

from .table import CATEGORICAL, DataTable

_RANK_TOL = 1e-10
_IRLS_SCORE_TOL = 1e-8
_IRLS_COEF_TOL = 1e-10
_IRLS_MAX_ITER = 50
_SEPARATION_COEF_BOUND = 250.0

INTERCEPT = "intercept"


class FitError(Exception):
    """A model could not be estimated on the given data."""


class MissingColumnError(FitError):
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"column '{column}' not found in table")


class RankDeficiencyError(FitError):
    """Design matrix is rank deficient; names the dependent columns."""

    def __init__(self, dependent: list[str]):
        self.dependent = list(dependent)
        super().__init__(
            "design matrix is rank deficient; linearly dependent column(s): "
            + ", ".join(self.dependent)
        )


class SeparationError(FitError):
    """Logit coefficients diverged, indicating (quasi-)separated classes."""


class SingleClassError(FitError):
    """Binary response contains only one class."""


# ---------------------------------------------------------------------------
# Fit results
# ---------------------------------------------------------------------------

@dataclass
class OlsFit:
    terms: list[str]
    coef: np.ndarray
    se: np.ndarray
    t: np.ndarray
    p: np.ndarray
    r2: float
    adj_r2: float
    resid_sd: float
    aic: float
    n: int
    df_resid: int
    vcov: np.ndarray = field(repr=False)

    def coef_for(self, term: str) -> float:
        return float(self.coef[self.terms.index(term)])

    def p_for(self, term: str) -> float:
        return float(self.p[self.terms.index(term)])

    def se_for(self, term: str) -> float:
        return float(self.se[self.terms.index(term)])

    def to_dict(self) -> dict:
        return {
            "terms": list(self.terms),
            "coef": [float(v) for v in self.coef],
            "se": [float(v) for v in self.se],
            "t": [float(v) for v in self.t],
            "p": [float(v) for v in self.p],
            "r2": self.r2,
            "adj_r2": self.adj_r2,
            "resid_sd": self.resid_sd,
            "aic": self.aic,
            "n": self.n,
            "df_resid": self.df_resid,
        }


@dataclass
class LogitFit:
    terms: list[str]
    coef: np.ndarray
    se: np.ndarray
    z: np.ndarray
    p: np.ndarray
    loglik: float
    aic: float
    converged: bool
    iterations: int
    n: int
    vcov: np.ndarray = field(repr=False)

    def coef_for(self, term: str) -> float:
        return float(self.coef[self.terms.index(term)])

    def p_for(self, term: str) -> float:
        return float(self.p[self.terms.index(term)])

    def se_for(self, term: str) -> float:
        return float(self.se[self.terms.index(term)])

    def to_dict(self) -> dict:
        return {
            "terms": list(self.terms),
            "coef": [float(v) for v in self.coef],
            "se": [float(v) for v in self.se],
            "z": [float(v) for v in self.z],
            "p": [float(v) for v in self.p],
            "loglik": self.loglik,
            "aic": self.aic,
            "converged": self.converged,
            "iterations": self.iterations,
            "n": self.n,
        }


@dataclass
class VifTable:
    values: dict[str, float]
    removed: list[tuple[str, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "values": {k: float(v) for k, v in self.values.items()},
            "removed": [[name, float(v)] for name, v in self.removed],
        }


@dataclass
class StepwiseStep:
    action: str          # "add" | "remove"
    term: str
    criterion: float     # AIC after the move, or the p value that drove it
    terms_after: list[str]


@dataclass
class StepwiseTrace:
    direction: str
    criterion: str
    steps: list[StepwiseStep] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "direction": self.direction,
            "criterion": self.criterion,
            "steps": [
                {"action": s.action, "term": s.term, "criterion": float(s.criterion),
                 "terms_after": list(s.terms_after)}
                for s in self.steps
            ],
        }


@dataclass
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float

    def to_dict(self) -> dict:
        return {
            "fpr": [float(v) for v in self.fpr],
            "tpr": [float(v) for v in self.tpr],
            "thresholds": [float(v) for v in self.thresholds],
            "auc": self.auc,
        }


# ---------------------------------------------------------------------------
# Design-matrix helpers
# ---------------------------------------------------------------------------

def _column_vector(table: DataTable, name: str) -> np.ndarray:
    if name not in table.columns:
        raise MissingColumnError(name)
    if table.kinds.get(name) == CATEGORICAL:
        raise FitError(f"column '{name}' is categorical; one-hot encode it before fitting")
    return np.asarray(table.col(name), dtype=float)


def design_matrix(table: DataTable, predictors, intercept: bool = True):
    """Stack predictor columns (plus optional leading intercept column)."""
    cols = []
    terms = []
    if intercept:
        cols.append(np.ones(table.n_rows))
        terms.append(INTERCEPT)
    for name in predictors:
        vec = _column_vector(table, name)
        if not np.isfinite(vec).all():
            raise FitError(f"predictor '{name}' contains non-finite values")
        if np.ptp(vec) == 0.0:
            raise FitError(f"predictor '{name}' has zero variance")
        cols.append(vec)
        terms.append(name)
    if not cols:
        raise FitError("empty design matrix")
    return np.column_stack(cols), terms


def _check_rank(X: np.ndarray, terms: list[str]):
    """Pivoted QR rank check; returns factors reused by the OLS solve."""
    q, r, piv = sla.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    scale = diag[0] if diag.size and diag[0] > 0 else 1.0
    rank = int(np.sum(diag > _RANK_TOL * scale))
    if rank < X.shape[1]:
        dependent = [terms[j] for j in sorted(piv[rank:])]
        raise RankDeficiencyError(dependent)
    return q, r, piv


# ---------------------------------------------------------------------------
# OLS
# ---------------------------------------------------------------------------

def ols_fit(table: DataTable, response: str, predictors, intercept: bool = True) -> OlsFit:
    """Least squares via pivoted QR, with classical inference.

    Standard errors come from sigma^2 (X'X)^-1, p values from the t
    distribution on n - k degrees of freedom.
    """
    y = _column_vector(table, response)
    if not np.isfinite(y).all():
        raise FitError(f"response '{response}' contains non-finite values")
    X, terms = design_matrix(table, predictors, intercept)
    n, k = X.shape
    if n <= k:
        raise FitError(f"{n} rows cannot identify {k} terms")
    q, r, piv = _check_rank(X, terms)

    qty = q.T @ y
    beta_piv = sla.solve_triangular(r, qty)
    beta = np.empty(k)
    beta[piv] = beta_piv

    resid = y - X @ beta
    rss = max(float(resid @ resid), 0.0)
    df_resid = n - k
    sigma2 = rss / df_resid

    rinv = sla.solve_triangular(r, np.eye(k))
    xtx_inv_piv = rinv @ rinv.T
    xtx_inv = np.empty_like(xtx_inv_piv)
    xtx_inv[np.ix_(piv, piv)] = xtx_inv_piv
    vcov = sigma2 * xtx_inv

    se = np.sqrt(np.maximum(np.diag(vcov), 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, beta / se, np.where(beta == 0, 0.0, np.sign(beta) * np.inf))
    p = 2.0 * sstats.t.sf(np.abs(t), df_resid)

    if intercept:
        tss = float(np.sum((y - y.mean()) ** 2))
    else:
        tss = float(y @ y)
    if tss == 0.0:
        raise FitError(f"response '{response}' has zero variance")
    r2 = 1.0 - rss / tss
    adj_r2 = 1.0 - (1.0 - r2) * (n - 1) / df_resid
    with np.errstate(divide="ignore"):
        aic = float(n * np.log(rss / n) + 2 * k) if rss > 0 else -np.inf

    return OlsFit(
        terms=terms, coef=beta, se=se, t=t, p=p, r2=float(r2), adj_r2=float(adj_r2),
        resid_sd=float(np.sqrt(sigma2)), aic=aic, n=n, df_resid=df_resid, vcov=vcov,
    )


def ols_coefs(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Coefficient-only least squares used in resampling loops.

    Raises RankDeficiencyError on singular designs instead of returning a
    minimum-norm solution, so callers can discard degenerate resamples.
    """
    beta, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank < X.shape[1]:
        raise RankDeficiencyError([f"col{j}" for j in range(X.shape[1])])
    return beta


# ---------------------------------------------------------------------------
# VIF and pruning
# ---------------------------------------------------------------------------

def vif(table: DataTable, columns) -> VifTable:
    """Variance inflation factors: VIF_j = 1 / (1 - R2 of column j on the rest).

    Perfectly collinear columns get float('inf') rather than an exception.
    """
    columns = list(columns)
    if len(columns) < 2:
        raise FitError("vif needs at least 2 columns")
    values: dict[str, float] = {}
    for name in columns:
        others = [c for c in columns if c != name]
        try:
            aux = ols_fit(table, name, others, intercept=True)
            r2 = min(aux.r2, 1.0)
        except RankDeficiencyError:
            r2 = 1.0
        if 1.0 - r2 <= 1e-12:
            values[name] = float("inf")
        else:
            values[name] = float(1.0 / (1.0 - r2))
    return VifTable(values=values)


def vif_prune(table: DataTable, columns, threshold: float = 5.0):
    """Drop the worst-VIF column until all survivors fall at or below threshold.

    Exact ties are resolved by removing the later-declared column first.
    Returns (retained names, VifTable with the elimination trace).
    """
    order = {name: i for i, name in enumerate(columns)}
    remaining = list(columns)
    removed: list[tuple[str, float]] = []
    values: dict[str, float] = {c: 1.0 for c in remaining}
    while len(remaining) >= 2:
        values = vif(table, remaining).values
        worst = max(values.values())
        if worst <= threshold:
            break
        ties = [name for name, v in values.items() if v == worst]
        victim = max(ties, key=order.__getitem__)
        remaining.remove(victim)
        removed.append((victim, worst))
    if len(remaining) == 1:
        values = {remaining[0]: 1.0}
    return remaining, VifTable(values=values, removed=removed)


# ---------------------------------------------------------------------------
# Stepwise selection
# ---------------------------------------------------------------------------

P_ENTER = 0.05
P_REMOVE = 0.10


def stepwise(table: DataTable, response: str, candidates, direction: str = "both",
             criterion: str = "aic", max_steps: int = 100):
    """Greedy stepwise regression over the candidate predictors.

    AIC mode accepts the single best add/remove that lowers AIC and stops at
    a local minimum. P-value mode enters the strongest candidate at p < 0.05
    and removes the weakest included term at p > 0.10. Returns the final
    OlsFit and a StepwiseTrace of every accepted move.
    """
    candidates = list(candidates)
    if not candidates:
        raise FitError("stepwise needs a non-empty candidate list")
    if direction not in ("forward", "backward", "both"):
        raise ValueError(f"unknown direction '{direction}'")
    if criterion not in ("aic", "pvalue"):
        raise ValueError(f"unknown criterion '{criterion}'")

    included = list(candidates) if direction == "backward" else []
    trace = StepwiseTrace(direction=direction, criterion=criterion)

    def fit(terms):
        return ols_fit(table, response, terms, intercept=True)

    current = fit(included)
    if criterion == "aic":
        for _ in range(max_steps):
            best = None  # (aic, action, term, fit)
            if direction in ("forward", "both"):
                for c in candidates:
                    if c in included:
                        continue
                    try:
                        cand = fit(included + [c])
                    except RankDeficiencyError:
                        continue
                    if best is None or cand.aic < best[0]:
                        best = (cand.aic, "add", c, cand)
            if direction in ("backward", "both"):
                for c in included:
                    cand = fit([t for t in included if t != c])
                    if best is None or cand.aic < best[0]:
                        best = (cand.aic, "remove", c, cand)
            if best is None or best[0] >= current.aic:
                break
            _, action, term, current = best
            if action == "add":
                included.append(term)
            else:
                included.remove(term)
            trace.steps.append(StepwiseStep(action, term, current.aic, list(included)))
    else:
        for _ in range(max_steps):
            moved = False
            if direction in ("forward", "both"):
                best = None  # (p, term, fit)
                for c in candidates:
                    if c in included:
                        continue
                    try:
                        cand = fit(included + [c])
                    except RankDeficiencyError:
                        continue
                    pval = cand.p_for(c)
                    if best is None or pval < best[0]:
                        best = (pval, c, cand)
                if best is not None and best[0] < P_ENTER:
                    included.append(best[1])
                    current = best[2]
                    trace.steps.append(StepwiseStep("add", best[1], best[0], list(included)))
                    moved = True
            if direction in ("backward", "both") and included:
                pvals = [(current.p_for(t), t) for t in included]
                worst_p, worst_t = max(pvals)
                if worst_p > P_REMOVE:
                    included.remove(worst_t)
                    current = fit(included)
                    trace.steps.append(StepwiseStep("remove", worst_t, worst_p, list(included)))
                    moved = True
            if not moved:
                break
    return current, trace


# ---------------------------------------------------------------------------
# Logistic regression by IRLS
# ---------------------------------------------------------------------------

def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _bernoulli_loglik(y: np.ndarray, eta: np.ndarray) -> float:
    # log L = sum y*eta - log(1 + exp(eta)), computed stably
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def irls(X: np.ndarray, y: np.ndarray, max_iter: int = _IRLS_MAX_ITER):
    """Newton/IRLS core for the Bernoulli log-likelihood.

    Step-halving keeps the log-likelihood nondecreasing. Returns
    (beta, loglik, converged, iterations, weights). Raises SeparationError
    when coefficients diverge.
    """
    n, k = X.shape
    beta = np.zeros(k)
    eta = X @ beta
    ll = _bernoulli_loglik(y, eta)
    converged = False
    iterations = 0
    while iterations < max_iter:
        mu = _sigmoid(eta)
        score = X.T @ (y - mu)
        if np.max(np.abs(score)) < _IRLS_SCORE_TOL:
            converged = True
            break
        w = np.maximum(mu * (1.0 - mu), 1e-10)
        sw = np.sqrt(w)
        # weighted least squares on the working response
        z = eta + (y - mu) / w
        delta = ols_coefs(X * sw[:, None], z * sw) - beta
        step = 1.0
        improved = False
        for _ in range(40):
            beta_new = beta + step * delta
            eta_new = X @ beta_new
            ll_new = _bernoulli_loglik(y, eta_new)
            if ll_new >= ll:
                improved = True
                break
            step *= 0.5
        if not improved:
            break  # stalled at float precision; report non-convergence
        iterations += 1
        coef_change = np.max(np.abs(beta_new - beta))
        beta, eta, ll = beta_new, eta_new, ll_new
        if np.max(np.abs(beta)) > _SEPARATION_COEF_BOUND:
            raise SeparationError(
                "coefficients diverged during IRLS; classes appear (quasi-)separated"
            )
        if coef_change < _IRLS_COEF_TOL:
            converged = True
            break
    eta = X @ beta
    # A nonnegative classification margin on every row means the current
    # coefficients themselves witness (quasi-)separated classes: the MLE
    # does not exist and the stalled coefficients are meaningless.
    margins = (2.0 * y - 1.0) * eta
    if iterations > 0 and margins.min() >= 0.0 and np.max(np.abs(eta)) > 10.0:
        raise SeparationError(
            "classes are (quasi-)separated: every observation is classified "
            "with nonnegative margin, so coefficients diverge"
        )
    mu = _sigmoid(eta)
    return beta, ll, converged, iterations, np.maximum(mu * (1.0 - mu), 1e-10)


def logit_fit(table: DataTable, response: str, predictors) -> LogitFit:
    """Binary logistic regression fit by iteratively reweighted least squares.

    Standard errors come from the inverse observed information at the
    optimum; p values are two-sided normal.
    """
    y = _column_vector(table, response)
    uniq = np.unique(y)
    if not np.isin(uniq, (0.0, 1.0)).all():
        raise FitError(f"response '{response}' must be coded 0/1")
    if uniq.size < 2:
        raise SingleClassError(f"response '{response}' contains a single class")
    X, terms = design_matrix(table, predictors, intercept=True)
    n, k = X.shape
    if n <= k:
        raise FitError(f"{n} rows cannot identify {k} terms")
    _check_rank(X, terms)

    beta, ll, converged, iterations, w = irls(X, y)

    xtwx = X.T @ (X * w[:, None])
    vcov = np.linalg.inv(xtwx)
    se = np.sqrt(np.maximum(np.diag(vcov), 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, beta / se, np.where(beta == 0, 0.0, np.sign(beta) * np.inf))
    p = 2.0 * sstats.norm.sf(np.abs(z))
    aic = -2.0 * ll + 2.0 * k

    return LogitFit(
        terms=terms, coef=beta, se=se, z=z, p=p, loglik=ll, aic=float(aic),
        converged=converged, iterations=iterations, n=n, vcov=vcov,
    )


# ---------------------------------------------------------------------------
# ROC / AUC
# ---------------------------------------------------------------------------

def roc_auc(scores, labels) -> RocCurve:
    """ROC curve and rank-based AUC with midrank tie handling.

    AUC equals the Mann-Whitney statistic: (sum of positive ranks minus
    n_pos(n_pos+1)/2) / (n_pos * n_neg), with tied scores sharing midranks.
    """
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels, dtype=float)
    if s.shape != y.shape or s.ndim != 1:
        raise ValueError("scores and labels must be equally long vectors")
    if not np.isin(np.unique(y), (0.0, 1.0)).all():
        raise ValueError("labels must be coded 0/1")
    n_pos = int(np.sum(y == 1.0))
    n_neg = int(np.sum(y == 0.0))
    if n_pos == 0 or n_neg == 0:
        raise SingleClassError("both classes must be present to compute a ROC curve")

    ranks = sstats.rankdata(s, method="average")
    auc = (float(np.sum(ranks[y == 1.0])) - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)

    # Curve points: sweep thresholds from +inf down through each distinct score.
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]
    distinct = np.where(np.diff(s_sorted) != 0)[0]
    boundaries = np.concatenate([distinct, [s.size - 1]])
    tps = np.cumsum(y_sorted)[boundaries]
    fps = (boundaries + 1) - tps
    fpr = np.concatenate([[0.0], fps / n_neg])
    tpr = np.concatenate([[0.0], tps / n_pos])
    thresholds = np.concatenate([[np.inf], s_sorted[boundaries]])
    return RocCurve(fpr=fpr, tpr=tpr, thresholds=thresholds, auc=float(auc))
