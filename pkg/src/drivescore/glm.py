"""Logistic regression: IRLS fitting, Wald inference, backward elimination,
scoring and premium arithmetic.

Estimation is plain Newton/IRLS on the Bernoulli log-likelihood with
step-halving, no regularization: coefficients stay in raw feature units so
they read directly as log-odds effects.  Convergence is declared on the score
vector scaled per column by max(1, max|x_j|), which keeps the criterion
meaningful for raw-unit columns whose magnitudes differ by orders of
magnitude.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Sequence

import numpy as np

from . import __version__

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 50
SEPARATION_BETA_BOUND = 30.0  # on |beta_j| * column scale

INTERCEPT_NAME = "const"


class LogisticError(ValueError):
    """Base class for estimation failures."""


class SeparationError(LogisticError):
    def __init__(self, columns: Sequence[str]):
        self.columns = tuple(columns)
        super().__init__("complete or quasi-complete separation; diverging "
                         f"coefficients on columns: {', '.join(self.columns)}")


class CollinearityError(LogisticError):
    def __init__(self, columns: Sequence[str]):
        self.columns = tuple(columns)
        super().__init__("singular information matrix; linearly dependent "
                         f"columns: {', '.join(self.columns)}")


class SingleClassError(LogisticError):
    def __init__(self, target: str = ""):
        name = f" {target!r}" if target else ""
        super().__init__(f"target{name} needs at least one positive and one "
                         "negative observation")


class MissingFeatureError(KeyError):
    def __init__(self, names: Sequence[str]):
        self.names = tuple(names)
        super().__init__(f"missing features: {', '.join(self.names)}")


@dataclass(frozen=True)
class DesignMatrix:
    """Observations with a leading intercept column of ones and a 0/1 target."""

    feature_names: tuple[str, ...]
    X: np.ndarray
    y: np.ndarray
    device_ids: tuple[str, ...] | None = None

    def __post_init__(self):
        X, y = self.X, self.y
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise ValueError("design shapes inconsistent")
        if X.shape[1] != len(self.feature_names) + 1:
            raise ValueError("column count must equal feature names + intercept")
        if not np.all(X[:, 0] == 1.0):
            raise ValueError("first column must be the intercept (all ones)")
        if not np.all(np.isfinite(X)):
            raise ValueError("design matrix contains non-finite values")
        if not np.all((y == 0) | (y == 1)):
            raise ValueError("target must be 0/1")
        if self.device_ids is not None and len(self.device_ids) != X.shape[0]:
            raise ValueError("device_ids length mismatch")

    @classmethod
    def from_rows(cls, rows: Sequence[Mapping[str, float]], y: Sequence[int],
                  feature_names: Sequence[str],
                  device_ids: Sequence[str] | None = None) -> "DesignMatrix":
        names = tuple(feature_names)
        missing = sorted({n for row in rows for n in names if n not in row})
        if missing:
            raise MissingFeatureError(missing)
        X = np.empty((len(rows), len(names) + 1), dtype=float)
        X[:, 0] = 1.0
        for j, name in enumerate(names, start=1):
            X[:, j] = [float(row[name]) for row in rows]
        return cls(names, X, np.asarray(y, dtype=float),
                   tuple(device_ids) if device_ids is not None else None)

    @property
    def columns(self) -> tuple[str, ...]:
        return (INTERCEPT_NAME,) + self.feature_names

    @property
    def n_obs(self) -> int:
        return self.X.shape[0]

    def drop(self, names: Sequence[str]) -> "DesignMatrix":
        gone = set(names)
        unknown = gone - set(self.feature_names)
        if unknown:
            raise KeyError(f"cannot drop unknown columns: {sorted(unknown)}")
        keep = [0] + [j for j, n in enumerate(self.feature_names, start=1)
                      if n not in gone]
        kept_names = tuple(n for n in self.feature_names if n not in gone)
        return DesignMatrix(kept_names, self.X[:, keep], self.y, self.device_ids)

    def intercept_only(self) -> "DesignMatrix":
        return DesignMatrix((), self.X[:, :1], self.y, self.device_ids)

    def subset(self, idx: np.ndarray) -> "DesignMatrix":
        ids = tuple(np.asarray(self.device_ids, dtype=object)[idx]) \
            if self.device_ids is not None else None
        return DesignMatrix(self.feature_names, self.X[idx], self.y[idx], ids)


@dataclass(frozen=True)
class FittedModel:
    """Maximum-likelihood logistic fit with Wald inference."""

    target: str
    columns: tuple[str, ...]  # intercept first
    coef: tuple[float, ...]
    se: tuple[float, ...]
    p_values: tuple[float, ...]
    log_likelihood: float
    aic: float
    n_obs: int
    converged: bool
    n_iter: int
    flagged: tuple[str, ...] = ()

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self.columns[1:]

    @property
    def coef_vector(self) -> np.ndarray:
        return np.asarray(self.coef, dtype=float)

    def coef_by_name(self) -> dict[str, float]:
        return dict(zip(self.columns, self.coef))


def _log_likelihood(eta: np.ndarray, y: np.ndarray) -> float:
    # sum_i [ y_i * eta_i - log(1 + exp(eta_i)) ], numerically stable
    return float(y @ eta - np.logaddexp(0.0, eta).sum())


def _sigmoid(eta: np.ndarray) -> np.ndarray:
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    e = np.exp(eta[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _dependent_columns(X: np.ndarray, columns: Sequence[str]) -> list[str]:
    """Greedy scan for columns that add no rank, in column order."""
    bad = []
    kept: list[int] = []
    for j in range(X.shape[1]):
        cand = X[:, kept + [j]]
        if np.linalg.matrix_rank(cand) <= len(kept):
            bad.append(columns[j])
        else:
            kept.append(j)
    return bad


def fit_logistic(design: DesignMatrix, target: str = "",
                 tol: float = DEFAULT_TOL,
                 max_iter: int = DEFAULT_MAX_ITER) -> FittedModel:
    """Fit by Newton/IRLS with step-halving.

    Converges when every score component |g_j| falls below tol times the
    column scale max(1, max|x_j|); the check runs before each step, so a
    design whose score vanishes at beta = 0 returns the zero vector exactly.
    Raises SeparationError when a feature coefficient diverges (|beta_j|
    beyond 30; the intercept is exempt since it cannot separate classes)
    and CollinearityError when the information matrix is singular because
    of linearly dependent columns.
    """
    X, y = design.X, design.y
    n, k = X.shape
    npos = int(y.sum())
    if npos == 0 or npos == n:
        raise SingleClassError(target)

    scale = np.maximum(1.0, np.abs(X).max(axis=0))
    is_feature = np.array([c != INTERCEPT_NAME for c in design.columns])
    beta = np.zeros(k)
    eta = X @ beta
    ll = _log_likelihood(eta, y)
    ll_path = [ll]
    converged = False
    n_iter = 0

    for n_iter in range(1, max_iter + 1):
        p = _sigmoid(eta)
        g = X.T @ (y - p)
        if np.max(np.abs(g) / scale) <= tol:
            converged = True
            n_iter -= 1
            break
        over = (np.abs(beta) > SEPARATION_BETA_BOUND) & is_feature
        if np.any(over):
            raise SeparationError([design.columns[j] for j in np.flatnonzero(over)])
        w = p * (1.0 - p)
        info = X.T @ (X * w[:, None])
        try:
            np.linalg.cholesky(info)
        except np.linalg.LinAlgError:
            if np.linalg.matrix_rank(X) < k:
                raise CollinearityError(_dependent_columns(X, design.columns)) from None
            # full-rank X with vanishing weights: fit saturated, treat as separation
            big = (np.abs(beta) > SEPARATION_BETA_BOUND / 2) & is_feature
            raise SeparationError([design.columns[j] for j in np.flatnonzero(big)]
                                  or list(design.columns)) from None
        delta = np.linalg.solve(info, g)
        step = 1.0
        while True:
            cand = beta + step * delta
            cand_eta = X @ cand
            cand_ll = _log_likelihood(cand_eta, y)
            if cand_ll >= ll - 1e-12 or step < 1e-10:
                break
            step /= 2.0
        beta, eta, ll = cand, cand_eta, cand_ll
        ll_path.append(ll)
    else:
        p = _sigmoid(eta)
        g = X.T @ (y - p)
        converged = np.max(np.abs(g) / scale) <= tol
        n_iter = max_iter

    if not converged:
        grew = len(ll_path) >= 4 and all(b > a for a, b in zip(ll_path[-4:], ll_path[-3:]))
        big = (np.abs(beta) > SEPARATION_BETA_BOUND / 2) & is_feature
        if grew and np.any(big):
            raise SeparationError([design.columns[j] for j in np.flatnonzero(big)])

    p = _sigmoid(eta)
    w = p * (1.0 - p)
    info = X.T @ (X * w[:, None])
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        raise CollinearityError(_dependent_columns(X, design.columns)) from None
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))

    flagged = []
    pvals = []
    for j in range(k):
        if not math.isfinite(se[j]) or se[j] == 0.0:
            flagged.append(design.columns[j])
            pvals.append(float("nan"))
        else:
            pvals.append(wald_pvalue(beta[j], se[j]))

    ll = _log_likelihood(X @ beta, y)
    return FittedModel(
        target=target,
        columns=design.columns,
        coef=tuple(float(b) for b in beta),
        se=tuple(float(s) for s in se),
        p_values=tuple(pvals),
        log_likelihood=ll,
        aic=2.0 * k - 2.0 * ll,
        n_obs=n,
        converged=converged,
        n_iter=n_iter,
        flagged=tuple(flagged),
    )


def wald_pvalue(coef: float, se: float) -> float:
    """Two-sided p-value of coef/se against the standard normal."""
    if se <= 0 or not math.isfinite(se):
        raise ValueError("standard error must be positive and finite")
    z = abs(coef / se)
    return math.erfc(z / math.sqrt(2.0))


def wald_pvalues(model: FittedModel) -> dict[str, float]:
    return dict(zip(model.columns, model.p_values))


def significance_stars(p: float) -> str:
    if math.isnan(p):
        return ""
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


def predict_proba(model, features: Mapping[str, float]) -> float:
    """Accident probability for one feature mapping.

    Works for any model exposing ``columns`` (intercept first) and
    ``coef_vector``.  Every model feature must be present; nothing is
    imputed.  The result is clamped into the open interval (0, 1).
    """
    names = model.columns[1:]
    missing = [n for n in names if n not in features]
    if missing:
        raise MissingFeatureError(missing)
    x = np.empty(len(names) + 1)
    x[0] = 1.0
    for j, name in enumerate(names, start=1):
        v = float(features[name])
        if not math.isfinite(v):
            raise ValueError(f"feature {name!r} is not finite")
        x[j] = v
    eta = float(x @ model.coef_vector)
    if eta >= 0:
        p = 1.0 / (1.0 + math.exp(-eta))
    else:
        e = math.exp(eta)
        p = e / (1.0 + e)
    tiny = math.ulp(0.0)
    return min(max(p, tiny), 1.0 - 2.0 ** -53)


def backward_eliminate(design: DesignMatrix, alpha: float = 0.05,
                       target: str = "", tol: float = DEFAULT_TOL,
                       max_iter: int = DEFAULT_MAX_ITER) -> FittedModel:
    """Drop the worst non-intercept coefficient until all p-values pass alpha.

    One column per round: the highest p-value above alpha, ties and NaN
    p-values resolved toward the earliest column.  The intercept is never a
    candidate.  Eliminating everything leaves the intercept-only model.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must be in (0, 1]")
    current = design
    while True:
        model = fit_logistic(current, target=target, tol=tol, max_iter=max_iter)
        if not current.feature_names:
            return model
        worst_name = None
        worst_p = alpha
        for name, p in zip(model.columns[1:], model.p_values[1:]):
            p_eff = 1.0 if math.isnan(p) else p
            if p_eff > worst_p:
                worst_name, worst_p = name, p_eff
        if worst_name is None:
            return model
        current = current.drop([worst_name])


def mcfadden_r2(model_loglik: float, null_loglik: float) -> float:
    """1 - logL(model)/logL(null); undefined when the null likelihood is 1."""
    if null_loglik == 0.0:
        raise ValueError("McFadden R^2 undefined: null log-likelihood is zero")
    return 1.0 - model_loglik / null_loglik


def compute_premium(p_accident: float, predicted_loss: float,
                    admin_costs: float, margin: float) -> float:
    """Premium = accident probability x predicted loss + admin + margin."""
    if not 0.0 <= p_accident <= 1.0:
        raise ValueError("p_accident must be within [0, 1]")
    if predicted_loss < 0 or admin_costs < 0 or margin < 0:
        raise ValueError("monetary inputs must be non-negative")
    return p_accident * predicted_loss + admin_costs + margin


def model_to_dict(model: FittedModel) -> dict:
    return {
        "target": model.target,
        "columns": list(model.columns),
        "coef": {c: v for c, v in zip(model.columns, model.coef)},
        "se": {c: v for c, v in zip(model.columns, model.se)},
        "p_value": {c: v for c, v in zip(model.columns, model.p_values)},
        "log_likelihood": model.log_likelihood,
        "aic": model.aic,
        "n_obs": model.n_obs,
        "converged": model.converged,
        "n_iter": model.n_iter,
        "flagged": list(model.flagged),
        "tool_version": __version__,
    }


def model_from_dict(d: dict) -> FittedModel:
    cols = tuple(d["columns"])
    return FittedModel(
        target=d["target"],
        columns=cols,
        coef=tuple(float(d["coef"][c]) for c in cols),
        se=tuple(float(d["se"][c]) for c in cols),
        p_values=tuple(float(d["p_value"][c]) for c in cols),
        log_likelihood=float(d["log_likelihood"]),
        aic=float(d["aic"]),
        n_obs=int(d["n_obs"]),
        converged=bool(d["converged"]),
        n_iter=int(d.get("n_iter", 0)),
        flagged=tuple(d.get("flagged", ())),
    )


@dataclass(frozen=True)
class ReferenceModel:
    """Published coefficient table for one target, usable for scoring.

    Coefficients are stored exactly as published (three decimals), so columns
    listed in ``non_scorable`` have effects that rounded to zero in print and
    contribute nothing to scores.
    """

    target: str
    columns: tuple[str, ...]  # intercept first
    coef: tuple[float, ...]
    se: tuple[float, ...]
    stars: tuple[str, ...]
    log_likelihood: float
    aic: float
    n_obs: int
    non_scorable: tuple[str, ...]

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self.columns[1:]

    @property
    def coef_vector(self) -> np.ndarray:
        return np.asarray(self.coef, dtype=float)

    def coef_by_name(self) -> dict[str, float]:
        return dict(zip(self.columns, self.coef))


def load_reference_models() -> dict[str, ReferenceModel]:
    """The published four-target coefficient bundle shipped with the package."""
    raw = resources.files("drivescore.data").joinpath("reference_models.json").read_text("utf-8")
    data = json.loads(raw)
    out = {}
    for target, m in data["models"].items():
        cols = tuple(m["columns"])
        out[target] = ReferenceModel(
            target=target,
            columns=cols,
            coef=tuple(float(m["coef"][c]) for c in cols),
            se=tuple(float(m["se"][c]) for c in cols),
            stars=tuple(m["stars"][c] for c in cols),
            log_likelihood=float(m["log_likelihood"]),
            aic=float(m["aic"]),
            n_obs=int(m["n_obs"]),
            non_scorable=tuple(m.get("non_scorable", ())),
        )
    return out
