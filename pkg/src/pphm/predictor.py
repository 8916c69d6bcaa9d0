"""Standardized multiple regression and predictor ranking.

Factors are z-scored (sample std, ddof=1) before fitting so that the size of
each coefficient is comparable across factors; the target stays on its own
scale. Also: Pearson correlation with a Student-t significance screen and a
conjugate normal update for sequentially estimating a mean.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy import stats

from .errors import (
    InputError,
    NonFiniteValue,
    NonPositiveVariance,
    RankDeficientDesign,
    TooFewObservations,
    ZeroVarianceFactor,
)


@dataclass(frozen=True)
class FactorMatrix:
    factor_names: tuple[str, ...]
    rows: np.ndarray      # m x n
    target: np.ndarray    # m

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        target = np.asarray(self.target, dtype=float)
        object.__setattr__(self, "factor_names", tuple(self.factor_names))
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "target", target)
        if rows.ndim != 2 or rows.shape[1] != len(self.factor_names):
            raise InputError("rows must be an m x n array matching factor_names")
        if target.shape != (rows.shape[0],):
            raise InputError("target length must equal the number of rows")
        if len(set(self.factor_names)) != len(self.factor_names):
            raise InputError("factor names must be unique")
        if not (np.all(np.isfinite(rows)) and np.all(np.isfinite(target))):
            raise NonFiniteValue(what="factor matrix entry")
        m, n = rows.shape
        if m < n + 2:
            raise TooFewObservations(m, n + 2)

    @property
    def m(self) -> int:
        return self.rows.shape[0]

    def with_column_scaled(self, j: int, k: float) -> "FactorMatrix":
        rows = self.rows.copy()
        rows[:, j] *= k
        return FactorMatrix(self.factor_names, rows, self.target)


@dataclass(frozen=True)
class PredictorReport:
    terms: tuple[str, ...]
    coefficients_standardized: np.ndarray
    intercept: float
    r_squared: float
    ranking: tuple[str, ...]
    means: np.ndarray
    stds: np.ndarray
    factor_names: tuple[str, ...] = ()

    def coefficient(self, name: str) -> float:
        return float(self.coefficients_standardized[self.terms.index(name)])

    def to_dict(self) -> dict:
        return {
            "terms": list(self.terms),
            "coefficients_standardized": [float(b) for b in self.coefficients_standardized],
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "ranking": list(self.ranking),
            "means": dict(zip(self.factor_names, map(float, self.means))),
            "stds": dict(zip(self.factor_names, map(float, self.stds))),
        }


@dataclass(frozen=True)
class SequentialEstimate:
    mean: float
    variance: float
    n_obs: int = 0

    def __post_init__(self):
        if not self.variance > 0:
            raise NonPositiveVariance(self.variance)


def _standardize_columns(x: np.ndarray, names: Sequence[str]):
    means = x.mean(axis=0)
    centered = x - means
    stds = np.sqrt((centered * centered).sum(axis=0) / (x.shape[0] - 1))
    scale = np.abs(x).max(axis=0)
    for name, s, c in zip(names, stds, scale):
        # a column of identical floats can leave a few ulp of residue
        if s <= 1e-13 * c:
            raise ZeroVarianceFactor(name)
    return centered / stds, means, stds


def standardize(matrix: FactorMatrix):
    """Z-score every factor column. Returns ``(z, means, stds)``."""
    return _standardize_columns(matrix.rows, matrix.factor_names)


def _design(z: np.ndarray, names: Sequence[str], interactions: bool):
    cols = [z[:, j] for j in range(z.shape[1])]
    terms = list(names)
    if interactions:
        for i, j in combinations(range(z.shape[1]), 2):
            cols.append(z[:, i] * z[:, j])
            terms.append(f"{names[i]}*{names[j]}")
    x = np.column_stack([np.ones(z.shape[0])] + cols)
    return x, terms


def _sort_terms(terms, coefs):
    return sorted(zip(terms, coefs), key=lambda tb: (-abs(tb[1]), tb[0]))


def fit_linear(matrix: FactorMatrix, interactions: bool = False) -> PredictorReport:
    """Least-squares fit of the target on standardized factors.

    With ``interactions`` the design also carries every pairwise product of
    standardized factors. Solved through a Householder QR of the design.
    """
    z, means, stds = standardize(matrix)
    x, terms = _design(z, matrix.factor_names, interactions)
    m, p = x.shape
    if m < p + 1:
        raise TooFewObservations(m, p + 1)
    q, r = np.linalg.qr(x, mode="reduced")
    diag = np.abs(np.diag(r))
    if diag.min() <= max(m, p) * np.finfo(float).eps * diag.max():
        raise RankDeficientDesign(
            f"design with {p} columns is rank deficient; drop collinear factors"
            + (" or disable interactions" if interactions else ""))
    beta = _back_substitute(r, q.T @ matrix.target)
    resid = matrix.target - x @ beta
    rss = float(resid @ resid)
    yc = matrix.target - matrix.target.mean()
    tss = float(yc @ yc)
    r_squared = 1.0 - rss / tss if tss > 0 else 1.0
    coefs = beta[1:]
    intercept = float(beta[0])
    ranking = tuple(name for name, _ in _sort_terms(terms, coefs))
    return PredictorReport(
        terms=tuple(terms), coefficients_standardized=coefs, intercept=intercept,
        r_squared=r_squared, ranking=ranking, means=means, stds=stds,
        factor_names=matrix.factor_names)


def _back_substitute(r: np.ndarray, b: np.ndarray) -> np.ndarray:
    p = r.shape[0]
    x = np.zeros(p)
    for i in range(p - 1, -1, -1):
        x[i] = (b[i] - r[i, i + 1:] @ x[i + 1:]) / r[i, i]
    return x


def predict(report: PredictorReport, rows) -> np.ndarray:
    """Evaluate a fitted report on raw factor rows."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    z = (rows - report.means) / report.stds
    n = len(report.factor_names)
    interactions = len(report.terms) > n
    x, _ = _design(z, report.factor_names, interactions)
    return report.intercept + x[:, 1:] @ report.coefficients_standardized


def rank_predictors(report: PredictorReport, min_abs: float = 0.1) -> list[tuple[str, float]]:
    """Terms with ``|b| >= min_abs``, largest magnitude first, ties by name."""
    return [(name, float(b)) for name, b in
            _sort_terms(report.terms, report.coefficients_standardized)
            if abs(b) >= min_abs]


def correlation_matrix(matrix: FactorMatrix, include_target: bool = False):
    """Pearson correlations between factors (and optionally the target).

    Returns ``(names, R)``.
    """
    names = list(matrix.factor_names)
    data = matrix.rows
    if include_target:
        names.append("target")
        data = np.column_stack([data, matrix.target])
    z, _, _ = _standardize_columns(data, names)
    corr = (z.T @ z) / (z.shape[0] - 1)
    corr = np.clip((corr + corr.T) / 2.0, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    return names, corr


def t_critical(alpha: float, dof: int) -> float:
    """Two-sided Student-t critical value."""
    return float(stats.t.ppf(1.0 - alpha / 2.0, dof))


def significant_correlations(corr, m: int, alpha: float = 0.05) -> list[tuple[int, int, float]]:
    """Pairs ``i < j`` whose correlation is significant at level ``alpha``."""
    if m < 4:
        raise TooFewObservations(m, 4)
    if not 0.0 < alpha < 1.0:
        raise InputError(f"alpha must lie in (0, 1), got {alpha!r}")
    corr = np.asarray(corr, dtype=float)
    crit = t_critical(alpha, m - 2)
    out = []
    for i, j in combinations(range(corr.shape[0]), 2):
        r = float(corr[i, j])
        if abs(r) >= 1.0:
            stat = math.inf
        else:
            stat = abs(r) * math.sqrt((m - 2) / (1.0 - r * r))
        if stat > crit:
            out.append((i, j, r))
    return out


def sequential_update(prior: SequentialEstimate, observation: float,
                      obs_variance: float) -> SequentialEstimate:
    """Conjugate normal update of a mean with known observation variance."""
    if not obs_variance > 0:
        raise NonPositiveVariance(obs_variance)
    prec = 1.0 / prior.variance + 1.0 / obs_variance
    mean = (prior.mean / prior.variance + observation / obs_variance) / prec
    return SequentialEstimate(mean=mean, variance=1.0 / prec, n_obs=prior.n_obs + 1)
