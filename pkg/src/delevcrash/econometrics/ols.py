"""Ordinary least squares with classical (homoskedastic) standard errors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import linalg, stats

SIGNIFICANCE_LEVELS = (0.01, 0.05, 0.10)
PIVOT_TOL = 1e-10


class RankDeficient(ValueError):
    """Regressors are (numerically) collinear."""


class TooFewObservations(ValueError):
    pass


def critical_values(df: int) -> tuple[float, float, float]:
    """Two-sided t critical values at 1%, 5% and 10%."""
    return tuple(float(stats.t.ppf(1.0 - lvl / 2.0, df)) for lvl in SIGNIFICANCE_LEVELS)


def stars(t: float, df: int) -> str:
    """``***``/``**``/``*`` for 1%/5%/10% two-sided significance.

    A statistic exactly equal to a critical value gets the stronger marker.
    """
    if not np.isfinite(t):
        return "***" if np.isinf(t) else ""
    c01, c05, c10 = critical_values(df)
    at = abs(t)
    if at >= c01:
        return "***"
    if at >= c05:
        return "**"
    if at >= c10:
        return "*"
    return ""


@dataclass(frozen=True)
class RegressionResult:
    names: tuple[str, ...]
    coef: np.ndarray
    se: np.ndarray
    t: np.ndarray
    F: float
    r2: float
    r2_adj: float
    n: int
    k: int
    intercept: bool = True
    residuals: np.ndarray | None = None

    @property
    def df_resid(self) -> int:
        return self.n - self.k - (1 if self.intercept else 0)

    def stars(self) -> list[str]:
        return [stars(float(t), self.df_resid) for t in self.t]

    def coefficient(self, name: str) -> float:
        return float(self.coef[self.names.index(name)])

    def predict(self, X: Mapping[str, Sequence[float]]) -> np.ndarray:
        out = 0.0
        for name, c in zip(self.names, self.coef):
            out = out + (c if name == "const" else c * np.asarray(X[name], dtype=float))
        return np.asarray(out, dtype=float)

    def to_dict(self) -> dict:
        def num(v):
            v = float(v)
            return v if np.isfinite(v) else None

        return {
            "coefficients": {
                name: {"coef": num(c), "se": num(s), "t": num(t), "stars": st}
                for name, c, s, t, st in zip(self.names, self.coef, self.se, self.t, self.stars())
            },
            "F": num(self.F),
            "r2": num(self.r2),
            "r2_adj": num(self.r2_adj),
            "n": self.n,
        }


def _spd_solve(G: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``G b = rhs`` for symmetric PSD ``G`` via Cholesky; also return ``G^-1``.

    The system is equilibrated to unit diagonal first, so the pivot threshold
    is relative to the largest (unit) diagonal.
    """
    d = np.sqrt(np.diag(G))
    if np.any(d == 0.0):
        raise RankDeficient("a regressor column is identically zero")
    Gs = G / np.outer(d, d)
    try:
        L = np.linalg.cholesky(Gs)
    except np.linalg.LinAlgError:
        raise RankDeficient("Gram matrix is not positive definite") from None
    pivots = np.diag(L) ** 2
    if pivots.min() < PIVOT_TOL * np.diag(Gs).max():
        raise RankDeficient(f"Cholesky pivot {pivots.min():.3g} below tolerance")
    cf = (L, True)
    b = linalg.cho_solve(cf, rhs / d) / d
    inv = linalg.cho_solve(cf, np.eye(len(d))) / np.outer(d, d)
    return b, inv


def ols(
    y: Sequence[float],
    X: Mapping[str, Sequence[float]],
    intercept: bool = True,
    weights: Sequence[float] | None = None,
) -> RegressionResult:
    """Fit ``y`` on the named columns of ``X``.

    The intercept, when requested, is reported last under the name ``const``.
    With ``weights`` the fit is weighted least squares and R^2 is computed
    around the weighted mean.
    """
    y = np.asarray(y, dtype=float)
    names = list(X)
    n = len(y)
    k = len(names)
    cols = [np.asarray(X[name], dtype=float) for name in names]
    for name, c in zip(names, cols):
        if c.shape != y.shape:
            raise ValueError(f"column {name!r} has length {len(c)}, expected {n}")
    if intercept:
        cols.append(np.ones(n))
        names.append("const")
    p = len(cols)
    if n <= p:
        raise TooFewObservations(f"need more than {p} observations, got {n}")
    A = np.column_stack(cols) if cols else np.empty((n, 0))

    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != y.shape or np.any(w < 0):
        raise ValueError("weights must be nonnegative with one entry per observation")
    sw = np.sqrt(w)
    Aw = A * sw[:, None]
    yw = y * sw

    coef, inv = _spd_solve(Aw.T @ Aw, Aw.T @ yw)
    resid = y - A @ coef
    ssr = float(np.sum(w * resid**2))
    if intercept:
        ybar = np.sum(w * y) / np.sum(w)
        sst = float(np.sum(w * (y - ybar) ** 2))
    else:
        sst = float(np.sum(w * y**2))
    r2 = 1.0 - ssr / sst if sst > 0 else 1.0
    r2 = min(max(r2, 0.0), 1.0)

    df = n - p
    sigma2 = ssr / df
    se = np.sqrt(np.clip(np.diag(inv), 0.0, None) * sigma2)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = coef / se
        t = np.where(se == 0.0, np.where(coef == 0.0, np.nan, np.sign(coef) * np.inf), t)
    if k == 0:
        F = np.nan
    elif r2 == 1.0:
        F = np.inf
    else:
        F = (r2 / k) / ((1.0 - r2) / df)
    dof_total = n - 1 if intercept else n
    r2_adj = 1.0 - (1.0 - r2) * dof_total / df
    return RegressionResult(
        names=tuple(names),
        coef=coef,
        se=se,
        t=t,
        F=float(F),
        r2=float(r2),
        r2_adj=float(r2_adj),
        n=n,
        k=k,
        intercept=intercept,
        residuals=resid,
    )
