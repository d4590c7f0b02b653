"""Two-type heterogeneous-beliefs market with a cap on short positions.

Investors agree on the prior of the payoff ``x ~ N(mu_x, 1/tau_x)`` but
disagree on the precision of the public signal ``s = x + eps``. L investors
believe the precision is ``tau_L``, H investors believe ``tau_H > tau_L``.
Both have mean-variance (CARA-normal) preferences with risk aversion ``a``.
Supply is one share.

Holdings are kept in aggregate form, ``h_L = lambda * y_L`` and
``h_H = (1 - lambda) * y_H``, because both the short cap and the clearing
condition are aggregate statements. So ``lambda`` is the population weight of
the L group in every aggregate expression and ``1 - lambda`` that of H.
"""

from __future__ import annotations

import enum
import math
import sys
from dataclasses import dataclass
from typing import Literal

from scipy import optimize

__all__ = [
    "BracketError",
    "Equilibrium",
    "MarketParams",
    "ParameterError",
    "PosteriorBeliefs",
    "Regime",
    "ShortCap",
    "BASELINE_PARAMS",
    "corner_prices",
    "belief_gap",
    "corner_thresholds",
    "interior_price",
    "oracle_equilibrium",
    "posterior",
    "solve_equilibrium",
    "unconstrained_demand",
    "validate_params",
]

PARAM_FIELDS = ("mu_x", "tau_x", "tau_L", "tau_H", "lambda", "a", "R", "s")


class ParameterError(ValueError):
    """A model parameter violates its admissible range."""


class BracketError(RuntimeError):
    """The bisection bracket does not contain a sign change."""


@dataclass(frozen=True)
class MarketParams:
    mu_x: float
    tau_x: float
    tau_L: float
    tau_H: float
    lam: float
    a: float
    R: float
    s: float

    @classmethod
    def from_dict(cls, d: dict) -> MarketParams:
        """Build from the canonical JSON object (``lambda`` spelled out)."""
        missing = [k for k in PARAM_FIELDS if k not in d]
        if missing:
            raise ParameterError(f"missing parameter field(s): {', '.join(missing)}")
        extra = sorted(set(d) - set(PARAM_FIELDS))
        if extra:
            raise ParameterError(f"unknown parameter field(s): {', '.join(extra)}")
        vals = {}
        for k in PARAM_FIELDS:
            v = d[k]
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ParameterError(f"{k} must be a number, got {v!r}")
            vals["lam" if k == "lambda" else k] = float(v)
        return cls(**vals)

    def to_dict(self) -> dict:
        return {
            "mu_x": self.mu_x,
            "tau_x": self.tau_x,
            "tau_L": self.tau_L,
            "tau_H": self.tau_H,
            "lambda": self.lam,
            "a": self.a,
            "R": self.R,
            "s": self.s,
        }

    def with_signal(self, s: float) -> MarketParams:
        return MarketParams(self.mu_x, self.tau_x, self.tau_L, self.tau_H, self.lam, self.a, self.R, s)


#: Baseline parameter set used by the shipped scenario and golden grid.
BASELINE_PARAMS = MarketParams(mu_x=1.5, tau_x=1.0, tau_L=0.5, tau_H=1.5, lam=0.5, a=0.5, R=1.05, s=5.0)


@dataclass(frozen=True)
class PosteriorBeliefs:
    tau_hat_L: float
    tau_hat_H: float
    mu_hat_L: float
    mu_hat_H: float

    def tau_hat(self, kind: Literal["L", "H"]) -> float:
        return self.tau_hat_L if kind == "L" else self.tau_hat_H

    def mu_hat(self, kind: Literal["L", "H"]) -> float:
        return self.mu_hat_L if kind == "L" else self.mu_hat_H


@dataclass(frozen=True)
class ShortCap:
    """Largest aggregate short position (in shares) either group may hold."""

    N: float

    def __post_init__(self):
        if not (self.N >= 0.0) or math.isinf(self.N):
            raise ParameterError(f"N must satisfy 0 <= N < inf, got {self.N!r}")


class Regime(str, enum.Enum):
    CORNER_H = "CornerH"
    CORNER_L = "CornerL"
    INTERIOR = "Interior"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Equilibrium:
    regime: Regime
    P1: float
    h_L: float
    h_H: float

    def per_capita(self, lam: float) -> tuple[float, float]:
        """Per-capita holdings ``(y_L, y_H)``."""
        return self.h_L / lam, self.h_H / (1.0 - lam)


def _finite(name: str, v: float) -> None:
    if not math.isfinite(v):
        raise ParameterError(f"{name} must be finite, got {v!r}")


def validate_params(p: MarketParams) -> MarketParams:
    """Return ``p`` unchanged, or raise ``ParameterError`` naming the first violation."""
    for name in ("mu_x", "tau_x", "tau_L", "tau_H", "lam", "a", "R", "s"):
        _finite("lambda" if name == "lam" else name, getattr(p, name))
    if not p.tau_x > 0:
        raise ParameterError("tau_x must satisfy tau_x > 0")
    if not p.tau_L > 0:
        raise ParameterError("tau_L must satisfy 0 < tau_L < tau_H (tau_L > 0 violated)")
    if not p.tau_L < p.tau_H:
        raise ParameterError("tau_L must satisfy 0 < tau_L < tau_H (tau_L < tau_H violated)")
    if not 0.0 < p.lam < 1.0:
        raise ParameterError("lambda must lie in open interval (0,1)")
    if not p.a > 0:
        raise ParameterError("a must satisfy a > 0")
    if not p.R > 0:
        raise ParameterError("R must satisfy R > 0")
    return p


def posterior(p: MarketParams) -> PosteriorBeliefs:
    th_L = p.tau_x + p.tau_L
    th_H = p.tau_x + p.tau_H
    return PosteriorBeliefs(
        tau_hat_L=th_L,
        tau_hat_H=th_H,
        mu_hat_L=(p.tau_x * p.mu_x + p.tau_L * p.s) / th_L,
        mu_hat_H=(p.tau_x * p.mu_x + p.tau_H * p.s) / th_H,
    )


def unconstrained_demand(b: PosteriorBeliefs, kind: Literal["L", "H"], P: float, a: float, R: float) -> float:
    """Per-capita mean-variance demand of type ``kind`` at price ``P``."""
    return (b.mu_hat(kind) - R * P) * b.tau_hat(kind) / a


def corner_prices(p: MarketParams, b: PosteriorBeliefs, cap: ShortCap) -> tuple[float, float]:
    """Prices ``(P_H, P_L)`` at which one group alone holds ``1 + N`` shares."""
    P_H = (b.mu_hat_H - p.a * (1.0 + cap.N) / ((1.0 - p.lam) * b.tau_hat_H)) / p.R
    P_L = (b.mu_hat_L - p.a * (1.0 + cap.N) / (p.lam * b.tau_hat_L)) / p.R
    return P_H, P_L


def corner_thresholds(p: MarketParams, cap: ShortCap) -> tuple[float, float]:
    """Signal bounds ``(s_high, s_low)`` outside which a short constraint binds.

    ``s > s_high`` puts L investors at the cap (CornerH); ``s < s_low`` puts
    H investors there (CornerL).
    """
    N = cap.N
    th_L = p.tau_x + p.tau_L
    th_H = p.tau_x + p.tau_H
    k = (p.tau_H - p.tau_L) * p.tau_x
    s_high = p.mu_x + p.a * (1.0 + N) * th_L / ((1.0 - p.lam) * k) + p.a * N * th_H / (p.lam * k)
    s_low = p.mu_x - p.a * (1.0 + N) * th_H / (p.lam * k) - p.a * N * th_L / ((1.0 - p.lam) * k)
    return s_high, s_low


def belief_gap(p: MarketParams) -> float:
    """``mu_hat_H - mu_hat_L`` written directly in terms of the signal surprise."""
    th_L = p.tau_x + p.tau_L
    th_H = p.tau_x + p.tau_H
    return p.tau_x * (p.tau_H - p.tau_L) * (p.s - p.mu_x) / (th_H * th_L)


def interior_price(p: MarketParams, b: PosteriorBeliefs) -> float:
    wL = p.lam * b.tau_hat_L
    wH = (1.0 - p.lam) * b.tau_hat_H
    return (wL * b.mu_hat_L + wH * b.mu_hat_H - p.a) / (p.R * (wL + wH))


def solve_equilibrium(p: MarketParams, cap: ShortCap) -> Equilibrium:
    """Closed-form time-1 equilibrium.

    Boundary ties (``s`` exactly on a threshold) are classified as Interior;
    the interior price coincides with the corner price there.
    """
    b = posterior(p)
    s_high, s_low = corner_thresholds(p, cap)
    if p.s > s_high:
        P_H, _ = corner_prices(p, b, cap)
        return Equilibrium(Regime.CORNER_H, P_H, 0.0 - cap.N, 1.0 + cap.N)
    if p.s < s_low:
        _, P_L = corner_prices(p, b, cap)
        return Equilibrium(Regime.CORNER_L, P_L, 1.0 + cap.N, 0.0 - cap.N)
    P1 = interior_price(p, b)
    h_L = p.lam * unconstrained_demand(b, "L", P1, p.a, p.R)
    # clearing holds by construction
    return Equilibrium(Regime.INTERIOR, P1, h_L, 1.0 - h_L)


def _classify(h_L: float, h_H: float, N: float, tol: float) -> Regime:
    if h_L <= -N + tol and h_H > -N + tol:
        return Regime.CORNER_H
    if h_H <= -N + tol and h_L > -N + tol:
        return Regime.CORNER_L
    return Regime.INTERIOR


def oracle_equilibrium(p: MarketParams, cap: ShortCap) -> Equilibrium:
    """Clearing price by bisection on clamped aggregate excess demand.

    Independent of the closed-form regime logic: each group's aggregate demand
    is floored at ``-N`` and the root of total demand minus supply is found
    numerically. The regime label is read off which constraint binds.
    """
    b = posterior(p)
    N = cap.N

    def agg(kind: Literal["L", "H"], P: float) -> float:
        w = p.lam if kind == "L" else 1.0 - p.lam
        return max(w * unconstrained_demand(b, kind, P, p.a, p.R), -N)

    def excess(P: float) -> float:
        return agg("L", P) + agg("H", P) - 1.0

    P_H, P_L = corner_prices(p, b, cap)
    width = p.a / min(p.lam * b.tau_hat_L, (1.0 - p.lam) * b.tau_hat_H)
    lo = min(P_L, P_H) - 10.0 * width
    hi = max(b.mu_hat_L, b.mu_hat_H) / p.R + 10.0 * width
    f_lo, f_hi = excess(lo), excess(hi)
    if not (f_lo > 0.0 > f_hi):
        raise BracketError(f"excess demand does not change sign on [{lo!r}, {hi!r}]: {f_lo!r}, {f_hi!r}")
    P1 = optimize.bisect(excess, lo, hi, xtol=1e-15, rtol=4 * sys.float_info.epsilon, maxiter=400)
    h_L, h_H = agg("L", P1), agg("H", P1)
    # distribute the residual so the reported holdings clear exactly
    if h_L > -N:
        h_L = 1.0 - h_H
    else:
        h_H = 1.0 - h_L
    slope = (p.lam * b.tau_hat_L + (1.0 - p.lam) * b.tau_hat_H) * p.R / p.a
    tol = max(1e-12, 1e-9 * slope * max(1.0, abs(P1)))
    return Equilibrium(_classify(h_L, h_H, N, tol), P1, h_L, h_H)
