"""Time-2 deleveraging shock: free fall through the liquidity vacuum, then
liquidation along the L investors' demand schedule.

H investors owe ``eta * P1``. After the shock nobody buys until the price
reaches ``P* = min(P1, P_s)``; below ``P*`` the L group absorbs shares at
the rate given by its linear demand, so selling from ``P*`` down to ``P2``
raises ``(lam * tau_hat_L * R / (2a)) * (P*^2 - P2^2)``. The price cannot go
below the level where L holds the entire share, at which point H has sold
everything and the rest of the debt is left unpaid.

The public signal is held fixed throughout settlement.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .model import Equilibrium, MarketParams, ParameterError, PosteriorBeliefs, ShortCap

__all__ = [
    "DeleverageOutcome",
    "NegativeFloor",
    "NonpositiveP2",
    "ShockParams",
    "oracle_settle",
    "price_floor",
    "settle_deleverage",
    "threshold_price",
    "vacuum_gap",
]


class NegativeFloor(ValueError):
    """The price floor is negative, so the square-root settlement is undefined."""

    def __init__(self, floor: float):
        super().__init__(f"price floor is negative ({floor!r}); reparameterize so that mu_hat_L >= a/(lambda*tau_hat_L)")
        self.floor = floor


class NonpositiveP2(ArithmeticError):
    """Settlement produced a non-positive price."""


@dataclass(frozen=True)
class ShockParams:
    eta: float

    def __post_init__(self):
        if not (self.eta >= 0.0) or math.isinf(self.eta):
            raise ParameterError(f"eta must satisfy 0 <= eta < inf, got {self.eta!r}")


@dataclass(frozen=True)
class DeleverageOutcome:
    P_s: float
    P_star: float
    vacuum_gap: float
    P2: float
    proceeds: float
    unpaid_debt: float
    floor_clamped: bool
    log_return: float
    floor: float


def threshold_price(p: MarketParams, b: PosteriorBeliefs, cap: ShortCap, R_used: float | None = None) -> float:
    """Highest price at which L investors start buying back (their aggregate demand is ``-N``).

    ``R_used=1`` gives the zero-interest variant.
    """
    R = p.R if R_used is None else R_used
    if not R > 0:
        raise ParameterError("R_used must satisfy R_used > 0")
    return (b.mu_hat_L + p.a * cap.N / (p.lam * b.tau_hat_L)) / R


def vacuum_gap(eq: Equilibrium, P_s: float) -> float:
    return max(eq.P1 - P_s, 0.0)


def price_floor(p: MarketParams, b: PosteriorBeliefs) -> float:
    """Price at which aggregate L demand equals the whole supply."""
    return (b.mu_hat_L - p.a / (p.lam * b.tau_hat_L)) / p.R


def _liquidation_rate(p: MarketParams, b: PosteriorBeliefs) -> float:
    # shares absorbed by L per unit price decline
    return p.lam * b.tau_hat_L * p.R / p.a


def _outcome(P_s, P_star, P1, P2, proceeds, debt, clamped, floor) -> DeleverageOutcome:
    if not P2 > 0.0:
        raise NonpositiveP2(f"settled price {P2!r} is not positive")
    return DeleverageOutcome(
        P_s=P_s,
        P_star=P_star,
        vacuum_gap=max(P1 - P_s, 0.0),
        P2=P2,
        proceeds=proceeds,
        unpaid_debt=debt - proceeds,
        floor_clamped=clamped,
        log_return=math.log(P2) - math.log(P1),
        floor=floor,
    )


def settle_deleverage(
    p: MarketParams, b: PosteriorBeliefs, eq: Equilibrium, cap: ShortCap, shock: ShockParams
) -> DeleverageOutcome:
    """Closed-form settlement price after the shock.

    Maximum proceeds at the floor are computed first and the square root is
    only taken when the debt can be covered. If ``P*`` is already at or below
    the floor (H holds nothing to sell), the price stays at ``P*`` and any debt
    is unpaid.
    """
    floor = price_floor(p, b)
    if floor < 0.0:
        raise NegativeFloor(floor)
    P_s = threshold_price(p, b, cap)
    P_star = min(eq.P1, P_s)
    lowest = min(floor, P_star)
    debt = shock.eta * eq.P1
    rate = _liquidation_rate(p, b)
    max_proceeds = 0.5 * rate * (P_star * P_star - lowest * lowest)

    if debt == 0.0:
        return _outcome(P_s, P_star, eq.P1, P_star, 0.0, debt, False, floor)
    if debt <= max_proceeds:
        P2_sq = P_star * P_star - 2.0 * debt / rate
        if not P2_sq > 0.0:
            raise NonpositiveP2(f"P2^2 = {P2_sq!r}")
        return _outcome(P_s, P_star, eq.P1, math.sqrt(P2_sq), debt, debt, False, floor)
    return _outcome(P_s, P_star, eq.P1, lowest, max_proceeds, debt, True, floor)


def _proceeds_quad(rate: float, lower: float, upper: float, panels: int) -> float:
    # value received while L buys along its demand schedule from upper down to lower
    if upper <= lower:
        return 0.0
    P = np.linspace(lower, upper, panels + 1)
    return float(np.trapezoid(P * rate, P))


def oracle_settle(
    p: MarketParams,
    b: PosteriorBeliefs,
    eq: Equilibrium,
    cap: ShortCap,
    shock: ShockParams,
    panels: int = 10_000,
) -> DeleverageOutcome:
    """Settlement by trapezoid quadrature of liquidation proceeds plus bisection on ``P2``."""
    floor = price_floor(p, b)
    if floor < 0.0:
        raise NegativeFloor(floor)
    rate = p.lam * b.tau_hat_L * p.R / p.a
    P_s = (b.mu_hat_L + p.a * cap.N / (p.lam * b.tau_hat_L)) / p.R
    P_star = min(eq.P1, P_s)
    lowest = min(floor, P_star)
    debt = shock.eta * eq.P1
    full = _proceeds_quad(rate, lowest, P_star, panels)

    if debt == 0.0:
        return _outcome(P_s, P_star, eq.P1, P_star, 0.0, debt, False, floor)
    if debt > full:
        return _outcome(P_s, P_star, eq.P1, lowest, full, debt, True, floor)

    def shortfall(P2: float) -> float:
        return _proceeds_quad(rate, P2, P_star, panels) - debt

    P2 = optimize.bisect(shortfall, lowest, P_star, xtol=1e-14, rtol=4 * sys.float_info.epsilon, maxiter=200)
    return _outcome(P_s, P_star, eq.P1, P2, debt, debt, False, floor)
