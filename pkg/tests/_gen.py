"""Seeded random parameter draws shared by the oracle tests."""

from __future__ import annotations

import numpy as np

from delevcrash.deleverage import price_floor
from delevcrash.model import MarketParams, ShortCap, corner_thresholds, posterior

REGIMES = ("CornerH", "CornerL", "Interior")


def draw_params(rng: np.random.Generator, regime: str, N: float) -> MarketParams:
    """Valid parameters whose signal lands in ``regime`` at cap ``N``, away from the boundaries."""
    tau_L = rng.uniform(0.1, 2.0)
    base = MarketParams(
        mu_x=rng.uniform(-2.0, 4.0),
        tau_x=rng.uniform(0.2, 3.0),
        tau_L=tau_L,
        tau_H=tau_L + rng.uniform(0.1, 3.0),
        lam=rng.uniform(0.05, 0.95),
        a=rng.uniform(0.1, 2.0),
        R=rng.uniform(0.9, 1.2),
        s=0.0,
    )
    s_high, s_low = corner_thresholds(base, ShortCap(N))
    span = s_high - s_low
    if regime == "CornerH":
        s = s_high + rng.uniform(0.01, 1.0) * span
    elif regime == "CornerL":
        s = s_low - rng.uniform(0.01, 1.0) * span
    else:
        s = s_low + rng.uniform(0.01, 0.99) * span
    return base.with_signal(s)


def equilibrium_draws(seed: int, count: int):
    rng = np.random.default_rng(seed)
    for i in range(count):
        N = float(rng.uniform(0.0, 1.0))
        yield draw_params(rng, REGIMES[i % 3], N), ShortCap(N)


def settlement_draws(seed: int, count: int):
    """Draws with a nonnegative price floor; every third case carries a debt large enough to clamp."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        N = float(rng.uniform(0.0, 1.0))
        regime = "CornerH" if rng.uniform() < 0.7 else "Interior"
        p = draw_params(rng, regime, N)
        if price_floor(p, posterior(p)) < 0.0:
            continue
        eta = float(rng.uniform(2.0, 10.0)) if len(out) % 3 == 0 else float(rng.uniform(0.0, 0.6))
        out.append((p, ShortCap(N), eta))
    return out
