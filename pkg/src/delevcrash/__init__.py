"""Deleveraging crashes under short-sale caps: equilibrium, settlement, sweeps and econometrics."""

from .deleverage import (
    DeleverageOutcome,
    NegativeFloor,
    NonpositiveP2,
    ShockParams,
    oracle_settle,
    price_floor,
    settle_deleverage,
    threshold_price,
    vacuum_gap,
)
from .model import (
    BASELINE_PARAMS,
    BracketError,
    Equilibrium,
    MarketParams,
    ParameterError,
    PosteriorBeliefs,
    Regime,
    ShortCap,
    corner_prices,
    corner_thresholds,
    oracle_equilibrium,
    posterior,
    solve_equilibrium,
    unconstrained_demand,
    validate_params,
)
from .sweep import Scenario, emit_grid, find_gap_closing_N, run_grid

__version__ = "0.1.0"
