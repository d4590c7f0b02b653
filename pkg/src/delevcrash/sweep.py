"""Grid experiments over leverage ``eta`` and short cap ``N``.

Every cell is an independent pure computation (posterior, time-1 equilibrium,
threshold price, settlement). Cells may be evaluated concurrently; results are
always assembled in eta-major, then N, order so the emitted bytes do not depend
on evaluation order.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .deleverage import NegativeFloor, ShockParams, settle_deleverage, threshold_price
from .model import (
    MarketParams,
    ParameterError,
    ShortCap,
    corner_prices,
    posterior,
    solve_equilibrium,
    validate_params,
)

__all__ = [
    "CSV_COLUMNS",
    "Cell",
    "GridResult",
    "Marginal",
    "NotBullish",
    "Scenario",
    "bisect_gap_closing_N",
    "default_eta_grid",
    "default_n_grid",
    "emit_grid",
    "find_gap_closing_N",
    "grid_from_json",
    "run_grid",
]

CSV_COLUMNS = ("eta", "N", "regime", "P1", "Ps", "Ps0", "gap", "P2", "log_return", "clamped")


class NotBullish(ValueError):
    """The signal does not exceed the prior mean."""


def _clean_grid(lo: float, hi: float, n: int) -> list[float]:
    # rounding keeps nodes such as 0.5 exact
    return [float(v) for v in np.round(np.linspace(lo, hi, n), 12)]


def default_eta_grid(n: int = 41) -> list[float]:
    return _clean_grid(0.0, 0.4, n)


def default_n_grid(n: int = 61) -> list[float]:
    return _clean_grid(0.0, 0.6, n)


def _check_grid(name: str, g) -> list[float]:
    if not isinstance(g, (list, tuple)) or len(g) == 0:
        raise ParameterError(f"{name} must be a nonempty list")
    out = []
    for v in g:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ParameterError(f"{name} entries must be finite numbers, got {v!r}")
        if v < 0:
            raise ParameterError(f"{name} entries must be >= 0, got {v!r}")
        out.append(float(v))
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ParameterError(f"{name} must be strictly increasing")
    return out


@dataclass(frozen=True)
class Scenario:
    params: MarketParams
    eta_grid: tuple[float, ...] = field(default_factory=lambda: tuple(default_eta_grid()))
    n_grid: tuple[float, ...] = field(default_factory=lambda: tuple(default_n_grid()))
    emit_zero_rate_threshold: bool = True

    def __post_init__(self):
        validate_params(self.params)
        object.__setattr__(self, "eta_grid", tuple(_check_grid("eta_grid", list(self.eta_grid))))
        object.__setattr__(self, "n_grid", tuple(_check_grid("n_grid", list(self.n_grid))))

    @classmethod
    def from_dict(cls, d: dict) -> Scenario:
        if not isinstance(d, dict):
            raise ParameterError("scenario must be a JSON object")
        if "params" not in d:
            raise ParameterError("scenario is missing 'params'")
        unknown = sorted(set(d) - {"params", "eta_grid", "n_grid", "emit_zero_rate_threshold"})
        if unknown:
            raise ParameterError(f"unknown scenario field(s): {', '.join(unknown)}")
        if not isinstance(d["params"], dict):
            raise ParameterError("'params' must be a JSON object")
        kw = {"params": MarketParams.from_dict(d["params"])}
        if "eta_grid" in d:
            kw["eta_grid"] = _check_grid("eta_grid", d["eta_grid"])
        if "n_grid" in d:
            kw["n_grid"] = _check_grid("n_grid", d["n_grid"])
        if "emit_zero_rate_threshold" in d:
            flag = d["emit_zero_rate_threshold"]
            if not isinstance(flag, bool):
                raise ParameterError("emit_zero_rate_threshold must be a boolean")
            kw["emit_zero_rate_threshold"] = flag
        return cls(**kw)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "eta_grid": list(self.eta_grid),
            "n_grid": list(self.n_grid),
            "emit_zero_rate_threshold": self.emit_zero_rate_threshold,
        }


@dataclass(frozen=True)
class Cell:
    eta: float
    N: float
    regime: str
    P1: float
    Ps: float
    Ps0: float | None
    gap: float
    P2: float | None
    log_return: float | None
    clamped: bool | None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass(frozen=True)
class Marginal:
    N: float
    regime: str
    P1: float
    Ps: float
    Ps0: float | None


@dataclass(frozen=True)
class GridResult:
    params: MarketParams
    eta_grid: tuple[float, ...]
    n_grid: tuple[float, ...]
    cells: tuple[Cell, ...]
    marginals: tuple[Marginal, ...]

    @property
    def failures(self) -> list[Cell]:
        return [c for c in self.cells if c.failed]

    def cell(self, i: int, j: int) -> Cell:
        return self.cells[i * len(self.n_grid) + j]

    def surface(self) -> np.ndarray:
        """Log-return as a ``(len(eta_grid), len(n_grid))`` array, NaN where a cell failed."""
        vals = [math.nan if c.log_return is None else c.log_return for c in self.cells]
        return np.array(vals, dtype=float).reshape(len(self.eta_grid), len(self.n_grid))


def _evaluate_marginal(p: MarketParams, N: float, zero_rate: bool) -> Marginal:
    cap = ShortCap(N)
    b = posterior(p)
    eq = solve_equilibrium(p, cap)
    Ps0 = threshold_price(p, b, cap, R_used=1.0) if zero_rate else None
    return Marginal(N, eq.regime.value, eq.P1, threshold_price(p, b, cap), Ps0)


def evaluate_cell(p: MarketParams, eta: float, N: float, zero_rate: bool) -> Cell:
    cap = ShortCap(N)
    b = posterior(p)
    eq = solve_equilibrium(p, cap)
    Ps = threshold_price(p, b, cap)
    Ps0 = threshold_price(p, b, cap, R_used=1.0) if zero_rate else None
    gap = max(eq.P1 - Ps, 0.0)
    try:
        out = settle_deleverage(p, b, eq, cap, ShockParams(eta))
    except NegativeFloor as exc:
        return Cell(eta, N, eq.regime.value, eq.P1, Ps, Ps0, gap, None, None, None, error=f"NegativeFloor: {exc}")
    return Cell(eta, N, eq.regime.value, eq.P1, Ps, Ps0, gap, out.P2, out.log_return, out.floor_clamped)


def run_grid(sc: Scenario, workers: int = 1) -> GridResult:
    """Evaluate every ``(eta, N)`` cell; failed cells carry their error instead of aborting."""
    p = sc.params
    coords = [(eta, N) for eta in sc.eta_grid for N in sc.n_grid]
    zr = sc.emit_zero_rate_threshold
    if workers <= 1:
        cells = [evaluate_cell(p, eta, N, zr) for eta, N in coords]
    else:
        slots: list[Cell | None] = [None] * len(coords)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futs = {pool.submit(evaluate_cell, p, eta, N, zr): k for k, (eta, N) in enumerate(coords)}
            for fut in as_completed(futs):
                slots[futs[fut]] = fut.result()
        cells = slots  # type: ignore[assignment]
    marginals = tuple(_evaluate_marginal(p, N, zr) for N in sc.n_grid)
    return GridResult(p, sc.eta_grid, sc.n_grid, tuple(cells), marginals)


def find_gap_closing_N(p: MarketParams) -> float:
    """Short cap at which the time-1 price meets the L re-entry threshold.

    The CornerH boundary ``s = s_high(N)`` is affine in ``N``, so the crossing
    is solved exactly. Returns ``math.inf`` when there is no nonnegative
    solution, i.e. the market is not in the CornerH regime even at ``N = 0``
    and no liquidity vacuum arises for any cap.
    """
    validate_params(p)
    if not p.s > p.mu_x:
        raise NotBullish(f"s must exceed mu_x for a gap-closing cap (s={p.s!r}, mu_x={p.mu_x!r})")
    th_L = p.tau_x + p.tau_L
    th_H = p.tau_x + p.tau_H
    k = (p.tau_H - p.tau_L) * p.tau_x
    c0 = p.a * th_L / ((1.0 - p.lam) * k)
    c1 = c0 + p.a * th_H / (p.lam * k)
    N_star = (p.s - p.mu_x - c0) / c1
    return N_star if N_star >= 0.0 else math.inf


def bisect_gap_closing_N(p: MarketParams, xtol: float = 1e-14) -> float:
    """Root of ``P_H(N) - P_s(N)`` by bisection (independent check on the affine solve)."""
    validate_params(p)
    if not p.s > p.mu_x:
        raise NotBullish(f"s must exceed mu_x (s={p.s!r}, mu_x={p.mu_x!r})")
    b = posterior(p)

    def diff(N: float) -> float:
        cap = ShortCap(N)
        P_H, _ = corner_prices(p, b, cap)
        return P_H - threshold_price(p, b, cap)

    if diff(0.0) < 0.0:
        return math.inf
    hi = 1.0
    while diff(hi) > 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise RuntimeError("gap does not close for any finite cap")
    return optimize.bisect(diff, 0.0, hi, xtol=xtol, maxiter=500)


def _num(v: float | None) -> str:
    return "" if v is None else repr(float(v))


def _cell_record(c: Cell) -> dict:
    return {
        "eta": c.eta,
        "N": c.N,
        "regime": c.regime,
        "P1": c.P1,
        "Ps": c.Ps,
        "Ps0": c.Ps0,
        "gap": c.gap,
        "P2": c.P2,
        "log_return": c.log_return,
        "clamped": c.clamped,
        "error": c.error,
    }


def emit_grid(gr: GridResult, fmt: str = "csv") -> bytes:
    """Serialize a grid.

    CSV carries the cell table only. JSON additionally carries the inputs and
    the per-N time-1 marginals; absent values are ``null`` there and empty in
    CSV.
    """
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for c in gr.cells:
            clamped = "" if c.clamped is None else ("true" if c.clamped else "false")
            w.writerow(
                [_num(c.eta), _num(c.N), c.regime, _num(c.P1), _num(c.Ps), _num(c.Ps0),
                 _num(c.gap), _num(c.P2), _num(c.log_return), clamped]
            )
        return buf.getvalue().encode("utf-8")
    if fmt == "json":
        doc = {
            "params": gr.params.to_dict(),
            "eta_grid": list(gr.eta_grid),
            "n_grid": list(gr.n_grid),
            "cells": [_cell_record(c) for c in gr.cells],
            "marginals": [
                {"N": m.N, "regime": m.regime, "P1": m.P1, "Ps": m.Ps, "Ps0": m.Ps0} for m in gr.marginals
            ],
        }
        return (json.dumps(doc, separators=(",", ":"), allow_nan=False) + "\n").encode("utf-8")
    raise ValueError(f"unknown grid format {fmt!r}; expected 'csv' or 'json'")


def grid_from_json(data: bytes | str) -> GridResult:
    doc = json.loads(data)
    cells = tuple(Cell(**rec) for rec in doc["cells"])
    marginals = tuple(Marginal(**rec) for rec in doc["marginals"])
    return GridResult(
        MarketParams.from_dict(doc["params"]),
        tuple(doc["eta_grid"]),
        tuple(doc["n_grid"]),
        cells,
        marginals,
    )
