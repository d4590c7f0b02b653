"""Side-by-side regression table in the "coef (t)***" layout."""

from __future__ import annotations

from typing import Sequence

from .data import ObservationTable
from .ols import RegressionResult, ols

SPECS: dict[str, tuple[str, ...]] = {
    "factors": ("beta", "smb", "hml"),
    "levshort": ("leverage_ratio", "short_sale_ratio"),
    "all": ("beta", "smb", "hml", "leverage_ratio", "short_sale_ratio"),
}

LABELS = {
    "beta": "beta",
    "smb": "smb",
    "hml": "hml",
    "leverage_ratio": "leverage ratio",
    "short_sale_ratio": "short sale ratio",
    "const": "const",
}


def run_specs(table: ObservationTable, which: Sequence[str] = ("factors", "levshort", "all")) -> list[RegressionResult]:
    out = []
    for name in which:
        if name not in SPECS:
            raise ValueError(f"unknown regression spec {name!r}; choose from {', '.join(SPECS)}")
        out.append(ols(table["log_return"], {c: table[c] for c in SPECS[name]}, intercept=True))
    return out


def format_coef(c: float) -> str:
    # two decimals, or two significant digits for small magnitudes (0.038, -0.079)
    if c != 0.0 and abs(c) < 0.1:
        return f"{c:.2g}"
    return f"{c:.2f}"


def format_cell(coef: float, t: float, st: str) -> str:
    return f"{format_coef(coef)} ({t:.2f}){st}"


def format_table(results: Sequence[RegressionResult], labels: dict[str, str] | None = None) -> str:
    labels = {**LABELS, **(labels or {})}
    order: list[str] = [k for k in LABELS if k != "const"]
    for r in results:
        for name in r.names:
            if name not in order and name != "const":
                order.append(name)
    order.append("const")
    present = [name for name in order if any(name in r.names for r in results)]

    body: list[list[str]] = []
    for name in present:
        row = [labels.get(name, name)]
        for r in results:
            if name in r.names:
                i = r.names.index(name)
                row.append(format_cell(float(r.coef[i]), float(r.t[i]), r.stars()[i]))
            else:
                row.append("")
        body.append(row)
    footer = [
        ["F-Statistics"] + [f"{r.F:.0f}" for r in results],
        ["R2 adjusted"] + [f"{r.r2_adj:.3f}" for r in results],
        ["# of samples"] + [str(r.n) for r in results],
    ]
    widths = [max(len(row[c]) for row in body + footer) for c in range(len(results) + 1)]

    def line(row):
        return " | ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()

    rule = "-+-".join("-" * w for w in widths)
    parts = [line(r) for r in body] + [rule] + [line(r) for r in footer]
    parts.append("Note: *, **, *** denote significance at 10%, 5% and 1% (two-sided t test).")
    return "\n".join(parts) + "\n"
