"""Command-line front end.

Exit codes: 0 ok, 2 invalid input, 3 negative price floor, 4 failed sweep
cells, 5 rank-deficient regression.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from .deleverage import NegativeFloor, NonpositiveP2, ShockParams, settle_deleverage
from .econometrics import (
    SPECS,
    DegenerateNeighborhood,
    RankDeficient,
    SchemaError,
    SmoothSpec,
    TooFewObservations,
    format_table,
    load_observations,
    lowess_surface,
    run_specs,
)
from .model import ParameterError, ShortCap, posterior, solve_equilibrium
from .sweep import Scenario, emit_grid, run_grid

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NEGATIVE_FLOOR = 3
EXIT_FAILED_CELLS = 4
EXIT_RANK = 5


class InputError(Exception):
    pass


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def load_scenario(path: str) -> Scenario:
    raw = _read_bytes(path)
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise InputError(f"{path}: not UTF-8 (byte offset {exc.start})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[: exc.pos].encode("utf-8"))
        raise InputError(f"{path}: JSON parse error at byte offset {offset}: {exc.msg}") from None
    try:
        return Scenario.from_dict(doc)
    except ParameterError as exc:
        raise InputError(f"{path}: {exc}") from None


def _g(v: float) -> str:
    return f"{v:.6g}"


def _write(out: str | None, data: bytes) -> None:
    if out is None or out == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(out).write_bytes(data)


def cmd_solve(args) -> int:
    sc = load_scenario(args.scenario)
    p = sc.params
    try:
        cap = ShortCap(args.cap)
        shock = ShockParams(args.eta)
    except ParameterError as exc:
        raise InputError(str(exc)) from None
    b = posterior(p)
    eq = solve_equilibrium(p, cap)
    out = settle_deleverage(p, b, eq, cap, shock)
    if args.format == "json":
        doc = {
            "eta": shock.eta,
            "N": cap.N,
            "regime": eq.regime.value,
            "P1": eq.P1,
            "h_L": eq.h_L,
            "h_H": eq.h_H,
            "Ps": out.P_s,
            "P_star": out.P_star,
            "gap": out.vacuum_gap,
            "P2": out.P2,
            "log_return": out.log_return,
            "proceeds": out.proceeds,
            "unpaid_debt": out.unpaid_debt,
            "floor": out.floor,
            "clamped": out.floor_clamped,
        }
        _write(args.out, (json.dumps(doc, separators=(",", ":")) + "\n").encode())
        return EXIT_OK
    lines = [
        f"eta          {_g(shock.eta)}",
        f"N            {_g(cap.N)}",
        f"regime       {eq.regime.value}",
        f"P1           {_g(eq.P1)}",
        f"h_L          {_g(eq.h_L)}",
        f"h_H          {_g(eq.h_H)}",
        f"Ps           {_g(out.P_s)}",
        f"gap          {_g(out.vacuum_gap)}",
        f"P2           {_g(out.P2)}",
        f"log_return   {_g(out.log_return)}",
        f"proceeds     {_g(out.proceeds)}",
        f"unpaid_debt  {_g(out.unpaid_debt)}",
        f"floor        {_g(out.floor)}{'  (clamped)' if out.floor_clamped else ''}",
    ]
    _write(args.out, ("\n".join(lines) + "\n").encode())
    return EXIT_OK


def sweep_summary(gr) -> str:
    ok = [c for c in gr.cells if not c.failed]
    lines = [f"cells: {len(gr.cells)} ({len(gr.failures)} failed)"]
    if ok:
        lo = min(ok, key=lambda c: c.log_return)
        hi = max(ok, key=lambda c: c.log_return)
        n_hi = sum(1 for c in ok if abs(c.log_return - hi.log_return) <= 1e-12)
        lines.append(f"min log_return {_g(lo.log_return)} at (eta={_g(lo.eta)}, N={_g(lo.N)})")
        lines.append(
            f"max log_return {_g(hi.log_return)} at (eta={_g(hi.eta)}, N={_g(hi.N)})"
            f" [{n_hi} cell(s) within 1e-12]"
        )
    for c in gr.failures:
        lines.append(f"failed cell (eta={c.eta!r}, N={c.N!r}): {c.error}")
    return "\n".join(lines) + "\n"


def cmd_sweep(args) -> int:
    sc = load_scenario(args.scenario)
    fmt = args.format or "csv"
    gr = run_grid(sc, workers=args.workers)
    _write(args.out, emit_grid(gr, fmt))
    summary = sweep_summary(gr)
    # keep stdout clean when it carries the grid
    (sys.stderr if args.out in (None, "-") else sys.stdout).write(summary)
    return EXIT_FAILED_CELLS if gr.failures else EXIT_OK


def _load_table(path: str):
    try:
        return load_observations(_read_bytes(path))
    except SchemaError as exc:
        raise InputError(f"{path}: {exc}") from None


def cmd_regress(args) -> int:
    table = _load_table(args.data)
    specs = args.spec or ["factors", "levshort", "all"]
    try:
        results = run_specs(table, specs)
    except TooFewObservations as exc:
        raise InputError(str(exc)) from None
    if args.format == "json":
        doc = [{"spec": name, **r.to_dict()} for name, r in zip(specs, results)]
        _write(args.out, (json.dumps(doc, indent=2) + "\n").encode())
    else:
        _write(args.out, format_table(results).encode())
    return EXIT_OK


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 25x25, got {text!r}") from None


def cmd_smooth(args) -> int:
    table = _load_table(args.data)
    try:
        spec = SmoothSpec(span=args.span, grid=args.grid)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateNeighborhood)
        res = lowess_surface(table["leverage_ratio"], table["short_sale_ratio"], table["log_return"], spec)
    for w in caught:
        if issubclass(w.category, DegenerateNeighborhood):
            sys.stderr.write(f"warning: DegenerateNeighborhood: {w.message}\n")
    rows = ["leverage_ratio,short_sale_ratio,log_return_fit,degenerate"]
    for u, v, f, d in res.rows():
        rows.append(f"{u!r},{v!r},{f!r},{'true' if d else 'false'}")
    _write(args.out, ("\n".join(rows) + "\n").encode())
    return EXIT_OK


def cmd_validate(args) -> int:
    if args.scenario is None and args.data is None:
        raise InputError("validate needs --scenario and/or an observation CSV")
    if args.scenario is not None:
        sc = load_scenario(args.scenario)
        print(f"{args.scenario}: ok ({len(sc.eta_grid)} x {len(sc.n_grid)} grid)")
    if args.data is not None:
        table = _load_table(args.data)
        print(f"{args.data}: ok ({table.n} rows)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="delevcrash", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="equilibrium and settlement for one (eta, N)")
    p.add_argument("--scenario", required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--cap", type=float, required=True, help="short cap N")
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="log-return surface over the scenario's (eta, N) grid")
    p.add_argument("--scenario", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("regress", help="OLS of log-returns on factor and leverage/short-sale regressors")
    p.add_argument("data")
    p.add_argument("--spec", action="append", choices=tuple(SPECS))
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--out")
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("smooth", help="local linear surface of log-return over leverage x short-sale ratio")
    p.add_argument("data")
    p.add_argument("--span", type=float, default=0.3)
    p.add_argument("--grid", type=_parse_grid, default=(25, 25))
    p.add_argument("--format", choices=("csv",), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("validate", help="check a scenario file and/or observation CSV; writes nothing")
    p.add_argument("data", nargs="?")
    p.add_argument("--scenario")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    except (NegativeFloor, NonpositiveP2) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_NEGATIVE_FLOOR
    except RankDeficient as exc:
        sys.stderr.write(f"error: RankDeficient: {exc}\n")
        return EXIT_RANK


if __name__ == "__main__":
    sys.exit(main())
