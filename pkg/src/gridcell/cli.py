"""Batch front-end.

``gridcell <command> --config PATH --profiles PATH --seed N --out DIR [--set k=v ...]``

Each command computes its tables in memory and only then writes them, one
file at a time through a temp file and an atomic rename, so a failing run
leaves no partial output.  Floats are written with ``repr`` so reruns are
byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Sequence

from . import __version__
from .config import NetworkConfig, RunSettings, default_profile_path, load_config
from .errors import BudgetExceeded, GridcellError, InfeasibleLoad, ParseError, ValidationError
from .geometry import CoverageInputs, rho_min, success_probability_closed, success_probability_quad
from .montecarlo import SCHEMES, compare_schemes
from .policy import oracle_comparison, run_policy
from .scenario import ErrorModel, load_profiles, run_with_errors
from .state import HorizonProfile

EXIT_OK, EXIT_FAILURE, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_BUDGET = 0, 1, 2, 3, 4

Table = tuple[list[str], list[list]]


def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if v is None:
        return ""
    return str(v)


def render_csv(table: Table) -> str:
    header, rows = table
    lines = [",".join(header)]
    lines += [",".join(_cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def render_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ----------------------------------------------------------------- tables


def table_analyze(cfg: NetworkConfig, settings: RunSettings, profiles: Sequence[HorizonProfile]) -> Table:
    header = ["t", "theta", "lambda_m", "rho", "p_suc_closed", "p_suc_quadrature", "rho_min"]
    rows = []
    for p in profiles:
        lam_m = cfg.lambda_m_all * p.theta
        try:
            rmin = rho_min(cfg, lam_m)
        except InfeasibleLoad as exc:
            raise InfeasibleLoad(str(exc), horizon=p.t) from exc
        for rho in settings.rho_sweep:
            inp = CoverageInputs(rho, lam_m)
            rows.append([p.t, p.theta, lam_m, rho, success_probability_closed(cfg, inp), success_probability_quad(cfg, inp), rmin])
    return header, rows


def table_schedule(cfg: NetworkConfig, settings: RunSettings, profiles: Sequence[HorizonProfile]) -> tuple[Table, dict]:
    sched = run_policy(cfg, profiles, settings.purchase_rule)
    header = ["t", "theta", "rho_star", "E_min", "lambda_e", "price", "B", "G", "B_next"]
    rows = [
        [p.t, p.theta, float(sched.rho[i]), float(sched.demand[i]), float(sched.lambda_e[i]), float(sched.price[i]),
         float(sched.storage[i]), float(sched.g[i]), float(sched.storage[i + 1])]
        for i, p in enumerate(profiles)
    ]
    peak = max(range(sched.T), key=lambda i: (sched.g[i], -i))
    summary = {
        "purchase_rule": settings.purchase_rule,
        "horizons": sched.T,
        "total_cost": sched.total_cost,
        "max_purchase_horizon": profiles[peak].t,
        "max_purchase": float(sched.g[peak]),
    }
    return (header, rows), summary


def table_oracle(cfg: NetworkConfig, settings: RunSettings, profiles: Sequence[HorizonProfile]) -> Table:
    res = oracle_comparison(cfg, profiles, settings.oracle_start, settings.oracle_horizons, settings.grid_step, settings.dp_budget)
    header = ["T", "start", "optimal_cost", "suboptimal_cost", "absolute_gap", "relative_gap", "dp_grid_error", "grid_step"]
    rows = [
        [r.T, settings.oracle_start, r.optimal, r.suboptimal, r.gap, r.relative_gap, r.dp_grid_error, settings.grid_step]
        for r in res
    ]
    return header, rows


def table_errors(cfg: NetworkConfig, settings: RunSettings, profiles: Sequence[HorizonProfile], seed: int, workers: int = 1) -> Table:
    err = ErrorModel(settings.eta, seed)
    header = ["T", "eta", "realizations", "error_free_cost", "mean_cost", "std_cost", "relative_gap"]
    rows = []
    for T in settings.error_horizons:
        if not 1 <= T <= len(profiles):
            raise ValidationError(f"error horizon T={T} outside 1..{len(profiles)}")
        st = run_with_errors(cfg, profiles[:T], err, settings.error_realizations, settings.purchase_rule, workers)
        rows.append([T, settings.eta, settings.error_realizations, st.error_free, st.mean, st.std, st.relative_gap])
    return header, rows


def table_compare(cfg: NetworkConfig, settings: RunSettings, profiles: Sequence[HorizonProfile], seed: int, workers: int = 1) -> Table:
    header = ["lambda_m_all", "realizations"]
    for s in SCHEMES:
        header += [f"{s}_cost", f"{s}_ci95"]
    header.append("proposed_p_suc")
    rows = []
    for lm in settings.lambda_m_all_sweep:
        res = compare_schemes(
            cfg.replace(lambda_m_all=lm), profiles, settings.compare_T, settings.compare_realizations,
            L=settings.cluster_L, seed=seed, start=settings.compare_start, window=settings.window,
            sinr_mts=settings.compare_sinr_mts, budget=settings.compare_budget, workers=workers,
        )
        row: list = [lm, settings.compare_realizations]
        for s in SCHEMES:
            row += [res[s].total_cost, res[s].ci_half]
        row.append(res["proposed"].empirical_p_suc)
        rows.append(row)
    return header, rows


# -------------------------------------------------------------------- CLI


def _overrides(items: Sequence[str]) -> dict[str, str]:
    out: dict[str, str] = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ParseError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gridcell", description="BS on/off and energy-purchase scheduling for cellular microgrids.")
    ap.add_argument("--version", action="version", version=f"gridcell {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("analyze", "success probability and rho_min sweeps"),
        ("schedule", "on/off and purchase schedule over the profile"),
        ("oracle", "suboptimal rule against the DP optimum"),
        ("errors", "cost under renewable prediction errors"),
        ("compare", "proposed scheme against two reference schemes"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", type=Path, default=None, help="config file (default: shipped defaults)")
        p.add_argument("--profiles", type=Path, default=None, help="profile CSV/JSON (default: shipped 24 h profile)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", type=Path, required=True, help="output directory")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE")
        p.add_argument("--workers", type=int, default=1, help="processes for Monte-Carlo commands")
    return ap


def _run(args) -> dict[str, str]:
    cfg, settings = load_config(args.config, _overrides(args.overrides))
    profiles = load_profiles(args.profiles if args.profiles is not None else default_profile_path())
    cmd = args.command
    files: dict[str, str] = {}
    if cmd == "analyze":
        files["analyze.csv"] = render_csv(table_analyze(cfg, settings, profiles))
    elif cmd == "schedule":
        table, summary = table_schedule(cfg, settings, profiles)
        files["schedule.csv"] = render_csv(table)
        files["schedule.json"] = render_json(summary)
    elif cmd == "oracle":
        files["oracle.csv"] = render_csv(table_oracle(cfg, settings, profiles))
    elif cmd == "errors":
        files["errors.csv"] = render_csv(table_errors(cfg, settings, profiles, args.seed, args.workers))
    elif cmd == "compare":
        files["compare.csv"] = render_csv(table_compare(cfg, settings, profiles, args.seed, args.workers))
    manifest = {
        "command": cmd,
        "config_path": str(args.config) if args.config else None,
        "profile_path": str(args.profiles) if args.profiles else None,
        "seed": args.seed,
        "overrides": _overrides(args.overrides),
        "version": __version__,
    }
    files[f"{cmd}.manifest.json"] = render_json(manifest)
    return files


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        files = _run(args)
        for name in sorted(files):
            atomic_write(args.out / name, files[name])
    except (ParseError, ValidationError, ValueError, FileNotFoundError) as exc:
        code, msg = EXIT_INPUT, exc
    except InfeasibleLoad as exc:
        code, msg = EXIT_INFEASIBLE, exc
    except BudgetExceeded as exc:
        code, msg = EXIT_BUDGET, exc
    except (GridcellError, OSError) as exc:
        code, msg = EXIT_FAILURE, exc
    else:
        return EXIT_OK
    print(f"gridcell {args.command}: {type(msg).__name__}: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
