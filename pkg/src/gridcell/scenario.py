"""Profile files and renewable prediction-error studies.

Profiles are CSV with header ``t,theta,lambda_e,price`` (``#`` lines carry
units and are skipped); a JSON list of the same records is also accepted.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import NetworkConfig
from .errors import ParseError, ValidationError
from .policy import horizon_inputs, simulate_purchases
from .state import HorizonInputs, HorizonProfile

PROFILE_FIELDS = ("t", "theta", "lambda_e", "price")


@dataclass(frozen=True)
class ErrorModel:
    """I.i.d. zero-mean Gaussian error on the forecast renewable rate."""

    eta: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not (self.eta >= 0 and math.isfinite(self.eta)):
            raise ValidationError(f"eta must be a finite value >= 0, got {self.eta}")

    def rng(self, realization: int) -> np.random.Generator:
        """Generator for one realization, derived from (seed, index) only."""
        return np.random.default_rng(np.random.SeedSequence([self.seed, realization]))


def _check_sequence(profiles: list[HorizonProfile]) -> list[HorizonProfile]:
    if not profiles:
        raise ParseError("profile file holds no horizons")
    seen: set[int] = set()
    for p in profiles:
        if p.t in seen:
            raise ValidationError(f"duplicate horizon t={p.t}")
        seen.add(p.t)
    ordered = sorted(profiles, key=lambda p: p.t)
    for k, p in enumerate(ordered, start=1):
        if p.t != k:
            raise ValidationError(f"horizons must run 1..T without gaps; expected t={k}, got t={p.t}")
    return ordered


def _record(values: dict, where: str, line: int | None) -> HorizonProfile:
    try:
        t_raw = float(values["t"])
        if t_raw != int(t_raw):
            raise ValueError("t must be an integer")
        return HorizonProfile(
            t=int(t_raw),
            theta=float(values["theta"]),
            lambda_e=float(values["lambda_e"]),
            price=float(values["price"]),
        )
    except ValidationError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad profile record in {where}: {exc}", line=line) from exc


def parse_profiles_csv(text: str, where: str = "<string>") -> list[HorizonProfile]:
    lines = text.splitlines()
    header_at = None
    for i, line in enumerate(lines):
        if line.strip() and not line.lstrip().startswith("#"):
            header_at = i
            break
    if header_at is None:
        raise ParseError(f"{where}: no header line", line=1)
    header = [h.strip() for h in lines[header_at].split(",")]
    if tuple(header) != PROFILE_FIELDS:
        raise ParseError(f"{where}: header must be {','.join(PROFILE_FIELDS)}", line=header_at + 1)
    out = []
    for i in range(header_at + 1, len(lines)):
        line = lines[i]
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cells = next(csv.reader(io.StringIO(line)))
        if len(cells) != len(PROFILE_FIELDS):
            raise ParseError(f"{where}: expected {len(PROFILE_FIELDS)} fields, got {len(cells)}", line=i + 1)
        try:
            out.append(_record(dict(zip(PROFILE_FIELDS, cells)), where, i + 1))
        except ValidationError as exc:
            raise ValidationError(f"{where} line {i + 1}: {exc}") from exc
    return _check_sequence(out)


def parse_profiles_json(text: str, where: str = "<string>") -> list[HorizonProfile]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{where}: {exc.msg}", line=exc.lineno) from exc
    if isinstance(data, dict):
        data = data.get("profiles")
    if not isinstance(data, list):
        raise ParseError(f"{where}: expected a list of profile records")
    return _check_sequence([_record(r if isinstance(r, dict) else {}, where, None) for r in data])


def load_profiles(source: str | Path) -> list[HorizonProfile]:
    """Read and validate a profile file, ordered by t."""
    path = Path(source)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read profiles {path}: {exc.strerror}") from exc
    if path.suffix.lower() == ".json":
        return parse_profiles_json(text, str(path))
    return parse_profiles_csv(text, str(path))


def draw_errors(T: int, err: ErrorModel, realization: int = 0) -> np.ndarray:
    """Raw (unclamped) Gaussian errors for T horizons of one realization."""
    return err.rng(realization).normal(0.0, err.eta, size=T) if err.eta > 0 else np.zeros(T)


def perturb_renewables(
    profiles: Sequence[HorizonProfile], err: ErrorModel, realization: int = 0
) -> list[HorizonProfile]:
    """Replace every lambda_e by max(lambda_e + noise, 0)."""
    delta = draw_errors(len(profiles), err, realization)
    return [replace(p, lambda_e=max(p.lambda_e + float(d), 0.0)) for p, d in zip(profiles, delta)]


@dataclass(frozen=True)
class ErrorStudy:
    """Total costs of every realization plus the error-free reference."""

    error_free: float
    costs: np.ndarray

    @property
    def mean(self) -> float:
        if np.all(self.costs == self.costs[0]):
            return float(self.costs[0])
        return math.fsum(self.costs.tolist()) / self.costs.size

    @property
    def std(self) -> float:
        if self.costs.size < 2:
            return 0.0
        m = self.mean
        return math.sqrt(math.fsum(((self.costs - m) ** 2).tolist()) / (self.costs.size - 1))

    @property
    def sem(self) -> float:
        return self.std / math.sqrt(self.costs.size)

    @property
    def relative_gap(self) -> float:
        return abs(self.mean - self.error_free) / self.error_free if self.error_free else 0.0


def _realization_cost(inputs: HorizonInputs, C: float, rule: str, err: ErrorModel, idx: int) -> float:
    plan = np.maximum(inputs.lambda_e + draw_errors(inputs.T, err, idx), 0.0)
    return simulate_purchases(inputs, C, rule, plan_lambda_e=plan).total_cost


def _chunk(args) -> list[float]:
    inputs, C, rule, err, lo, hi = args
    return [_realization_cost(inputs, C, rule, err, k) for k in range(lo, hi)]


def run_with_errors(
    cfg: NetworkConfig,
    profiles,
    err: ErrorModel,
    n_realizations: int,
    rule: str = "suboptimal",
    workers: int = 1,
) -> ErrorStudy:
    """Plan on perturbed renewables, execute on the true ones.

    Realization k draws its errors from (err.seed, k), so the per-realization
    costs and hence the aggregate do not depend on ``workers``.
    """
    if n_realizations < 1:
        raise ValidationError("n_realizations must be >= 1")
    inputs = horizon_inputs(cfg, profiles)
    reference = simulate_purchases(inputs, cfg.C, rule).total_cost
    if workers <= 1:
        costs = [_realization_cost(inputs, cfg.C, rule, err, k) for k in range(n_realizations)]
    else:
        step = math.ceil(n_realizations / workers)
        jobs = [(inputs, cfg.C, rule, err, lo, min(lo + step, n_realizations)) for lo in range(0, n_realizations, step)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            costs = [c for part in pool.map(_chunk, jobs) for c in part]
    return ErrorStudy(error_free=reference, costs=np.asarray(costs))
