"""Static network constants and the flat ``key = value`` config format.

A config file holds one assignment per line; ``#`` starts a comment and
blank lines are ignored.  Keys are either :class:`NetworkConfig` fields or
:class:`RunSettings` fields, in the units documented on the fields.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping

from .errors import ParseError, ValidationError


@dataclass(frozen=True)
class NetworkConfig:
    """Physical and network constants of the cellular microgrid.

    Densities are per m², powers in W, bandwidths in Hz.  Storage is an
    areal quantity in W/m² (one-hour horizons make W and Wh interchangeable).
    """

    lambda_B: float = 5e-4
    P_B: float = 20.0
    alpha: float = 4.0
    beta: float = 2.0
    sigma2: float = 1e-9
    W_total: float = 19.98e6
    B_chan: float = 180e3
    epsilon: float = 0.05
    mu: float = 0.213
    P_a: float = 130.0
    P_s: float = 75.0
    C: float = 0.2
    # total MT density; the per-horizon density is lambda_m_all * theta(t)
    lambda_m_all: float = 8e-3

    def __post_init__(self) -> None:
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValidationError(f"{f.name} must be a finite number, got {v!r}")
        checks = [
            (self.lambda_B > 0, "lambda_B > 0"),
            (self.P_B > 0, "P_B > 0"),
            (self.alpha > 2, "alpha > 2"),
            (self.beta > 0, "beta > 0"),
            (self.sigma2 >= 0, "sigma2 >= 0"),
            (0 < self.B_chan < self.W_total, "0 < B_chan < W_total"),
            (0 < self.epsilon < 1, "0 < epsilon < 1"),
            (0 < self.mu < 1, "0 < mu < 1"),
            (self.P_a > self.P_s > 0, "P_a > P_s > 0"),
            (self.C > 0, "C > 0"),
            (self.lambda_m_all >= 0, "lambda_m_all >= 0"),
        ]
        for ok, what in checks:
            if not ok:
                raise ValidationError(f"NetworkConfig invariant violated: {what}")

    @property
    def P_gap(self) -> float:
        return self.P_a - self.P_s

    @property
    def bandwidth_ratio(self) -> float:
        """W_total / B_chan, the number of MT channels in the whole band."""
        return self.W_total / self.B_chan

    def replace(self, **changes: Any) -> "NetworkConfig":
        return dataclasses.replace(self, **changes)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text: str) -> tuple[int, ...]:
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return tuple(out)


@dataclass(frozen=True)
class RunSettings:
    """Knobs of the batch commands, such as sweep values and Monte-Carlo sizes."""

    rho_sweep: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
    purchase_rule: str = "suboptimal"
    grid_step: float = 1e-4
    dp_budget: int = 250_000
    oracle_start: int = 2
    oracle_horizons: tuple[int, ...] = (1, 2, 3, 4, 5)
    eta: float = 0.1
    error_realizations: int = 1000
    error_horizons: tuple[int, ...] = (6, 12, 18, 24)
    window: float = 1000.0
    cluster_L: float = 100.0
    compare_start: int = 7
    compare_T: int = 3
    compare_realizations: int = 500
    compare_budget: int = 100_000
    compare_sinr_mts: int = 20
    lambda_m_all_sweep: tuple[float, ...] = (2e-3, 4e-3, 6e-3, 8e-3)

    def __post_init__(self) -> None:
        if self.purchase_rule not in ("myopic", "suboptimal"):
            raise ValidationError("purchase_rule must be 'myopic' or 'suboptimal'")
        if not self.grid_step > 0:
            raise ValidationError("grid_step must be positive")
        if self.eta < 0:
            raise ValidationError("eta must be >= 0")
        for name in ("error_realizations", "compare_realizations", "compare_T", "oracle_start"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be >= 1")
        if not self.rho_sweep or any(not 0 < r <= 1 for r in self.rho_sweep):
            raise ValidationError("rho_sweep values must lie in (0, 1]")
        if self.window <= 0 or self.cluster_L <= 0:
            raise ValidationError("window and cluster_L must be positive")


_PARSERS: dict[str, Any] = {
    "rho_sweep": _floats,
    "oracle_horizons": _ints,
    "error_horizons": _ints,
    "lambda_m_all_sweep": _floats,
    "purchase_rule": str.strip,
}


def _coerce(cls: type, key: str, raw: str) -> Any:
    if key in _PARSERS:
        return _PARSERS[key](raw)
    ftype = {f.name: f.type for f in fields(cls)}[key]
    if ftype in ("int", int):
        return int(float(raw))
    return float(raw)


_NET_KEYS = {f.name for f in fields(NetworkConfig)}
_RUN_KEYS = {f.name for f in fields(RunSettings)}


def parse_assignments(pairs: Mapping[str, str]) -> tuple[NetworkConfig, RunSettings]:
    """Build validated config objects from string assignments."""
    net: dict[str, Any] = {}
    run: dict[str, Any] = {}
    for key, raw in pairs.items():
        try:
            if key in _NET_KEYS:
                net[key] = _coerce(NetworkConfig, key, raw)
            elif key in _RUN_KEYS:
                run[key] = _coerce(RunSettings, key, raw)
            else:
                raise ValidationError(f"unknown config key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"bad value for {key!r}: {raw!r}") from exc
    return NetworkConfig(**net), RunSettings(**run)


def read_assignments(text: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ParseError(f"expected 'key = value', got {body!r}", line=lineno)
        key, _, value = body.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ParseError("empty key or value", line=lineno)
        if key in pairs:
            raise ParseError(f"duplicate key {key!r}", line=lineno)
        pairs[key] = value
    return pairs


def load_config(
    path: str | Path | None = None, overrides: Mapping[str, str] | None = None
) -> tuple[NetworkConfig, RunSettings]:
    """Read a config file (or the shipped defaults) and apply overrides."""
    if path is None:
        text = default_config_path().read_text(encoding="utf-8")
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError(f"cannot read config {path}: {exc.strerror}") from exc
    pairs = read_assignments(text)
    pairs.update(overrides or {})
    return parse_assignments(pairs)


def default_config_path() -> Path:
    return Path(__file__).with_name("data") / "default.cfg"


def default_profile_path() -> Path:
    return Path(__file__).with_name("data") / "profile_24h.csv"


DEFAULT_CONFIG = NetworkConfig()
DEFAULT_SETTINGS = RunSettings()

__all__ = [
    "NetworkConfig",
    "RunSettings",
    "DEFAULT_CONFIG",
    "DEFAULT_SETTINGS",
    "load_config",
    "parse_assignments",
    "read_assignments",
    "default_config_path",
    "default_profile_path",
]
