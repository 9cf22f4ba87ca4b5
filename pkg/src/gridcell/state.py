"""DP state and schedule containers shared by the policy and scenario layers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class HorizonProfile:
    """Exogenous inputs of one horizon."""

    t: int
    theta: float
    lambda_e: float
    price: float

    def __post_init__(self) -> None:
        if not 0 <= self.theta <= 1:
            raise ValidationError(f"horizon {self.t}: theta must lie in [0, 1], got {self.theta}")
        if not self.lambda_e >= 0:
            raise ValidationError(f"horizon {self.t}: lambda_e must be >= 0, got {self.lambda_e}")
        if not self.price > 0:
            raise ValidationError(f"horizon {self.t}: price must be > 0, got {self.price}")


@dataclass(frozen=True)
class SystemState:
    """Storage at the start of horizon ``t`` plus the exogenous tail t..T.

    ``t`` is 1-based and refers to the absolute horizon index; the
    sequences start at horizon ``t``.  ``future_e_min`` optionally pins the
    minimum demand of each horizon; when absent it is derived from the MT
    densities.
    """

    t: int
    b: float
    future_lambda_e: tuple[float, ...]
    future_price: tuple[float, ...]
    future_lambda_m: tuple[float, ...]
    future_e_min: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        n = len(self.future_lambda_e)
        if n == 0 or len(self.future_price) != n or len(self.future_lambda_m) != n:
            raise ValidationError("state sequences must be non-empty and equally long")
        if self.b < 0:
            raise ValidationError("storage level must be >= 0")
        if any(p <= 0 for p in self.future_price):
            raise ValidationError("prices must be positive")
        if any(x < 0 for x in self.future_lambda_e):
            raise ValidationError("renewable arrival rates must be >= 0")
        if any(x < 0 for x in self.future_lambda_m):
            raise ValidationError("MT densities must be >= 0")
        if self.future_e_min is not None and len(self.future_e_min) != n:
            raise ValidationError("future_e_min must match the other sequences")

    @property
    def remaining(self) -> int:
        return len(self.future_lambda_e)


@dataclass(frozen=True)
class Schedule:
    """Per-horizon decisions and the storage trajectory they induce.

    ``storage`` has T + 1 entries: storage[0] is B(1) and storage[k] the level
    at the start of horizon k + 1.
    """

    rho: np.ndarray
    g: np.ndarray
    storage: np.ndarray
    demand: np.ndarray
    lambda_e: np.ndarray
    price: np.ndarray
    total_cost: float

    @property
    def T(self) -> int:
        return int(self.g.shape[0])


@dataclass(frozen=True)
class HorizonInputs:
    """Per-horizon arrays a purchase policy consumes.

    ``rho`` is the activity used in each horizon and ``demand`` the areal
    demand it implies (E_min when rho = rho_min).
    """

    rho: np.ndarray
    demand: np.ndarray
    lambda_e: np.ndarray
    price: np.ndarray
    lambda_m: np.ndarray

    def __post_init__(self) -> None:
        n = self.demand.shape[0]
        for name in ("rho", "lambda_e", "price", "lambda_m"):
            if getattr(self, name).shape != (n,):
                raise ValidationError(f"{name} must have shape ({n},)")
        if n == 0:
            raise ValidationError("at least one horizon is required")
        if np.any(self.price <= 0) or np.any(self.lambda_e < 0) or np.any(self.demand < 0):
            raise ValidationError("prices must be positive, arrivals and demands non-negative")

    @classmethod
    def from_arrays(cls, demand, lambda_e, price, rho=None, lambda_m=None) -> "HorizonInputs":
        demand = np.asarray(demand, dtype=float)
        n = demand.shape[0]
        return cls(
            rho=np.ones(n) if rho is None else np.asarray(rho, dtype=float),
            demand=demand,
            lambda_e=np.asarray(lambda_e, dtype=float),
            price=np.asarray(price, dtype=float),
            lambda_m=np.zeros(n) if lambda_m is None else np.asarray(lambda_m, dtype=float),
        )

    @property
    def T(self) -> int:
        return int(self.demand.shape[0])

    def window(self, start: int, T: int) -> "HorizonInputs":
        """Horizons start..start+T-1 (1-based, inclusive)."""
        if start < 1 or T < 1 or start - 1 + T > self.T:
            raise ValidationError(f"window [{start}, {start + T - 1}] outside 1..{self.T}")
        sl = slice(start - 1, start - 1 + T)
        return HorizonInputs(self.rho[sl], self.demand[sl], self.lambda_e[sl], self.price[sl], self.lambda_m[sl])

    def with_lambda_e(self, lambda_e) -> "HorizonInputs":
        return HorizonInputs(self.rho, self.demand, np.asarray(lambda_e, dtype=float), self.price, self.lambda_m)

    def with_price(self, price) -> "HorizonInputs":
        return HorizonInputs(self.rho, self.demand, self.lambda_e, np.asarray(price, dtype=float), self.lambda_m)

    def state_at(self, t: int, b: float) -> SystemState:
        """SystemState for horizon t (1-based) with storage b."""
        sl = slice(t - 1, None)
        return SystemState(
            t=t,
            b=b,
            future_lambda_e=tuple(self.lambda_e[sl].tolist()),
            future_price=tuple(self.price[sl].tolist()),
            future_lambda_m=tuple(self.lambda_m[sl].tolist()),
            future_e_min=tuple(self.demand[sl].tolist()),
        )
