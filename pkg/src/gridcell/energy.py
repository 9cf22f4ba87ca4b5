"""Linear BS power model with its areal demand; the storage update clamps at capacity."""

from __future__ import annotations

import math

from .config import NetworkConfig
from .errors import DemandViolation, DomainError
from .geometry import rho_min
from .state import SystemState

# absolute slack (W/m^2) tolerated by the demand check; float round-off only
DEMAND_ATOL = 1e-12


def active_bs_power(cfg: NetworkConfig, d: float) -> float:
    """Mean power of an active BS carrying ``d`` MTs (W)."""
    if d < 0:
        raise DomainError("traffic load must be >= 0")
    return cfg.P_a + cfg.P_B / cfg.mu * d


def inactive_bs_power(cfg: NetworkConfig) -> float:
    return cfg.P_s


def areal_energy_demand(cfg: NetworkConfig, rho: float, lambda_m: float) -> float:
    """Average BS power per unit area (W/m^2) at activity ``rho``.

    The traffic term P_B * lambda_m / mu does not depend on rho because the
    total load is conserved when sleeping BSs hand their MTs over.
    """
    if not 0 <= rho <= 1:
        raise DomainError(f"rho must lie in [0, 1], got {rho}")
    if lambda_m < 0:
        raise DomainError("lambda_m must be >= 0")
    return cfg.lambda_B * rho * cfg.P_gap + cfg.lambda_B * cfg.P_s + cfg.P_B * lambda_m / cfg.mu


def min_energy_demand(cfg: NetworkConfig, lambda_m: float) -> float:
    return areal_energy_demand(cfg, rho_min(cfg, lambda_m), lambda_m)


def storage_update(b: float, lambda_e: float, g: float, e: float, C: float) -> float:
    """Next storage level min(b + lambda_e + g - e, C)."""
    net = b + lambda_e + g - e
    if net < -DEMAND_ATOL:
        raise DemandViolation(
            f"supply {b + lambda_e + g:.9g} below demand {e:.9g} (shortfall {-net:.3e})"
        )
    return min(max(net, 0.0), C)


def state_e_min(state: SystemState, cfg: NetworkConfig) -> list[float]:
    """Minimum demand of every horizon in the state's tail."""
    if state.future_e_min is not None:
        return list(state.future_e_min)
    return [min_energy_demand(cfg, lm) for lm in state.future_lambda_m]


def purchase_bounds(state: SystemState, cfg: NetworkConfig) -> tuple[float, float]:
    """(g_min, g_max) for the current horizon of ``state``.

    g_max just covers every remaining demand net of renewables and is
    clamped to g_min when future renewables are abundant.
    """
    e_min = state_e_min(state, cfg)
    g_min = max(e_min[0] - state.b - state.future_lambda_e[0], 0.0)
    g_max = max(math.fsum(e_min) - math.fsum(state.future_lambda_e), g_min)
    return g_min, g_max
