"""Stochastic-geometry quantities of the downlink.

The typical MT's success probability (closed form for ``alpha == 4``,
quadrature otherwise) and the minimum BS activity that keeps outage below
``epsilon``, together with the load and band-count helpers they rest on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .config import NetworkConfig
from .errors import BracketError, DomainError, InfeasibleLoad, QuadratureError, UnsupportedRegime

# relative tolerance requested from adaptive quadrature
QUAD_RTOL = 1e-10
# integrate e^{-u} up to here; the discarded tail is e^{-40} ~ 4e-18
_U_MAX = 40.0


@dataclass(frozen=True)
class CoverageInputs:
    rho: float
    lambda_m: float

    def __post_init__(self) -> None:
        if not 0 < self.rho <= 1:
            raise DomainError(f"rho must lie in (0, 1], got {self.rho}")
        if self.lambda_m < 0:
            raise DomainError(f"lambda_m must be >= 0, got {self.lambda_m}")


def avg_traffic_load(lambda_m: float, lambda_B: float, rho: float) -> float:
    """Mean number of MTs served by one active BS."""
    if lambda_B <= 0 or rho <= 0:
        raise DomainError("lambda_B and rho must be positive")
    if lambda_m < 0:
        raise DomainError("lambda_m must be >= 0")
    return lambda_m / (lambda_B * rho)


def num_bands(cfg: NetworkConfig, rho: float, lambda_m: float) -> float:
    """Real-valued frequency-reuse band count delta."""
    if lambda_m <= 0:
        raise DomainError("band count is unbounded for lambda_m = 0")
    return cfg.bandwidth_ratio * cfg.lambda_B * rho / lambda_m


def coband_density(cfg: NetworkConfig, lambda_m: float) -> float:
    """Density of active BSs sharing one band; independent of rho."""
    return lambda_m / cfg.bandwidth_ratio


def interference_factor_v(beta: float, alpha: float, method: str = "auto") -> float:
    """v = beta^(2/alpha) * integral_{beta^(-2/alpha)}^inf du / (1 + u^(alpha/2)).

    ``method`` is ``"closed"`` (alpha == 4 only), ``"quad"``, or ``"auto"``.
    """
    if alpha <= 2:
        raise DomainError("alpha must exceed 2 for the interference integral to converge")
    if beta <= 0:
        raise DomainError("beta must be positive")
    if method == "auto":
        method = "closed" if alpha == 4 else "quad"
    if method == "closed":
        if alpha != 4:
            raise UnsupportedRegime("closed-form v needs alpha == 4")
        sb = math.sqrt(beta)
        return sb * (math.pi / 2 - math.atan(1 / sb))
    lo = beta ** (-2 / alpha)
    val, err = integrate.quad(lambda u: 1.0 / (1.0 + u ** (alpha / 2)), lo, np.inf, epsabs=0, epsrel=1e-12, limit=200)
    if err > 1e-9 * abs(val):
        raise QuadratureError("interference integral did not converge", err)
    return beta ** (2 / alpha) * val


def gaussian_tail_Q(x: float) -> float:
    """Standard normal tail probability P(Z > x)."""
    return float(special.ndtr(-x))


def scaled_tail(x: float) -> float:
    """exp(x^2/2) * Q(x), finite for large x where the factors over/underflow."""
    return 0.5 * float(special.erfcx(x / math.sqrt(2.0)))


def _coefficients(cfg: NetworkConfig, inp: CoverageInputs, v: float) -> tuple[float, float, float]:
    y = math.pi * cfg.lambda_B * inp.rho
    a = y + math.pi * coband_density(cfg, inp.lambda_m) * v
    b = cfg.beta * cfg.sigma2 / cfg.P_B
    return y, a, b


def success_probability_quad(cfg: NetworkConfig, inp: CoverageInputs) -> float:
    """Success probability by adaptive quadrature of the general-alpha integral."""
    v = interference_factor_v(cfg.beta, cfg.alpha)
    y, a, b = _coefficients(cfg, inp, v)
    # substitute u = a x so the exponential factor is e^{-u} on [0, _U_MAX]
    k = b / a ** (cfg.alpha / 2)
    half = cfg.alpha / 2

    def f(u: float) -> float:
        return math.exp(-u - k * u**half)

    val, err = integrate.quad(f, 0.0, _U_MAX, epsabs=0, epsrel=QUAD_RTOL, limit=500)
    if not math.isfinite(val) or err > 100 * QUAD_RTOL * max(val, 1e-300):
        raise QuadratureError("success-probability integral did not converge", err)
    return y / a * val


def success_probability_closed(cfg: NetworkConfig, inp: CoverageInputs) -> float:
    """Closed form for alpha == 4 using the scaled Gaussian tail."""
    if cfg.alpha != 4:
        raise UnsupportedRegime("closed-form success probability needs alpha == 4")
    v = interference_factor_v(cfg.beta, 4.0, "closed")
    y, a, b = _coefficients(cfg, inp, v)
    if b == 0.0:
        return y / a
    ups = a / math.sqrt(2.0 * b)
    return y * math.sqrt(math.pi / b) * scaled_tail(ups)


def success_probability(cfg: NetworkConfig, inp: CoverageInputs) -> float:
    """P(SINR >= beta) for the typical MT."""
    if cfg.alpha == 4:
        return success_probability_closed(cfg, inp)
    return success_probability_quad(cfg, inp)


def _g0_residual(g: float, epsilon: float) -> float:
    # noise-limited success probability at y = g*sqrt(b/pi) is g*exp(g^2/4pi)*Q(g/sqrt(2pi))
    return g * gaussian_tail_Q(g / math.sqrt(2 * math.pi)) - (1 - epsilon) * math.exp(-g * g / (4 * math.pi))


@lru_cache(maxsize=64)
def solve_g0(epsilon: float, tol: float = 1e-12) -> float:
    """Root g0 of g*Q(g/sqrt(2 pi)) = (1 - eps) * exp(-g^2 / (4 pi))."""
    if not 0 < epsilon < 1:
        raise DomainError("epsilon must lie in (0, 1)")
    lo, hi = 0.0, 8.0
    while _g0_residual(hi, epsilon) <= 0:
        hi *= 2
        if hi > 1e6:
            raise BracketError(f"no sign change for g0 up to {hi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _g0_residual(mid, epsilon) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def rho_min_terms(cfg: NetworkConfig, lambda_m: float) -> tuple[float, float]:
    """(interference-limited term, noise-limited term) of the closed-form bound."""
    if cfg.alpha != 4:
        raise UnsupportedRegime("rho_min is only available for alpha == 4")
    if lambda_m < 0:
        raise DomainError("lambda_m must be >= 0")
    v = interference_factor_v(cfg.beta, 4.0, "closed")
    eps = cfg.epsilon
    interf = lambda_m / (cfg.lambda_B * cfg.bandwidth_ratio) * v * (1 - eps) / eps
    noise = solve_g0(eps) * math.sqrt(cfg.beta * cfg.sigma2) / (math.pi**1.5 * cfg.lambda_B * math.sqrt(cfg.P_B))
    return interf, noise


def rho_min_closed_form(cfg: NetworkConfig, lambda_m: float) -> float:
    """max of the interference- and noise-limited activity requirements.

    Each term alone is exact when the other impairment is absent; with both
    present the max slightly under-estimates the true boundary.
    """
    return max(rho_min_terms(cfg, lambda_m))


@lru_cache(maxsize=4096)
def rho_min(cfg: NetworkConfig, lambda_m: float, tol: float = 1e-14) -> float:
    """Smallest rho with success probability >= 1 - epsilon.

    Starts from the closed-form bound (a lower bound of the boundary) and
    bisects the closed-form success probability up to the exact crossing.
    """
    lo = rho_min_closed_form(cfg, lambda_m)
    if lo > 1:
        raise InfeasibleLoad(f"rho_min = {lo:.6g} > 1 for lambda_m = {lambda_m:.6g}")
    target = 1 - cfg.epsilon

    def p(r: float) -> float:
        return success_probability_closed(cfg, CoverageInputs(r, lambda_m))

    if p(lo) >= target:
        return lo
    hi = 1.0
    if p(hi) < target:
        raise InfeasibleLoad(f"outage target unreachable with all BSs active (lambda_m = {lambda_m:.6g})")
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if p(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi
