"""Joint BS on/off and energy-purchase scheduling for cellular networks
that draw renewable and grid energy through a shared storage."""

__version__ = "0.1.0"

from .config import DEFAULT_CONFIG, NetworkConfig, RunSettings, load_config
from .errors import (
    BudgetExceeded,
    DemandViolation,
    DomainError,
    GridcellError,
    InfeasibleLoad,
    NoActiveBS,
    ParseError,
    PreconditionViolation,
    QuadratureError,
    UnsupportedRegime,
    ValidationError,
)
from .geometry import (
    CoverageInputs,
    avg_traffic_load,
    interference_factor_v,
    num_bands,
    rho_min,
    rho_min_closed_form,
    solve_g0,
    success_probability,
    success_probability_closed,
    success_probability_quad,
)
from .energy import active_bs_power, areal_energy_demand, inactive_bs_power, min_energy_demand, storage_update
from .state import HorizonInputs, HorizonProfile, Schedule, SystemState
from .policy import (
    dp_optimal_search,
    myopic_purchase,
    optimal_purchase_horizon_T_minus_1,
    optimal_rho_schedule,
    run_policy,
    solve_dp,
    suboptimal_purchase,
)
from .scenario import ErrorModel, load_profiles, perturb_renewables, run_with_errors
from .montecarlo import (
    NetworkRealization,
    SchemeResult,
    build_realization,
    compare_schemes,
    empirical_success_probability,
    sample_ppp,
    scheme_cluster,
    scheme_no_coordination,
    sinr_at_mt,
)
