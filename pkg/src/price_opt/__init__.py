"""Revenue-optimal pricing of a fixed stock under cumulative sales and revenue bounds."""

from .errors import DomainError, InfeasibleError, OracleLimitError, PriceOptError, RangeError, ScenarioError
from .functions import (
    DemandCurve,
    LinearPropensity,
    Propensity,
    TabulatedPropensity,
    ValueWeight,
    integrate_I,
    integrate_J,
    integrate_K,
    invert_revenue_rate,
    invert_sales_rate,
    propensity_eval,
)
from .policy import ConstantPrice, PricingPolicy, Segment, SolveTrace, TvmSegment, cumulative_at_grid
from .scenario import (
    ConstraintSchedule,
    FeasibilityReport,
    Scenario,
    check_feasibility,
    load_scenario,
    residuals,
    save_scenario,
    synthetic_scenario,
)
from .simulator import (
    SimulationResult,
    baseline_nearest_constraint,
    baseline_value_blind,
    compare,
    simulate,
)
from .solver_basic import solve_basic, tight_revenue_price, tight_sales_price
from .solver_tvm import (
    price_from_q,
    q_revenue,
    q_sales,
    solve_interval_max_revenue,
    solve_interval_min_sales,
    solve_tvm_linear,
)

__version__ = "0.1.0"
