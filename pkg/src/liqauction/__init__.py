"""Truthful budget-feasible auctions of one divisible unit, with liquid welfare oracles and audits."""

from .demand import Demand, best_response, demand_at, v_bar, w_of_p
from .model import (
    Agent,
    DomainError,
    Instance,
    InstanceFormatError,
    Outcome,
    ValuationCurve,
    evaluate_valuation,
    liquid_value,
    load_instance,
    loads_instance,
    save_instance,
)
from .private import (
    BranchExpectation,
    PrivateParams,
    Randomness,
    exact_expectation,
    run_mv1,
    run_mv2,
    run_private,
    run_rs,
)
from .public import PHI, AllocationRegime, RegimePiece, allocate_public, myerson_pieces, pay_public
from .welfare import OptResult, opt_dp, opt_exact, opt_linear_greedy, opt_upper_bound, revenue, welfare

__version__ = "0.1.0"
