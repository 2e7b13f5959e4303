"""Maximum-likelihood LDPC decoding by branch-price-and-cut."""

from .channel import (
    ChannelInstance,
    ber,
    gamma_magnitude,
    hamming_distance,
    log_likelihood_gammas,
    transmit_bsc,
)
from .codes import (
    AlistError,
    GeneratorMatrix,
    ParityCheckMatrix,
    TannerGraph,
    derive_generator,
    encode,
    generate_regular_code,
    parse_alist,
    format_alist,
    read_alist,
    syndrome,
    write_alist,
)
from .cuts import separate_odd_set_cuts
from .heuristics import HeuristicResult, gallager_a, random_sum
from .lp import (
    INFEASIBLE,
    OPTIMAL,
    LpOutcome,
    MasterProblem,
    RevisedSimplex,
    SolverFailure,
)
from .pricing import PricingInput, SubproblemInfeasible, direction_subproblem, solve_subproblem
from .solver import (
    BnbNode,
    DecodeOptions,
    DecodeResult,
    choose_branch_variable,
    decode,
    decode_with_method,
    prune_by_min_gap,
)

__version__ = "0.1.0"
