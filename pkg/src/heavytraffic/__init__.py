"""Heavy-traffic limits for all-time suprema of Lévy processes and random walks."""

from .errors import (
    BracketFailure,
    DomainError,
    HeavyTrafficError,
    HorizonExceeded,
    InfiniteMean,
    InsufficientHits,
    NonMonotone,
    Unsupported,
    UnstableSystem,
)
from .harness import (
    ConvergenceReport,
    EmpiricalDistribution,
    htip_condition_check,
    ks_distance,
    ks_two_sample,
    pruitt_check,
    rw_levy_equivalence,
    sweep_heavy_traffic,
)
from .limits import (
    EmpiricalReference,
    Exponential,
    MittagLeffler,
    ml_cdf,
    ml_sample,
    select_limit_law,
    stable_sample,
)
from .models import (
    ExponentialJumps,
    HeavyTrafficFamily,
    LevyModel,
    ParetoJumps,
    StablePart,
    cumulant_r,
    levy_tail,
    mean,
    model_from_dict,
    truncated_second_moment,
)
from .normalize import NormalizationSolution, d_of_n, solve_contraction, solve_defna
from .rng import stream
from .simulate import (
    SupSample,
    levy_sup_grid,
    mg1_supremum_exact,
    pk_lst,
    rw_supremum_sample,
    stable_sup_functional_sample,
)

__version__ = "0.1.0"
