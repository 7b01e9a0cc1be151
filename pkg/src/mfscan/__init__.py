"""Segmented multiplicative-function sieves, interval systems,
Dirichlet-polynomial numerics, the smooth-number density, and the
short-interval scanners built on top of them."""

from .errors import CapacityError, ResolutionError, UsageError
from .sieve import (
    FactorTable,
    Window,
    omega_in_range,
    primes_in_range,
    primes_up_to,
    sieve_factorize,
)
from .mfunc import (
    MultiplicativeFunctionSpec,
    abs_moebius,
    evaluate,
    evaluate_window,
    from_table,
    liouville,
    long_average,
    moebius,
    neg_primes,
    one,
    parse_function,
    smooth_indicator,
)
from .s_system import (
    IntervalSystem,
    Violation,
    bind_to_x,
    canonical_system,
    inclusion_exclusion_check,
    member_mask,
    membership,
    nonmember_density_bound,
    parse_system,
    validate,
)
from .analytic import (
    DirichletPolynomial,
    DistanceResult,
    MeanSquareResult,
    MinDistanceResult,
    RamareDecomposition,
    build_poly,
    build_prime_window,
    duality_check,
    eval_at,
    halasz_bound_shape,
    halasz_distance,
    mean_square,
    min_distance,
    ramare_decompose,
)
from .dickman import (
    DickmanTable,
    build_table,
    rho,
    smooth_count,
    smooth_interval_constant,
)
from .scanners import (
    BilinearResult,
    DiscrepancyRecord,
    ScanParams,
    ScanReport,
    correlation,
    lucht_tuttas_density,
    medium_vs_long,
    paper_exceptional_bound,
    paper_threshold,
    scan_bilinear,
    scan_short,
    sign_change_in_intervals,
    sign_changes,
    smooth_in_intervals,
    smooth_in_sqrt_interval,
    sqrt_interval_sign_change,
)
from .rng import SplitMix64

__version__ = "0.1.0"
