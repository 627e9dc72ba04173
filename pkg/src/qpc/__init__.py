"""Exact counting and verification for rational points of bounded height on
the quartic hypersurface x^4 = (y1^2 + y2^2 + y3^2 + y4^2) z^2."""

from .arith import (
    DEFAULT_SIEVE_LIMIT,
    FactoredInteger,
    RationalBound,
    SpfSieve,
    build_spf_sieve,
    factorize,
    load_sieve_cache,
    mobius,
    primes_up_to,
    r4,
    r4_star,
    save_sieve_cache,
    square_divisor_pairs,
)
from .asymptotics import (
    NSTAR_VARIANTS,
    RESIDUE_JACOBIAN,
    MainTermModel,
    ResiduePolynomial,
    convergence_table,
    euler_product_C4,
    main_term_model,
    n_star_main_term,
    n_u_main_term,
    p_coefficients,
    prime_zeta,
    s_main_term,
    t_main_term,
)
from .counting import (
    CountRecord,
    PartitionWitness,
    TelescopeReport,
    brute_force_primitive,
    brute_force_star,
    n_star,
    n_u,
    partition_witness,
    s_exact,
    shutdown_workers,
    t_exact,
    telescoping_check,
)
from .dirichlet import (
    ZetaValue,
    formal_identity_1,
    formal_identity_2,
    g_value,
    global_series_check,
    local_factor_closed_form,
    local_factor_definition,
    zeta,
    zeta_star,
)
from .errors import (
    CacheFormatError,
    DomainError,
    ResourceError,
    UnstableDifferentiationError,
)
from .series import RationalFunction, TruncSeries

__version__ = "0.1.0"
