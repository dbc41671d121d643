"""Separability of rank-two mixed states on M parties of local dimension N."""

from .concurrence import (
    InvariantSet,
    ProductFactorization,
    concurrence,
    factorize,
    invariants,
    is_pure_separable,
)
from .criterion import (
    Decision,
    QuadraticSystem,
    RootPair,
    SeparabilityVerdict,
    build_system,
    concurrence_ratio,
    construct_decomposition,
    corollary_bound_check,
    decide,
    decide_real,
)
from .errors import *  # noqa: F401,F403
from .multilinear import (
    Bipartition,
    DensityMatrix,
    LocalUnitary,
    PartyShape,
    PureState,
    RankTwoState,
    apply_local_unitary,
    assemble,
    canonical_bipartitions,
    ghz_state,
    inner_product,
    matricize,
    product_state,
    rank_two_extract,
)
from .oracle import partial_transpose, ppt_check, pure_product_oracle, reconstruct

__version__ = "0.1.0"
