"""Integer-valued moving-average (INMA) random fields on 2-D lattices.

Simulation, closed-form moments and pgfs, exact enumeration for small
models, and empirical verification of simulated grids.
"""

from .analytics import (
    LagPair,
    MomentSummary,
    acf,
    acvf,
    bivariate_pgf,
    long_run_variance,
    marginal_moments,
    marginal_pgf,
    poisson_bivariate_pgf,
    poisson_conditional_moments,
    poisson_jump_pmf,
    poisson_order_probs,
)
from .distributions import (
    Deterministic,
    InnovationSpec,
    NegBin,
    Poisson,
    bessel_i,
    bessel_i_scaled,
    innovation_from_dict,
    innovation_moments,
    innovation_pgf,
    sample_innovation,
    sample_innovations,
)
from .errors import ConfigurationError, DomainError, InmaError, ResourceError, UsageError
from .estimators import (
    CheckResult,
    VerificationReport,
    block_bootstrap_means,
    conditional_mean_profile,
    empirical_bivariate_pgf,
    empirical_pgf,
    marginal_histogram,
    profile_regression,
    sample_acf,
    sample_acf_se,
    sample_acvf,
    sample_mean,
    total_variation,
    verify,
)
from .io import RunConfig, dump_config, load_config, load_grid, save_grid
from .model import InmaModel, MultilateralOrder, model_hash, validate
from .oracle import (
    EnumerationBudget,
    enumerate_bivariate_pmf,
    enumerate_marginal_pmf,
    oracle_json,
    pmf_covariance,
    pmf_pgf,
)
from .rng import CounterStreams, Stream
from .simulator import (
    Grid,
    ThinningField,
    assemble_from_y,
    build_assembly_matrix,
    draw_thinnings,
    simulate_grid,
    simulate_multilateral,
    stack_thinnings,
)
from .thinning import (
    BetaMatrix,
    CrossDependence,
    ThinningVector,
    joint_success_prob,
    pgf_y,
    pgf_z,
    sample_counting_vector,
    sample_thinning_vector,
    thin,
)

__version__ = "0.1.0"
