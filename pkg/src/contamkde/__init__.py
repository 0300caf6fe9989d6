"""Pointwise kernel density estimation at 0 under epsilon-contamination.

Minimax-rate oracles, Lepski-type adaptive bandwidths, lower-bound
constructions with their two-point certificates, and a Monte Carlo bench.
"""

from .adaptation import (
    LepskiConfig,
    LepskiKDE,
    LepskiResult,
    default_c1,
    dyadic_grid,
    lepski_epsilon_reference,
    lepski_reverse,
    lepski_reverse_conservative,
    lepski_select,
    lepski_standard,
)
from .bench import (
    ConfigError,
    ExperimentConfig,
    RiskReport,
    fit_rate_exponent,
    monte_carlo_risk,
    rate_sweep,
    theory_rate,
)
from .certificates import (
    chi_squared,
    constrained_risk_bound,
    density_difference_decompose,
    is_density_difference,
    le_cam_bound,
    modulus_of_continuity,
    total_variation,
)
from .contamination import ContaminatedModel, adversarial_spike, point_mass, sample_mixture
from .densities import (
    InfeasibleConstruction,
    PerturbationPair,
    SmoothDensity,
    check_density,
    gaussian_baseline,
    laplace_baseline,
    pair_arbitrary,
    pair_level,
    pair_neighborhood,
    pair_proportion,
    pair_unidentifiable,
    sample,
)
from .estimators import Normalization, PointKDE, kde_at_zero
from .kernels import Kernel, check_kernel_class, eval_kernel, make_order_kernel

__version__ = "0.1.0"
