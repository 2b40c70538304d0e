"""Semi-selfdecomposable laws: construction, certification and simulation."""

__version__ = "0.1.0"

from .autoregressive import (
    Ar1Config,
    binomial_thinning,
    build_ar1,
    simulate_ar1,
    simulate_inar1,
    stationarity_diagnostic,
)
from .decompose import (
    check_discrete_semisd,
    check_lt_semisd,
    check_sd_full,
    check_semisd,
    corollary1_bridge,
    innovation_cf,
    is_valid_cf,
)
from .errors import SemiSDError
from .mixtures import (
    MixtureSpec,
    gamma_lt,
    generalized_semi_alpha_laplace,
    phi_mixture_cf,
    phi_mixture_pgf,
    theorem3_witness,
    theorem4_witness,
)
from .report import DecompositionReport, ValidityCertificate, Verdict
from .semistable import (
    SemiStableExponent,
    check_scaling_identity,
    make_exponent,
    make_laplace_exponent,
    semistable_cf,
    theorem8_innovation,
)
from .subordination import (
    LevyMarginal,
    SubordinationSpec,
    simulate_subordinated_path,
    subordinated_cf,
    verify_theorem567,
)
from .transforms import (
    DEFAULT_CONFIG,
    InversionConfig,
    Kind,
    TransformFn,
    extract_pgf_coeffs,
    invert_cf_to_cdf,
    lt_to_pgf,
    pgf_to_lt,
)
