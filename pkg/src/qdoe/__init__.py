"""qdoe: stratified designs for dependent inputs via Voronoi quantization,
weighted expectation estimators, and HSIC kernel screening."""

__version__ = "0.1.0"

from .config import ExperimentConfig, load_config, parse_config
from .copula import (
    EmpiricalMarginal,
    GaussianCopula,
    conditional_inverse,
    fit_gaussian_copula,
    gaussian_copula,
    identity_copula,
)
from .designs import (
    Design,
    lhs,
    lhs_with_marginals,
    lhsd,
    mc_design,
    q2lhs_design,
    qlhs_design,
    rq_design,
)
from .distributions import (
    Distribution,
    Gumbel,
    LogNormal,
    Normal,
    Triangular,
    Truncated,
    Uniform,
    distribution_from_config,
)
from .errors import (
    ConfigError,
    DegeneracyError,
    DimensionError,
    DomainError,
    EvaluationError,
    ParameterError,
    QdoeError,
)
from .estimators import EstimateResult, ReplicateSummary, estimate, replicate
from .hsic import (
    HsicResult,
    KernelSpec,
    ScreenResult,
    gram,
    hsic_rq,
    hsic_v,
    independence_test,
    screen,
)
from .quantizer import (
    CandidatePool,
    Quantizer,
    assign,
    distortion,
    lloyd,
    load_pool,
    load_quantizer,
    sample_cell,
    save_pool,
    save_quantizer,
)
from . import models, runner

__all__ = [
    "__version__",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "EmpiricalMarginal",
    "GaussianCopula",
    "conditional_inverse",
    "fit_gaussian_copula",
    "gaussian_copula",
    "identity_copula",
    "Design",
    "lhs",
    "lhs_with_marginals",
    "lhsd",
    "mc_design",
    "q2lhs_design",
    "qlhs_design",
    "rq_design",
    "Distribution",
    "Gumbel",
    "LogNormal",
    "Normal",
    "Triangular",
    "Truncated",
    "Uniform",
    "distribution_from_config",
    "ConfigError",
    "DegeneracyError",
    "DimensionError",
    "DomainError",
    "EvaluationError",
    "ParameterError",
    "QdoeError",
    "EstimateResult",
    "ReplicateSummary",
    "estimate",
    "replicate",
    "HsicResult",
    "KernelSpec",
    "ScreenResult",
    "gram",
    "hsic_rq",
    "hsic_v",
    "independence_test",
    "screen",
    "CandidatePool",
    "Quantizer",
    "assign",
    "distortion",
    "lloyd",
    "load_pool",
    "load_quantizer",
    "sample_cell",
    "save_pool",
    "save_quantizer",
    "models",
    "runner",
]
