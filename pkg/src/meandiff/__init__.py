"""Bivariate means, their differences, inequality audits and divergence measures."""

__version__ = "0.1.0"

from .differences import (  # noqa: E402
    CERTIFIED_PAIRS,
    DifferencePair,
    VkKind,
    difference,
    generator_difference,
    phi_transform,
    second_derivative_closed,
    second_derivative_fd,
    vk_measure,
)
from .divergences import Distribution, DivergenceKind, divergence, verify_divergence_chain  # noqa: E402
from .errors import (  # noqa: E402
    DegenerateRatioError,
    DomainError,
    InputError,
    MeanDiffError,
    ParseError,
    RationalizationError,
    UnsupportedPairError,
)
from .inequalities import audit_chain, beta_constant, builtin_chains, tightness_check  # noqa: E402
from .means import MeanKind, PositivePair, generator, gini_mean, lehmer_mean, mean_value, power_mean  # noqa: E402
from .polycert import certify_positive, real_roots, substitute_t_squared  # noqa: E402

__all__ = [
    "__version__",
    "CERTIFIED_PAIRS",
    "DegenerateRatioError",
    "DifferencePair",
    "Distribution",
    "DivergenceKind",
    "DomainError",
    "InputError",
    "MeanDiffError",
    "MeanKind",
    "ParseError",
    "PositivePair",
    "RationalizationError",
    "UnsupportedPairError",
    "VkKind",
    "audit_chain",
    "beta_constant",
    "builtin_chains",
    "certify_positive",
    "difference",
    "divergence",
    "generator",
    "generator_difference",
    "gini_mean",
    "lehmer_mean",
    "mean_value",
    "phi_transform",
    "power_mean",
    "real_roots",
    "second_derivative_closed",
    "second_derivative_fd",
    "substitute_t_squared",
    "tightness_check",
    "verify_divergence_chain",
    "vk_measure",
]
