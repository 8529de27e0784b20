"""Two-stage contact process: simulation, thresholds and survival bounds."""

from ._twostage import (
    BracketError,
    ContractError,
    DomainError,
    ParameterError,
    ProcessParams,
    ResourceError,
    bisect_critical,
    eigenvalues,
    estimate_survival,
    exact_marginal,
    is_subcritical,
    lambda_from_theta,
    lower_bound_lambda,
    max_real_eigenvalue,
    moment_matrix,
    site_rates,
    solve_moments,
    survival_lower_bound,
    union_probability,
)

__all__ = [
    "BracketError",
    "ContractError",
    "DomainError",
    "ParameterError",
    "ProcessParams",
    "ResourceError",
    "bisect_critical",
    "eigenvalues",
    "estimate_survival",
    "exact_marginal",
    "is_subcritical",
    "lambda_from_theta",
    "lower_bound_lambda",
    "max_real_eigenvalue",
    "moment_matrix",
    "site_rates",
    "solve_moments",
    "survival_lower_bound",
    "union_probability",
]
