"""Tail-risk analytics: closed-form superquantile (CVaR) and buffered
probability of exceedance (bPOE) for eleven distribution families, with
parametric portfolio optimization and superquantile-based density fitting
built on top."""

from .distributions import (GEV, GPD, Distribution, Exponential, Laplace,
                            LogLogistic, LogNormal, Logistic, Normal, Pareto,
                            StudentT, SupportBound, Weibull, make)
from .errors import (ConvergenceError, DomainError, OracleError,
                     ParameterError, TailRiskError)
from .estimation import (FitProblem, FitResult, empirical_superquantile,
                         ls_mos_fit, mos_solve, reference_fits)
from .oracle import OracleConfig, OracleResult, mc_superquantile, oracle_bpoe, \
    oracle_superquantile
from .portfolio import (AssetUniverse, PortfolioProblem, PortfolioReport,
                        QualifiedFamily, cvar_cross_evaluate,
                        markowitz_equivalence_check, markowitz_solve,
                        min_bpoe_portfolio, min_cvar_portfolio)
from .tail_metrics import (TailResult, bpoe, bpoe_by_minimization,
                           bpoe_by_root, bpoe_closed, left_superquantile,
                           partial_expectation, superdistribution_cdf,
                           superquantile)

__version__ = "0.1.0"

__all__ = [
    "AssetUniverse", "ConvergenceError", "Distribution", "DomainError",
    "Exponential", "FitProblem", "FitResult", "GEV", "GPD", "Laplace",
    "LogLogistic", "LogNormal", "Logistic", "Normal", "OracleConfig",
    "OracleError", "OracleResult", "ParameterError", "Pareto",
    "PortfolioProblem", "PortfolioReport", "QualifiedFamily", "StudentT",
    "SupportBound", "TailResult", "TailRiskError", "Weibull", "bpoe",
    "bpoe_by_minimization", "bpoe_by_root", "bpoe_closed",
    "cvar_cross_evaluate", "empirical_superquantile", "left_superquantile",
    "ls_mos_fit", "make", "markowitz_equivalence_check", "markowitz_solve",
    "mc_superquantile", "min_bpoe_portfolio", "min_cvar_portfolio",
    "mos_solve", "oracle_bpoe", "oracle_superquantile", "partial_expectation",
    "reference_fits", "superdistribution_cdf", "superquantile",
]
