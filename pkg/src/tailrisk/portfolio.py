"""Parametric portfolio optimization under qualified return distributions.

A family is *qualified* when the left superquantile of any portfolio return
decomposes as  mean - stdev * zeta(alpha, shape)  with a weight-independent
multiplier zeta. Five families qualify here: Normal, Laplace, Logistic,
Student-t (fixed nu > 2) and GEV (fixed xi < 1/2). Exponential, Pareto, GPD
and Weibull are rejected: their mean/stdev coupling and PDF shapes do not
match real asset returns.

Losses are the negative of returns throughout; thresholds are loss
thresholds. Two solved problems:

  * minimal CVaR at level alpha   ==  max  w.eta - zeta(alpha) * sqrt(w.S.w)
  * minimal bPOE at threshold x   ==  max  (w.eta + x) / sqrt(w.S.w)

The second objective has no shape parameter in it, so one weight vector is
bPOE-optimal for every qualified family simultaneously; only the reported
bPOE value depends on the family.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import specfun
from ._optim import multi_start_max, project_box_simplex
from .distributions import GEV, Laplace, Logistic, Normal, StudentT
from .errors import ConvergenceError, DomainError, ParameterError
from .tail_metrics import left_superquantile

QUALIFIED_FAMILIES = ("normal", "laplace", "logistic", "student-t", "gev")
_REJECTED = {"exponential", "pareto", "gpd", "weibull", "lognormal", "loglogistic"}


@dataclass(frozen=True)
class QualifiedFamily:
    """A distribution family admissible for the parametric portfolio problems."""

    family: str
    nu: float | None = None    # student-t degrees of freedom, > 2
    xi: float | None = None    # gev shape, < 1/2

    def __post_init__(self):
        name = self.family.lower().replace("_", "-")
        if name == "t":
            name = "student-t"
        object.__setattr__(self, "family", name)
        if name in _REJECTED:
            raise ParameterError(
                f"family {name!r} is not qualified for portfolio optimization "
                "(its moment structure does not match asset returns)")
        if name not in QUALIFIED_FAMILIES:
            raise ParameterError(
                f"unknown family {name!r}; qualified families: {QUALIFIED_FAMILIES}")
        if name == "student-t":
            if self.nu is None or self.nu <= 2.0:
                raise ParameterError(
                    f"student-t requires nu > 2 for unit-variance standardization, got {self.nu}")
        elif name == "gev":
            if self.xi is None or self.xi >= 0.5:
                raise ParameterError(
                    f"gev requires xi < 1/2 for finite variance, got {self.xi}")
        elif self.nu is not None or self.xi is not None:
            raise ParameterError(f"family {name!r} takes no shape parameter")

    def _unit_variance_member(self):
        if self.family == "normal":
            return Normal(0.0, 1.0)
        if self.family == "laplace":
            return Laplace(0.0, 1.0 / math.sqrt(2.0))
        if self.family == "logistic":
            return Logistic(0.0, math.sqrt(3.0) / math.pi)
        if self.family == "student-t":
            return StudentT(self.nu, math.sqrt((self.nu - 2.0) / self.nu), 0.0)
        return GEV(0.0, 1.0, self.xi)

    def zeta(self, alpha: float) -> float:
        """Standardized tail multiplier: stdev-to-CVaR conversion at level alpha.

        Computed from the definition, zeta = (mean - left_superquantile at
        level 1-alpha) / stdev, on a unit-variance member; location/scale
        drop out by construction.
        """
        if not 0.0 < alpha < 1.0:
            raise DomainError(f"zeta level must lie in (0, 1), got {alpha}")
        d = self._unit_variance_member()
        sd = math.sqrt(d.variance())
        return (d.mean() - left_superquantile(d, 1.0 - alpha)) / sd

    def label(self) -> str:
        if self.family == "student-t":
            return f"student-t(nu={self.nu:g})"
        if self.family == "gev":
            return f"gev(xi={self.xi:g})"
        return self.family


def default_report_families() -> tuple[QualifiedFamily, ...]:
    """The four elliptical families used in the comparison reports."""
    return (QualifiedFamily("normal"), QualifiedFamily("student-t", nu=3.0),
            QualifiedFamily("laplace"), QualifiedFamily("logistic"))


@dataclass(frozen=True)
class AssetUniverse:
    """Expected returns, stdevs and correlations for a set of assets.

    Returns and stdevs are per-period fractions. The covariance matrix is
    derived as diag(stdev) @ corr @ diag(stdev) and checked for positive
    semidefiniteness.
    """

    names: tuple[str, ...]
    expected_returns: np.ndarray
    stdevs: np.ndarray
    correlations: np.ndarray
    covariance: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        eta = np.asarray(self.expected_returns, dtype=float)
        sd = np.asarray(self.stdevs, dtype=float)
        corr = np.asarray(self.correlations, dtype=float)
        n = len(self.names)
        if eta.shape != (n,) or sd.shape != (n,):
            raise ParameterError(
                f"expected {n} returns and stdevs, got shapes {eta.shape}, {sd.shape}")
        if corr.shape != (n, n):
            raise ParameterError(
                f"correlation matrix must be {n}x{n}, got {corr.shape}")
        if np.any(sd <= 0):
            raise ParameterError("stdevs must be positive")
        if np.max(np.abs(corr - corr.T)) > 1e-12:
            raise ParameterError("correlation matrix must be symmetric")
        if np.max(np.abs(np.diag(corr) - 1.0)) > 1e-12:
            raise ParameterError("correlation matrix must have a unit diagonal")
        if np.max(np.abs(corr)) > 1.0 + 1e-12:
            raise ParameterError("correlations must lie in [-1, 1]")
        cov = np.outer(sd, sd) * corr
        if np.linalg.eigvalsh(cov).min() < -1e-10:
            raise ParameterError("covariance matrix is not positive semidefinite")
        object.__setattr__(self, "expected_returns", eta)
        object.__setattr__(self, "stdevs", sd)
        object.__setattr__(self, "correlations", corr)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "covariance", cov)

    @property
    def size(self) -> int:
        return len(self.names)

    @classmethod
    def from_csv(cls, assets_path: str | Path,
                 correlations_path: str | Path | None = None) -> "AssetUniverse":
        """Load from an assets CSV (name, expected_return, stdev) plus a
        square correlations CSV, or from a single combined file whose extra
        columns carry the correlation block."""
        rows = _read_csv(assets_path)
        if not rows:
            raise ParameterError(f"empty assets file: {assets_path}")
        header = [h.strip() for h in rows[0]]
        base = ["name", "expected_return", "stdev"]
        if [h.lower() for h in header[:3]] != base:
            raise ParameterError(
                f"assets file must start with columns {base}, got {header[:3]}")
        names = [r[0].strip() for r in rows[1:]]
        eta = [float(r[1]) for r in rows[1:]]
        sd = [float(r[2]) for r in rows[1:]]
        if len(header) > 3:
            if correlations_path is not None:
                raise ParameterError(
                    "combined assets file already carries correlations")
            if header[3:] != names:
                raise ParameterError(
                    f"correlation columns {header[3:]} do not match asset names {names}")
            corr = [[float(v) for v in r[3:]] for r in rows[1:]]
        else:
            if correlations_path is None:
                raise ParameterError("correlations file required")
            crows = _read_csv(correlations_path)
            cheader = [h.strip() for h in crows[0][1:]]
            cnames = [r[0].strip() for r in crows[1:]]
            if cheader != names or cnames != names:
                raise ParameterError(
                    f"correlation matrix names {cheader} do not match assets {names}")
            corr = [[float(v) for v in r[1:]] for r in crows[1:]]
        return cls(tuple(names), np.array(eta), np.array(sd), np.array(corr))

    @classmethod
    def bundled(cls) -> "AssetUniverse":
        """The packaged six-index MSCI monthly-return dataset (fractions)."""
        path = resources.files("tailrisk").joinpath("data/msci_table1.csv")
        with resources.as_file(path) as p:
            return cls.from_csv(p)


def _read_csv(path: str | Path) -> list[list[str]]:
    with open(path, newline="") as fh:
        return [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]


@dataclass(frozen=True)
class PortfolioProblem:
    """Budgeted, box-bounded weight selection with a tail objective."""

    universe: AssetUniverse
    objective: str                      # "cvar" | "bpoe"
    level: float | None = None          # alpha, for the cvar objective
    threshold: float | None = None      # loss threshold x, for bpoe
    lower: object = 0.0
    upper: object = 1.0

    def __post_init__(self):
        if self.objective not in ("cvar", "bpoe"):
            raise ParameterError(f"objective must be 'cvar' or 'bpoe', got {self.objective!r}")
        if self.objective == "cvar":
            if self.level is None or not 0.0 < self.level < 1.0:
                raise ParameterError(f"cvar objective needs level in (0, 1), got {self.level}")
            if self.threshold is not None:
                raise ParameterError("cvar objective takes no threshold")
        else:
            if self.threshold is None or not math.isfinite(self.threshold):
                raise ParameterError(f"bpoe objective needs a finite threshold, got {self.threshold}")
            if self.level is not None:
                raise ParameterError("bpoe objective takes no level")
        n = self.universe.size
        lo = np.broadcast_to(np.asarray(self.lower, dtype=float), (n,)).copy()
        hi = np.broadcast_to(np.asarray(self.upper, dtype=float), (n,)).copy()
        if np.any(lo > hi) or lo.sum() > 1.0 + 1e-12 or hi.sum() < 1.0 - 1e-12:
            raise DomainError(
                f"infeasible bounds: need lower <= upper with sum(lower) <= 1 <= sum(upper)")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)


@dataclass
class PortfolioReport:
    names: tuple[str, ...]
    weights: np.ndarray
    expected_return: float
    stdev: float
    objective: str
    objective_value: float
    alpha_star: float | None = None
    lambda_equiv: float | None = None
    bpoe_by_family: dict[str, float] | None = None
    kkt_residual: float = math.nan

    def to_json(self) -> dict:
        out = {
            "weights": {n: float(w) for n, w in zip(self.names, self.weights)},
            "return": self.expected_return,
            "stdev": self.stdev,
            "objective": self.objective,
            "objective_value": self.objective_value,
        }
        if self.alpha_star is not None:
            out["alpha_star"] = self.alpha_star
        if self.lambda_equiv is not None:
            out["lambda_equiv"] = self.lambda_equiv
        if self.bpoe_by_family is not None:
            out["bpoe_by_family"] = self.bpoe_by_family
        return out


def _max_linear(coef: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> float:
    """Maximum of coef.w over the box-bounded simplex (greedy fill)."""
    w = lower.copy()
    budget = 1.0 - w.sum()
    for i in np.argsort(coef)[::-1]:
        room = upper[i] - w[i]
        add = min(room, budget)
        w[i] += add
        budget -= add
        if budget <= 0:
            break
    return float(w @ coef)


def _default_starts(n: int) -> list[np.ndarray]:
    equal = np.full(n, 1.0 / n)
    starts = [equal]
    for i in range(min(4, n)):
        corner = np.zeros(n)
        corner[i] = 1.0
        starts.append(0.9 * corner + 0.1 * equal)
    return starts


def _solve(problem: PortfolioProblem, objective, gradient,
           grad_tol: float = 1e-9) -> tuple[np.ndarray, float, float]:
    lo = problem.lower
    hi = problem.upper
    w, f_w, gp = multi_start_max(objective, gradient, _default_starts(problem.universe.size),
                                 lo, hi, grad_tol=grad_tol)
    if gp > 1e-8:
        raise ConvergenceError("portfolio solver did not reach KKT tolerance",
                               {"gradient_projection_norm": gp})
    return w, f_w, gp


def min_cvar_portfolio(problem: PortfolioProblem,
                       family: QualifiedFamily) -> PortfolioReport:
    """Weights minimizing the loss CVaR at the problem's level."""
    if problem.objective != "cvar":
        raise ParameterError("problem does not carry a cvar objective")
    u = problem.universe
    eta, cov = u.expected_returns, u.covariance
    z = family.zeta(problem.level)

    def f(w: np.ndarray) -> float:
        return float(w @ eta - z * math.sqrt(max(w @ cov @ w, 0.0)))

    def g(w: np.ndarray) -> np.ndarray:
        cw = cov @ w
        sd = math.sqrt(max(float(w @ cw), 1e-30))
        return eta - z * cw / sd

    w, f_w, gp = _solve(problem, f, g)
    ret = float(w @ eta)
    sd = math.sqrt(float(w @ cov @ w))
    # lambda matching the half-quadratic Markowitz utility w.eta - (l/2) w.S.w
    lam = z / sd
    return PortfolioReport(u.names, w, ret, sd, "cvar",
                           objective_value=-f_w, alpha_star=problem.level,
                           lambda_equiv=lam, kkt_residual=gp)


def _invert_zeta(family: QualifiedFamily, target: float) -> float:
    """Level alpha with zeta(alpha) = target; clamps at the search window."""
    lo, hi = 1e-9, 1.0 - 1e-9
    if target <= family.zeta(lo):
        return lo
    if target >= family.zeta(hi):
        return hi
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if family.zeta(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def min_bpoe_portfolio(problem: PortfolioProblem, family: QualifiedFamily,
                       report_families: tuple[QualifiedFamily, ...] | None = None
                       ) -> PortfolioReport:
    """Weights minimizing bPOE of the loss at the problem's threshold.

    The reduced objective (generalized Sharpe ratio) is family-free, so the
    weights are optimal for every qualified family at once; per-family bPOE
    values at those same weights go into ``bpoe_by_family``.
    """
    if problem.objective != "bpoe":
        raise ParameterError("problem does not carry a bpoe objective")
    u = problem.universe
    eta, cov = u.expected_returns, u.covariance
    x = problem.threshold
    if _max_linear(eta, problem.lower, problem.upper) + x <= 0.0:
        raise DomainError(
            f"threshold {x} leaves no feasible portfolio with w.eta + x > 0")

    # maximize log((w.eta + x) / sqrt(w.S.w)): same argmax, O(1) gradients
    def f(w: np.ndarray) -> float:
        num = float(w @ eta + x)
        if num <= 0.0:
            return -math.inf
        return math.log(num) - 0.5 * math.log(max(float(w @ cov @ w), 1e-30))

    def g(w: np.ndarray) -> np.ndarray:
        cw = cov @ w
        num = float(w @ eta + x)
        return eta / max(num, 1e-30) - cw / max(float(w @ cw), 1e-30)

    w, log_ratio, gp = _solve(problem, f, g)
    ratio = math.exp(log_ratio)
    ret = float(w @ eta)
    sd = math.sqrt(float(w @ cov @ w))
    alpha_star = _invert_zeta(family, ratio) if ratio > 0.0 else 1e-9
    value = 1.0 - alpha_star if ratio > 0.0 else 1.0
    if report_families is None:
        report_families = default_report_families()
    by_family = {}
    for fam in report_families:
        a = _invert_zeta(fam, ratio) if ratio > 0.0 else 1e-9
        by_family[fam.label()] = 1.0 - a if ratio > 0.0 else 1.0
    return PortfolioReport(u.names, w, ret, sd, "bpoe",
                           objective_value=value, alpha_star=alpha_star,
                           bpoe_by_family=by_family, kkt_residual=gp)


def cvar_cross_evaluate(weights: np.ndarray, universe: AssetUniverse,
                        family: QualifiedFamily, alpha: float) -> float:
    """Loss CVaR of fixed weights under the given family at level alpha."""
    w = np.asarray(weights, dtype=float)
    ret = float(w @ universe.expected_returns)
    sd = math.sqrt(float(w @ universe.covariance @ w))
    return -ret + sd * family.zeta(alpha)


def markowitz_solve(universe: AssetUniverse, lam: float,
                    lower=0.0, upper=1.0) -> np.ndarray:
    """Maximize w.eta - (lam/2) w.S.w over the box-bounded simplex."""
    if lam < 0:
        raise ParameterError(f"trade-off lambda must be >= 0, got {lam}")
    eta, cov = universe.expected_returns, universe.covariance
    n = universe.size
    lo = np.broadcast_to(np.asarray(lower, dtype=float), (n,)).copy()
    hi = np.broadcast_to(np.asarray(upper, dtype=float), (n,)).copy()

    def f(w):
        return float(w @ eta - 0.5 * lam * (w @ cov @ w))

    def g(w):
        return eta - lam * (cov @ w)

    w, _, gp = multi_start_max(f, g, _default_starts(n), lo, hi, grad_tol=1e-10)
    if gp > 1e-8:
        raise ConvergenceError("Markowitz solver did not reach KKT tolerance",
                               {"gradient_projection_norm": gp})
    return w


def markowitz_equivalence_check(w_cvar: np.ndarray, universe: AssetUniverse,
                                lam: float, lower=0.0, upper=1.0,
                                tol: float = 5e-3) -> tuple[bool, float]:
    """Re-solve the mean-variance problem at lam and compare weight vectors.

    Returns (weights match within tol, max per-weight gap).
    """
    w_mark = markowitz_solve(universe, lam, lower, upper)
    gap = float(np.max(np.abs(np.asarray(w_cvar, dtype=float) - w_mark)))
    return gap <= tol, gap


def min_variance_portfolio(universe: AssetUniverse, lower=0.0, upper=1.0) -> np.ndarray:
    """Global minimum-variance weights on the box-bounded simplex."""
    cov = universe.covariance
    n = universe.size
    lo = np.broadcast_to(np.asarray(lower, dtype=float), (n,)).copy()
    hi = np.broadcast_to(np.asarray(upper, dtype=float), (n,)).copy()

    def f(w):
        return -float(w @ cov @ w)

    def g(w):
        return -2.0 * (cov @ w)

    w, _, _ = multi_start_max(f, g, _default_starts(n), lo, hi, grad_tol=1e-10)
    return w


def efficient_frontier(universe: AssetUniverse, family: QualifiedFamily,
                       objective: str, grid: np.ndarray,
                       lower=0.0, upper=1.0) -> list[dict]:
    """Sweep the level (cvar) or threshold (bpoe) and record each optimum."""
    rows = []
    for v in grid:
        if objective == "cvar":
            prob = PortfolioProblem(universe, "cvar", level=float(v),
                                    lower=lower, upper=upper)
            rep = min_cvar_portfolio(prob, family)
            key = "alpha"
        else:
            prob = PortfolioProblem(universe, "bpoe", threshold=float(v),
                                    lower=lower, upper=upper)
            rep = min_bpoe_portfolio(prob, family)
            key = "threshold"
        row = {key: float(v), "objective_value": rep.objective_value,
               "return": rep.expected_return, "stdev": rep.stdev}
        row.update({n: float(w) for n, w in zip(rep.names, rep.weights)})
        rows.append(row)
    return rows
