"""First-principles verification engine.

Computes the superquantile by adaptive quadrature of the quantile function
and bPOE by root finding on that quadrature, so every closed form in
``tail_metrics`` has a non-circular reference. A Monte-Carlo tail average
provides a third, sampling-based route.

The quantile integral (1/(1-a)) * int_a^1 q_p dp is evaluated under two
changes of variable that tame both endpoint singularities:

  * left part  (p <= 1/2):  p = exp(-t), so an unbounded-below quantile at
    p -> 0 turns into an exponentially damped integrand;
  * right part (p >= 1/2):  p = 1 - exp(-y), marched over exponentially
    decaying segments; the quantile is evaluated through tail_quantile so
    no precision is lost as p -> 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._quad import adaptive_quad
from .distributions import Distribution
from .errors import ConvergenceError, DomainError, OracleError

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class OracleConfig:
    """Settings for the verification engine."""

    quad_abs_tol: float = 1e-10
    quad_rel_tol: float = 1e-9
    max_subdivisions: int = 4000
    mc_samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.quad_abs_tol <= 0 or self.quad_rel_tol <= 0:
            raise DomainError("quadrature tolerances must be positive")
        if self.mc_samples < 1000:
            raise DomainError(f"mc_samples must be >= 1000, got {self.mc_samples}")
        if self.max_subdivisions < 15:
            raise DomainError("max_subdivisions too small for a single panel")


@dataclass(frozen=True)
class OracleResult:
    value: float
    error_estimate: float

    def to_json(self) -> dict:
        return {"value": self.value, "error_estimate": self.error_estimate}


def _march_decaying(f, y0: float, atol: float, rtol_scale: float,
                    limit: int, seg: float = 6.0) -> tuple[float, float]:
    """Integrate f over [y0, inf) as a sum of segments of width ``seg``.

    Requires eventually-decaying segment contributions; stops once a segment
    adds less than the tolerance and is smaller than its predecessor.
    """
    total = 0.0
    err = 0.0
    prev = math.inf
    y = y0
    for _ in range(200):
        val, e = adaptive_quad(f, y, y + seg, atol=atol, rtol=1e-12, limit=limit)
        total += val
        err += e
        if abs(val) < max(atol, rtol_scale * abs(total)) and abs(val) <= prev:
            # bound the truncated mass by a geometric continuation
            err += abs(val)
            return total, err
        prev = abs(val)
        y += seg
    raise OracleError("semi-infinite tail integral did not decay",
                      {"start": y0, "reached": y, "last_segment": prev})


def oracle_superquantile(d: Distribution, alpha: float,
                         cfg: OracleConfig = OracleConfig()) -> OracleResult:
    """Quadrature-of-the-quantile superquantile with an error estimate."""
    if not 0.0 <= alpha < 1.0:
        raise DomainError(f"superquantile level must lie in [0, 1), got {alpha}")
    m = d.mean()
    if not math.isfinite(m):
        raise DomainError("oracle requires a finite mean")
    atol = cfg.quad_abs_tol
    limit = cfg.max_subdivisions
    total = 0.0
    err = 0.0
    try:
        if alpha < 0.5:
            # int_alpha^0.5 q_p dp with p = exp(-t)
            def left(t: float) -> float:
                p = math.exp(-t)
                return d.quantile(p) * p

            if alpha == 0.0:
                val, e = _march_decaying(left, _LN2, atol, cfg.quad_rel_tol, limit)
            else:
                val, e = adaptive_quad(left, _LN2, -math.log(alpha),
                                       atol=atol, rtol=1e-12, limit=limit)
            total += val
            err += e
        y0 = -math.log1p(-alpha) if alpha >= 0.5 else _LN2

        # int_{max(alpha, 0.5)}^1 q_p dp with p = 1 - exp(-y)
        def right(y: float) -> float:
            return d.tail_quantile(math.exp(-y)) * math.exp(-y)

        val, e = _march_decaying(right, y0, atol, cfg.quad_rel_tol, limit)
        total += val
        err += e
    except ConvergenceError as exc:
        raise OracleError(f"oracle quadrature failed: {exc}",
                          getattr(exc, "diagnostics", {})) from exc
    scale = 1.0 - alpha
    return OracleResult(total / scale, err / scale)


def oracle_bpoe(d: Distribution, x: float,
                cfg: OracleConfig = OracleConfig()) -> OracleResult:
    """bPOE by root finding on the quadrature superquantile."""
    m = d.mean()
    if not math.isfinite(m):
        raise DomainError("oracle requires a finite mean")
    upper = d.support().upper
    if not m < x < upper:
        raise DomainError(f"threshold must lie in (mean, sup) = ({m}, {upper}), got {x}")

    def residual(alpha: float) -> float:
        return oracle_superquantile(d, alpha, cfg).value - x

    lo, hi = 0.0, 0.5
    for _ in range(60):
        if residual(hi) >= 0.0:
            break
        lo = hi
        hi = 1.0 - 0.5 * (1.0 - hi)
        if 1.0 - hi < 1e-13:
            break
    # plain bisection; each evaluation is a full quadrature
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if residual(mid) < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12:
            break
    alpha = 0.5 * (lo + hi)
    quad_err = oracle_superquantile(d, alpha, cfg).error_estimate
    return OracleResult(1.0 - alpha, max(hi - lo, quad_err))


def mc_superquantile(d: Distribution, alpha: float,
                     cfg: OracleConfig = OracleConfig()) -> tuple[float, float]:
    """Monte-Carlo tail average: (estimate, standard error).

    Inverse-transform sampling with an explicitly seeded generator; the
    standard error comes from the influence function of CVaR, so it covers
    both tail-average and quantile-estimation noise.
    """
    if not 0.0 <= alpha < 1.0:
        raise DomainError(f"superquantile level must lie in [0, 1), got {alpha}")
    rng = np.random.default_rng(cfg.seed)
    x = d.sample(cfg.mc_samples, rng)
    n = x.size
    if alpha == 0.0:
        return float(x.mean()), float(x.std(ddof=1) / math.sqrt(n))
    xs = np.sort(x)
    k = int(math.ceil(n * alpha - 1e-12))
    q = xs[max(k - 1, 0)]
    tail = np.maximum(x - q, 0.0)
    estimate = q + tail.mean() / (1.0 - alpha)
    influence = tail / (1.0 - alpha) - tail.mean() / (1.0 - alpha)
    stderr = float(np.sqrt(np.sum(influence ** 2)) / n)
    return float(estimate), stderr
