"""Validated parameter containers and elementary evaluators for the eleven
supported distribution families.

Each family is an immutable dataclass exposing ``pdf``, ``cdf``, ``quantile``,
``tail_quantile`` (the upper quantile as a stable function of the tail
probability), ``mean``, ``variance``, ``support`` and inverse-transform
``sample``. Moments that diverge are reported as ``math.inf``, never as
errors. ``make``/``from_json``/``to_json`` provide the CLI wire format
``{"family": ..., "params": {...}}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import ClassVar, NamedTuple

import numpy as np

from . import specfun
from .errors import DomainError, ParameterError

_SQRT2 = math.sqrt(2.0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

# |xi| below this is treated as xi == 0 for GPD/GEV to avoid catastrophic
# cancellation near the branch switch
_XI_ZERO = 1e-9


class SupportBound(NamedTuple):
    lower: float
    upper: float


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ParameterError(message)


def _check_prob_open(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"quantile level must lie in (0, 1), got {alpha}")


# --- vectorized kernels used only by the bulk sampler ---------------------

_ACK_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
          1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_ACK_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
          6.680131188771972e+01, -1.328068155288572e+01)
_ACK_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
          -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_ACK_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
          3.754408661907416e+00)


def _norm_ppf_arr(p: np.ndarray) -> np.ndarray:
    """Acklam's rational normal quantile, |rel err| < 1.2e-9 (sampling grade)."""
    p = np.asarray(p, dtype=float)
    out = np.empty_like(p)
    lo = p < 0.02425
    hi = p > 1.0 - 0.02425
    mid = ~(lo | hi)

    def _tail(q):
        return (((((_ACK_C[0] * q + _ACK_C[1]) * q + _ACK_C[2]) * q + _ACK_C[3]) * q
                 + _ACK_C[4]) * q + _ACK_C[5]) / \
               ((((_ACK_D[0] * q + _ACK_D[1]) * q + _ACK_D[2]) * q + _ACK_D[3]) * q + 1.0)

    if lo.any():
        out[lo] = _tail(np.sqrt(-2.0 * np.log(p[lo])))
    if hi.any():
        out[hi] = -_tail(np.sqrt(-2.0 * np.log(1.0 - p[hi])))
    if mid.any():
        q = p[mid] - 0.5
        r = q * q
        out[mid] = (((((_ACK_A[0] * r + _ACK_A[1]) * r + _ACK_A[2]) * r + _ACK_A[3]) * r
                     + _ACK_A[4]) * r + _ACK_A[5]) * q / \
                   (((((_ACK_B[0] * r + _ACK_B[1]) * r + _ACK_B[2]) * r + _ACK_B[3]) * r
                     + _ACK_B[4]) * r + 1.0)
    return out


def _beta_cf_arr(a: float, b: float, x: np.ndarray) -> np.ndarray:
    """Vectorized Lentz continued fraction; converged lanes retire early."""
    x = np.asarray(x, dtype=float).ravel()
    out = np.empty_like(x)
    idx = np.arange(x.size)
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < tiny, tiny, d)
    d = 1.0 / d
    h = d.copy()
    for m in range(1, 400):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = d * c
        h *= delta
        done = np.abs(delta - 1.0) < 1e-15
        if done.any():
            out[idx[done]] = h[done]
            keep = ~done
            if not keep.any():
                return out
            idx, x, c, d, h = idx[keep], x[keep], c[keep], d[keep], h[keep]
    out[idx] = h
    return out


def _betainc_arr(x: np.ndarray, a: float, b: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    edge0 = x <= 0.0
    edge1 = x >= 1.0
    direct = (~edge0) & (~edge1) & (x < (a + 1.0) / (a + b + 2.0))
    swapped = (~edge0) & (~edge1) & (~direct)
    out[edge0] = 0.0
    out[edge1] = 1.0
    ln_norm = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
    if direct.any():
        xd = x[direct]
        front = np.exp(ln_norm + a * np.log(xd) + b * np.log1p(-xd))
        out[direct] = front * _beta_cf_arr(a, b, xd) / a
    if swapped.any():
        xs = x[swapped]
        front = np.exp(ln_norm + a * np.log(xs) + b * np.log1p(-xs))
        out[swapped] = 1.0 - front * _beta_cf_arr(b, a, 1.0 - xs) / b
    return out


def _t_cdf_arr(t: np.ndarray, nu: float) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    z = nu / (t * t + nu)
    ib = _betainc_arr(z, 0.5 * nu, 0.5)
    return np.where(t <= 0.0, 0.5 * ib, 1.0 - 0.5 * ib)


def _t_ppf_arr(u: np.ndarray, nu: float) -> np.ndarray:
    """Standardized Student-t quantile, safeguarded vector Newton.

    Iterates only on unconverged lanes so a handful of slow tail points do
    not drag full-array continued-fraction evaluations along.
    """
    u = np.asarray(u, dtype=float)
    upper_half = u > 0.5
    uu = np.where(upper_half, 1.0 - u, u)   # lower-tail probability <= 0.5
    ln_c = math.lgamma(0.5 * (nu + 1.0)) - math.lgamma(0.5 * nu) \
        - 0.5 * math.log(nu * math.pi)
    # survival asymptote S(t) ~ K * |t|^-nu: outer bracket and tail guess
    k_tail = math.exp(ln_c) * nu ** (0.5 * (nu + 1.0)) / nu
    uu_safe = np.maximum(uu, 1e-300)
    with np.errstate(over="ignore"):
        tail_guess = -(k_tail / uu_safe) ** (1.0 / nu)
        lo = 2.0 * tail_guess - 10.0
    hi = np.zeros_like(uu)
    t = np.where(uu < 0.1, tail_guess,
                 np.minimum(_norm_ppf_arr(uu_safe), -1e-12))
    t = np.maximum(t, lo * 0.75)
    active = np.ones(u.shape, dtype=bool)
    for _ in range(120):
        ta = t[active]
        resid = _t_cdf_arr(ta, nu) - uu[active]
        hi_a = hi[active]
        lo_a = lo[active]
        hi_a = np.where(resid > 0.0, ta, hi_a)
        lo_a = np.where(resid <= 0.0, ta, lo_a)
        pdf = np.exp(ln_c - 0.5 * (nu + 1.0) * np.log1p(ta * ta / nu))
        with np.errstate(divide="ignore", invalid="ignore"):
            t_new = ta - resid / pdf
        bad = ~np.isfinite(t_new) | (t_new <= lo_a) | (t_new >= hi_a)
        t_new = np.where(bad, 0.5 * (lo_a + hi_a), t_new)
        done = np.abs(t_new - ta) <= 1e-12 * (1.0 + np.abs(t_new))
        hi[active] = hi_a
        lo[active] = lo_a
        t[active] = t_new
        still = ~done
        if not still.any():
            break
        idx = np.flatnonzero(active)
        active = np.zeros_like(active)
        active[idx[still]] = True
    return np.where(upper_half, -t, t)


# --- family classes --------------------------------------------------------

@dataclass(frozen=True)
class Distribution:
    """Common surface for the parametric families."""

    family: ClassVar[str] = ""

    def __post_init__(self):
        self._validate()

    def _validate(self) -> None:
        raise NotImplementedError

    # elementary evaluators; subclasses override
    def pdf(self, x: float) -> float:
        raise NotImplementedError

    def cdf(self, x: float) -> float:
        raise NotImplementedError

    def quantile(self, alpha: float) -> float:
        raise NotImplementedError

    def tail_quantile(self, eps: float) -> float:
        """Upper quantile q_(1-eps) as a stable function of the tail mass."""
        if not 0.0 < eps < 1.0:
            raise DomainError(f"tail probability must lie in (0, 1), got {eps}")
        return self.quantile(1.0 - eps)

    def mean(self) -> float:
        raise NotImplementedError

    def variance(self) -> float:
        raise NotImplementedError

    def support(self) -> SupportBound:
        raise NotImplementedError

    def _quantile_array(self, u: np.ndarray) -> np.ndarray:
        return np.array([self.quantile(float(p)) for p in u])

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Inverse-transform sample of size n."""
        u = np.clip(rng.random(n), 1e-300, 1.0 - 1e-16)
        return self._quantile_array(u)

    def params(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_json(self) -> dict:
        return {"family": self.family, "params": self.params()}


@dataclass(frozen=True)
class Exponential(Distribution):
    lam: float
    family: ClassVar[str] = "exponential"

    def _validate(self):
        _require(self.lam > 0, f"Exponential requires lam > 0, got {self.lam}")

    def pdf(self, x):
        return self.lam * math.exp(-self.lam * x) if x >= 0 else 0.0

    def cdf(self, x):
        return -math.expm1(-self.lam * x) if x >= 0 else 0.0

    def quantile(self, alpha):
        _check_prob_open(alpha)
        return -math.log1p(-alpha) / self.lam

    def tail_quantile(self, eps):
        if not 0.0 < eps < 1.0:
            raise DomainError(f"tail probability must lie in (0, 1), got {eps}")
        return -math.log(eps) / self.lam

    def mean(self):
        return 1.0 / self.lam

    def variance(self):
        return 1.0 / self.lam ** 2

    def support(self):
        return SupportBound(0.0, math.inf)

    def _quantile_array(self, u):
        return -np.log1p(-u) / self.lam


@dataclass(frozen=True)
class Pareto(Distribution):
    a: float
    xm: float
    family: ClassVar[str] = "pareto"

    def _validate(self):
        _require(self.a > 0, f"Pareto requires shape a > 0, got {self.a}")
        _require(self.xm > 0, f"Pareto requires scale xm > 0, got {self.xm}")

    def pdf(self, x):
        if x < self.xm:
            return 0.0
        return self.a * self.xm ** self.a / x ** (self.a + 1.0)

    def cdf(self, x):
        if x < self.xm:
            return 0.0
        return 1.0 - (self.xm / x) ** self.a

    def quantile(self, alpha):
        _check_prob_open(alpha)
        return self.xm * (1.0 - alpha) ** (-1.0 / self.a)

    def tail_quantile(self, eps):
        if not 0.0 < eps < 1.0:
            raise DomainError(f"tail probability must lie in (0, 1), got {eps}")
        return self.xm * eps ** (-1.0 / self.a)

    def mean(self):
        return math.inf if self.a <= 1.0 else self.a * self.xm / (self.a - 1.0)

    def variance(self):
        if self.a <= 2.0:
            return math.inf
        return self.a * self.xm ** 2 / ((self.a - 1.0) ** 2 * (self.a - 2.0))

    def support(self):
        return SupportBound(self.xm, math.inf)

    def _quantile_array(self, u):
        return self.xm * (1.0 - u) ** (-1.0 / self.a)


@dataclass(frozen=True)
class GPD(Distribution):
    """Generalized Pareto with location mu, scale s, shape xi."""

    mu: float
    s: float
    xi: float
    family: ClassVar[str] = "gpd"

    def _validate(self):
        _require(self.s > 0, f"GPD requires scale s > 0, got {self.s}")

    @property
    def _xi0(self) -> bool:
        return abs(self.xi) < _XI_ZERO

    def support(self):
        if self.xi < -_XI_ZERO:
            return SupportBound(self.mu, self.mu - self.s / self.xi)
        return SupportBound(self.mu, math.inf)

    def pdf(self, x):
        lo, hi = self.support()
        if x < lo or x > hi:
            return 0.0
        z = (x - self.mu) / self.s
        if self._xi0:
            return math.exp(-z) / self.s
        t = 1.0 + self.xi * z
        if t <= 0.0:
            return 0.0
        return t ** (-1.0 / self.xi - 1.0) / self.s

    def cdf(self, x):
        lo, hi = self.support()
        if x <= lo:
            return 0.0
        if x >= hi:
            return 1.0
        z = (x - self.mu) / self.s
        if self._xi0:
            return -math.expm1(-z)
        return -math.expm1(-math.log1p(self.xi * z) / self.xi)

    def quantile(self, alpha):
        _check_prob_open(alpha)
        if self._xi0:
            return self.mu - self.s * math.log1p(-alpha)
        return self.mu + self.s * math.expm1(-self.xi * math.log1p(-alpha)) / self.xi

    def tail_quantile(self, eps):
        if not 0.0 < eps < 1.0:
            raise DomainError(f"tail probability must lie in (0, 1), got {eps}")
        if self._xi0:
            return self.mu - self.s * math.log(eps)
        return self.mu + self.s * math.expm1(-self.xi * math.log(eps)) / self.xi

    def mean(self):
        if self.xi >= 1.0:
            return math.inf
        return self.mu + self.s / (1.0 - self.xi)

    def variance(self):
        if self.xi >= 0.5:
            return math.inf
        return self.s ** 2 / ((1.0 - self.xi) ** 2 * (1.0 - 2.0 * self.xi))

    def _quantile_array(self, u):
        if self._xi0:
            return self.mu - self.s * np.log1p(-u)
        return self.mu + self.s * np.expm1(-self.xi * np.log1p(-u)) / self.xi


@dataclass(frozen=True)
class Laplace(Distribution):
    mu: float
    b: float
    family: ClassVar[str] = "laplace"

    def _validate(self):
        _require(self.b > 0, f"Laplace requires scale b > 0, got {self.b}")

    def pdf(self, x):
        return math.exp(-abs(x - self.mu) / self.b) / (2.0 * self.b)

    def cdf(self, x):
        z = (x - self.mu) / self.b
        if z < 0:
            return 0.5 * math.exp(z)
        return 1.0 - 0.5 * math.exp(-z)

    def quantile(self, alpha):
        # sign(alpha - 0.5) taken as 0 at the median, so quantile(0.5) = mu
        _check_prob_open(alpha)
        if alpha == 0.5:
            return self.mu
        if alpha < 0.5:
            return self.mu + self.b * math.log(2.0 * alpha)
        return self.mu - self.b * math.log(2.0 * (1.0 - alpha))

    def tail_quantile(self, eps):
        if not 0.0 < eps < 1.0:
            raise DomainError(f"tail probability must lie in (0, 1), got {eps}")
        if eps > 0.5:
            return self.quantile(1.0 - eps)
        return self.mu - self.b * math.log(2.0 * eps)

    def mean(self):
        return self.mu

    def variance(self):
        return 2.0 * self.b ** 2

    def support(self):
        return SupportBound(-math.inf, math.inf)

    def _quantile_array(self, u):
        return np.where(u < 0.5,
                        self.mu + self.b * np.log(2.0 * u),
                        self.mu - self.b * np.log(2.0 * (1.0 - u)))


@dataclass(frozen=True)
class Normal(Distribution):
    mu: float
    sigma: float
    family: ClassVar[str] = "normal"

    def _validate(self):
        _require(self.sigma > 0, f"Normal requires sigma > 0, got {self.sigma}")

    def pdf(self, x):
        z = (x - self.mu) / self.sigma
        return math.exp(-0.5 * z * z) / (self.sigma * _SQRT_2PI)

    def cdf(self, x):
        z = (x - self.mu) / (self.sigma * _SQRT2)
        return 0.5 * math.erfc(-z)

    def quantile(self, alpha):
        _check_prob_open(alpha)
        if alpha < 0.5:
            return self.mu - self.sigma * _SQRT2 * specfun.erfc_inv(2.0 * alpha)
        if alpha > 0.5:
            return self.mu + self.sigma * _SQRT2 * specfun.erfc_inv(2.0 * (1.0 - alpha))
        return self.mu

    def tail_quantile(self, eps):
        if not 0.0 < eps < 1.0:
            raise DomainError(f"tail probability must lie in (0, 1), got {eps}")
        if eps >= 0.5:
            return self.quantile(1.0 - eps)
        return self.mu + self.sigma * _SQRT2 * specfun.erfc_inv(2.0 * eps)

    def mean(self):
        return self.mu

    def variance(self):
        return self.sigma ** 2

    def support(self):
        return SupportBound(-math.inf, math.inf)

    def _quantile_array(self, u):
        return self.mu + self.sigma * _norm_ppf_arr(u)


@dataclass(frozen=True)
class LogNormal(Distribution):
    """log X ~ Normal(mu, s)."""

    mu: float
    s: float
    family: ClassVar[str] = "lognormal"

    def _validate(self):
        _require(self.s > 0, f"LogNormal requires log-scale s > 0, got {self.s}")

    def pdf(self, x):
        if x <= 0:
            return 0.0
        z = (math.log(x) - self.mu) / self.s
        return math.exp(-0.5 * z * z) / (x * self.s * _SQRT_2PI)

    def cdf(self, x):
        if x <= 0:
            return 0.0
        z = (math.log(x) - self.mu) / (self.s * _SQRT2)
        return 0.5 * math.erfc(-z)

    def quantile(self, alpha):
        _check_prob_open(alpha)
        if alpha < 0.5:
            z = -specfun.erfc_inv(2.0 * alpha)
        elif alpha > 0.5:
            z = specfun.erfc_inv(2.0 * (1.0 - alpha))
        else:
            z = 0.0
        return math.exp(self.mu + self.s * _SQRT2 * z)

    def tail_quantile(self, eps):
        if not 0.0 < eps < 1.0:
            raise DomainError(f"tail probability must lie in (0, 1), got {eps}")
        if eps >= 0.5:
            return self.quantile(1.0 - eps)
        return math.exp(self.mu + self.s * _SQRT2 * specfun.erfc_inv(2.0 * eps))

    def mean(self):
        return math.exp(self.mu + 0.5 * self.s ** 2)

    def variance(self):
        return math.expm1(self.s ** 2) * math.exp(2.0 * self.mu + self.s ** 2)

    def support(self):
        return SupportBound(0.0, math.inf)

    def _quantile_array(self, u):
        return np.exp(self.mu + self.s * _norm_ppf_arr(u))


@dataclass(frozen=True)
class Logistic(Distribution):
    mu: float
    s: float
    family: ClassVar[str] = "logistic"

    def _validate(self):
        _require(self.s > 0, f"Logistic requires scale s > 0, got {self.s}")

    def pdf(self, x):
        z = abs(x - self.mu) / self.s
        e = math.exp(-z)
        return e / (self.s * (1.0 + e) ** 2)

    def cdf(self, x):
        return 1.0 / (1.0 + math.exp(-(x - self.mu) / self.s))

    def quantile(self, alpha):
        _check_prob_open(alpha)
        return self.mu + self.s * (math.log(alpha) - math.log1p(-alpha))

    def tail_quantile(self, eps):
        if not 0.0 < eps < 1.0:
            raise DomainError(f"tail probability must lie in (0, 1), got {eps}")
        return self.mu + self.s * (math.log1p(-eps) - math.log(eps))

    def mean(self):
        return self.mu

    def variance(self):
        return self.s ** 2 * math.pi ** 2 / 3.0

    def support(self):
        return SupportBound(-math.inf, math.inf)

    def _quantile_array(self, u):
        return self.mu + self.s * (np.log(u) - np.log1p(-u))


@dataclass(frozen=True)
class StudentT(Distribution):
    """Generalized Student-t with degrees of freedom nu, scale s, location mu."""

    nu: float
    s: float = 1.0
    mu: float = 0.0
    family: ClassVar[str] = "student-t"

    def _validate(self):
        _require(self.nu > 0, f"StudentT requires nu > 0, got {self.nu}")
        _require(self.s > 0, f"StudentT requires scale s > 0, got {self.s}")

    def _ln_c(self) -> float:
        return math.lgamma(0.5 * (self.nu + 1.0)) - math.lgamma(0.5 * self.nu) \
            - 0.5 * math.log(self.nu * math.pi)

    def std_pdf(self, t: float) -> float:
        """Density of the standardized (s=1, mu=0) variate."""
        return math.exp(self._ln_c() - 0.5 * (self.nu + 1.0) * math.log1p(t * t / self.nu))

    def std_cdf(self, t: float) -> float:
        z = self.nu / (t * t + self.nu)
        ib = specfun.reg_inc_beta(z, 0.5 * self.nu, 0.5)
        return 0.5 * ib if t <= 0 else 1.0 - 0.5 * ib

    def _std_lower_quantile(self, p: float) -> float:
        """Standardized quantile for p <= 0.5 by bracketed Newton on the cdf."""
        if p == 0.5:
            return 0.0
        # invert the incomplete-beta tail for the bracket, then polish
        z = specfun.reg_inc_beta_inv(2.0 * p, 0.5 * self.nu, 0.5)
        if z <= 0.0:
            return -math.inf
        t = -math.sqrt(self.nu * (1.0 - z) / z) if z < 1.0 else 0.0
        for _ in range(60):
            resid = self.std_cdf(t) - p
            d = self.std_pdf(t)
            if d <= 0.0:
                break
            step = resid / d
            t -= step
            if abs(step) <= 1e-14 * (1.0 + abs(t)):
                break
        return t

    def pdf(self, x):
        return self.std_pdf((x - self.mu) / self.s) / self.s

    def cdf(self, x):
        return self.std_cdf((x - self.mu) / self.s)

    def quantile(self, alpha):
        _check_prob_open(alpha)
        if alpha < 0.5:
            t = self._std_lower_quantile(alpha)
        elif alpha > 0.5:
            t = -self._std_lower_quantile(1.0 - alpha)
        else:
            t = 0.0
        return self.mu + self.s * t

    def tail_quantile(self, eps):
        if not 0.0 < eps < 1.0:
            raise DomainError(f"tail probability must lie in (0, 1), got {eps}")
        if eps >= 0.5:
            return self.quantile(1.0 - eps)
        return self.mu - self.s * self._std_lower_quantile(eps)

    def mean(self):
        return math.inf if self.nu <= 1.0 else self.mu

    def variance(self):
        if self.nu <= 2.0:
            return math.inf
        return self.s ** 2 * self.nu / (self.nu - 2.0)

    def support(self):
        return SupportBound(-math.inf, math.inf)

    def _quantile_array(self, u):
        return self.mu + self.s * _t_ppf_arr(u, self.nu)


@dataclass(frozen=True)
class Weibull(Distribution):
    lam: float
    k: float
    family: ClassVar[str] = "weibull"

    def _validate(self):
        _require(self.lam > 0, f"Weibull requires scale lam > 0, got {self.lam}")
        _require(self.k > 0, f"Weibull requires shape k > 0, got {self.k}")

    def pdf(self, x):
        if x < 0:
            return 0.0
        z = x / self.lam
        if z == 0.0:
            if self.k == 1.0:
                return 1.0 / self.lam
            return math.inf if self.k < 1.0 else 0.0
        return self.k / self.lam * z ** (self.k - 1.0) * math.exp(-z ** self.k)

    def cdf(self, x):
        if x < 0:
            return 0.0
        return -math.expm1(-((x / self.lam) ** self.k))

    def quantile(self, alpha):
        _check_prob_open(alpha)
        return self.lam * (-math.log1p(-alpha)) ** (1.0 / self.k)

    def tail_quantile(self, eps):
        if not 0.0 < eps < 1.0:
            raise DomainError(f"tail probability must lie in (0, 1), got {eps}")
        return self.lam * (-math.log(eps)) ** (1.0 / self.k)

    def mean(self):
        return self.lam * math.gamma(1.0 + 1.0 / self.k)

    def variance(self):
        g1 = math.gamma(1.0 + 1.0 / self.k)
        g2 = math.gamma(1.0 + 2.0 / self.k)
        return self.lam ** 2 * (g2 - g1 * g1)

    def support(self):
        return SupportBound(0.0, math.inf)

    def _quantile_array(self, u):
        return self.lam * (-np.log1p(-u)) ** (1.0 / self.k)


@dataclass(frozen=True)
class LogLogistic(Distribution):
    a: float
    b: float
    family: ClassVar[str] = "loglogistic"

    def _validate(self):
        _require(self.a > 0, f"LogLogistic requires scale a > 0, got {self.a}")
        _require(self.b > 0, f"LogLogistic requires shape b > 0, got {self.b}")

    def pdf(self, x):
        if x < 0:
            return 0.0
        if x == 0:
            if self.b == 1.0:
                return self.b / self.a
            return math.inf if self.b < 1.0 else 0.0
        z = x / self.a
        return (self.b / self.a) * z ** (self.b - 1.0) / (1.0 + z ** self.b) ** 2

    def cdf(self, x):
        if x <= 0:
            return 0.0
        return 1.0 / (1.0 + (x / self.a) ** (-self.b))

    def quantile(self, alpha):
        _check_prob_open(alpha)
        return self.a * (alpha / (1.0 - alpha)) ** (1.0 / self.b)

    def tail_quantile(self, eps):
        if not 0.0 < eps < 1.0:
            raise DomainError(f"tail probability must lie in (0, 1), got {eps}")
        return self.a * ((1.0 - eps) / eps) ** (1.0 / self.b)

    def mean(self):
        if self.b <= 1.0:
            return math.inf
        c = math.pi / self.b
        return self.a * c / math.sin(c)

    def variance(self):
        if self.b <= 2.0:
            return math.inf
        c = math.pi / self.b
        m1 = c / math.sin(c)
        m2 = 2.0 * c / math.sin(2.0 * c)
        return self.a ** 2 * (m2 - m1 * m1)

    def support(self):
        return SupportBound(0.0, math.inf)

    def _quantile_array(self, u):
        return self.a * (u / (1.0 - u)) ** (1.0 / self.b)


@dataclass(frozen=True)
class GEV(Distribution):
    """Generalized extreme value with location mu, scale s, shape xi."""

    mu: float
    s: float
    xi: float
    family: ClassVar[str] = "gev"

    def _validate(self):
        _require(self.s > 0, f"GEV requires scale s > 0, got {self.s}")

    @property
    def _xi0(self) -> bool:
        return abs(self.xi) < _XI_ZERO

    def support(self):
        if self._xi0:
            return SupportBound(-math.inf, math.inf)
        if self.xi > 0:
            return SupportBound(self.mu - self.s / self.xi, math.inf)
        return SupportBound(-math.inf, self.mu - self.s / self.xi)

    def _t_of(self, x: float) -> float:
        """(1 + xi z)^(-1/xi), the survival kernel; inf/0 outside support."""
        z = (x - self.mu) / self.s
        if self._xi0:
            return math.exp(-z)
        base = 1.0 + self.xi * z
        if base <= 0.0:
            return math.inf if self.xi > 0 else 0.0
        return base ** (-1.0 / self.xi)

    def pdf(self, x):
        lo, hi = self.support()
        if x <= lo or x >= hi:
            return 0.0
        z = (x - self.mu) / self.s
        if self._xi0:
            t = math.exp(-z)
            return t * math.exp(-t) / self.s
        base = 1.0 + self.xi * z
        t = base ** (-1.0 / self.xi)
        return base ** (-1.0 / self.xi - 1.0) * math.exp(-t) / self.s

    def cdf(self, x):
        lo, hi = self.support()
        if x <= lo:
            return 0.0
        if x >= hi:
            return 1.0
        return math.exp(-self._t_of(x))

    def quantile(self, alpha):
        _check_prob_open(alpha)
        y = -math.log(alpha)
        if self._xi0:
            return self.mu - self.s * math.log(y)
        return self.mu + self.s * math.expm1(-self.xi * math.log(y)) / self.xi

    def tail_quantile(self, eps):
        if not 0.0 < eps < 1.0:
            raise DomainError(f"tail probability must lie in (0, 1), got {eps}")
        y = -math.log1p(-eps)   # = -ln(1 - eps), accurate for tiny eps
        if self._xi0:
            return self.mu - self.s * math.log(y)
        return self.mu + self.s * math.expm1(-self.xi * math.log(y)) / self.xi

    def mean(self):
        if self._xi0:
            return self.mu + self.s * specfun.EULER_GAMMA
        if self.xi >= 1.0:
            return math.inf
        return self.mu + self.s * (math.gamma(1.0 - self.xi) - 1.0) / self.xi

    def variance(self):
        if self._xi0:
            return self.s ** 2 * math.pi ** 2 / 6.0
        if self.xi >= 0.5:
            return math.inf
        g1 = math.gamma(1.0 - self.xi)
        g2 = math.gamma(1.0 - 2.0 * self.xi)
        return self.s ** 2 * (g2 - g1 * g1) / self.xi ** 2

    def _quantile_array(self, u):
        y = -np.log(u)
        if self._xi0:
            return self.mu - self.s * np.log(y)
        return self.mu + self.s * np.expm1(-self.xi * np.log(y)) / self.xi


FAMILIES: dict[str, type[Distribution]] = {
    cls.family: cls
    for cls in (Exponential, Pareto, GPD, Laplace, Normal, LogNormal,
                Logistic, StudentT, Weibull, LogLogistic, GEV)
}


def make(family: str, **params: float) -> Distribution:
    """Build a validated distribution from its family tag and parameters."""
    key = family.lower().replace("_", "-")
    if key not in FAMILIES:
        raise ParameterError(
            f"unknown family {family!r}; expected one of {sorted(FAMILIES)}")
    cls = FAMILIES[key]
    expected = {f.name for f in fields(cls)}
    unknown = set(params) - expected
    if unknown:
        raise ParameterError(
            f"{key} does not take parameter(s) {sorted(unknown)}; expected {sorted(expected)}")
    try:
        return cls(**params)
    except TypeError as exc:
        raise ParameterError(f"{key}: {exc}") from exc


def from_json(obj: dict) -> Distribution:
    """Parse {"family": ..., "params": {...}}."""
    try:
        family = obj["family"]
        params = obj["params"]
    except (KeyError, TypeError) as exc:
        raise ParameterError(f"malformed distribution spec: {obj!r}") from exc
    return make(family, **{k: float(v) for k, v in params.items()})
