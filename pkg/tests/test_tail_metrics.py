import math

import numpy as np
import pytest

from tailrisk import distributions as dist
from tailrisk import specfun as sf
from tailrisk import tail_metrics as tm
from tailrisk._quad import adaptive_quad
from tailrisk.errors import DomainError

ALL_FAMILIES = [
    dist.Exponential(1.3), dist.Pareto(1.5, 2.0), dist.GPD(-1.0, 2.0, 0.3),
    dist.GPD(0.0, 1.0, -0.5), dist.Laplace(1.0, 2.0), dist.Normal(1.0, 2.0),
    dist.LogNormal(0.5, 0.8), dist.Logistic(-2.0, 1.5), dist.StudentT(2.5, 2.0, 1.0),
    dist.Weibull(0.5, 1.4), dist.LogLogistic(2.0, 3.0), dist.GEV(1.0, 2.0, 0.3),
    dist.GEV(1.0, 2.0, -0.2), dist.GEV(0.0, 1.0, 0.0),
    # finite-mean, infinite-variance and strongly bounded edge regimes
    dist.Pareto(1.2, 1.0), dist.GPD(0.0, 1.0, -1.5), dist.GEV(0.0, 1.0, 0.7),
    dist.StudentT(1.5), dist.LogLogistic(1.0, 1.1),
]


# --- superquantile -----------------------------------------------------------

def test_superquantile_at_zero_is_mean():
    for d in ALL_FAMILIES:
        assert tm.superquantile(d, 0.0) == d.mean()


def test_superquantile_spot_values():
    lam = 0.7
    for alpha in (0.0, 0.3, 0.9):
        expected = (-math.log(1 - alpha) + 1) / lam
        assert abs(tm.superquantile(dist.Exponential(lam), alpha) - expected) <= 1e-14
    assert abs(tm.superquantile(dist.Pareto(2.0, 1.0), 0.0) - 2.0) <= 1e-15
    # branch boundary of the two-piece Laplace formula: mu + b at alpha = 1/2
    assert abs(tm.superquantile(dist.Laplace(0.0, 1.0), 0.5) - 1.0) <= 1e-14
    # standard normal at alpha = 1/2: pdf(0)/0.5
    expected = 2.0 / math.sqrt(2 * math.pi)
    assert abs(tm.superquantile(dist.Normal(0.0, 1.0), 0.5) - expected) <= 1e-14


def test_superquantile_monotone_and_dominates_quantile():
    grid = [0.01 * i for i in range(1, 100)]
    for d in ALL_FAMILIES:
        values = [tm.superquantile(d, a) for a in grid]
        assert all(x < y for x, y in zip(values, values[1:]))
        for a, v in zip(grid, values):
            assert v >= d.quantile(a)


def test_superquantile_domain_and_infinite_mean():
    with pytest.raises(DomainError):
        tm.superquantile(dist.Normal(0, 1), 1.0)
    with pytest.raises(DomainError):
        tm.superquantile(dist.Normal(0, 1), -0.1)
    for d in (dist.Pareto(0.9, 1.0), dist.GPD(0, 1, 1.5), dist.StudentT(1.0),
              dist.GEV(0, 1, 1.2), dist.LogLogistic(1.0, 0.8)):
        assert tm.superquantile(d, 0.5) == math.inf
        assert tm.bpoe(d, 1e9).value == 1.0


# --- closed-form bPOE --------------------------------------------------------

def test_bpoe_closed_exponential():
    d = dist.Exponential(0.8)
    assert tm.bpoe_closed(d, d.mean()).value == 1.0
    x = 3.0
    assert abs(tm.bpoe_closed(d, x).value - math.exp(1 - 0.8 * x)) <= 1e-15


def test_bpoe_closed_pareto():
    d = dist.Pareto(2.0, 1.0)
    assert abs(tm.bpoe_closed(d, 4.0).value - 0.25) <= 1e-15
    # cross-check against root finding on the superquantile
    assert abs(tm.bpoe_by_root(d, 4.0).value - 0.25) <= 1e-9


def test_bpoe_closed_gpd_support_edge():
    d = dist.GPD(0.0, 1.0, -0.5)   # supported on [0, 2]
    assert tm.bpoe_closed(d, 2.0).value == 0.0
    assert tm.bpoe_closed(d, 5.0).value == 0.0
    assert tm.bpoe_closed(d, d.mean()).value == 1.0


def test_bpoe_closed_laplace_branches():
    d = dist.Laplace(0.0, 1.0)
    # both branch formulas meet at x = mu + b with value 1/2
    exp_branch = 0.5 * math.exp(1.0 - 1.0)
    w = sf.lambert_w(-2.0 * math.exp(-2.0), sf.WBranch.LOWER)
    lower_branch = 1.0 + 1.0 / w
    assert abs(exp_branch - 0.5) <= 1e-15
    assert abs(lower_branch - 0.5) <= 1e-12
    assert abs(tm.bpoe_closed(d, 1.0).value - 0.5) <= 1e-12
    # interior point of the Lambert branch agrees with root finding
    for x in (0.2, 0.5, 0.9):
        assert abs(tm.bpoe_closed(d, x).value - tm.bpoe_by_root(d, x).value) <= 1e-10
    assert tm.bpoe_closed(d, 0.0).value == 1.0   # x at the mean, W argument 0


def test_bpoe_closed_rejects_other_families():
    with pytest.raises(DomainError):
        tm.bpoe_closed(dist.Normal(0, 1), 1.0)


def test_bpoe_clamps():
    d = dist.Exponential(1.0)
    below = tm.bpoe(d, 0.2)
    assert below.value == 1.0 and below.clamped
    r = tm.bpoe(dist.GPD(0.0, 1.0, -0.5), 3.0)
    assert r.value == 0.0 and r.clamped


# --- engines agree -----------------------------------------------------------

def test_root_engine_matches_closed_forms():
    assert abs(tm.bpoe_by_root(dist.Exponential(1.0), 2.0).value - math.exp(-1)) <= 1e-9
    for d in (dist.Exponential(2.0), dist.Pareto(1.5, 2.0), dist.GPD(-1, 2, 0.3),
              dist.Laplace(1, 2)):
        for alpha in (0.05, 0.5, 0.95):
            x = tm.superquantile(d, alpha)
            assert abs(tm.bpoe_by_root(d, x).value - tm.bpoe_closed(d, x).value) <= 1e-10


def test_root_engine_at_mean():
    for d in ALL_FAMILIES:
        assert tm.bpoe_by_root(d, d.mean()).value == 1.0


def test_logistic_entropy_root_identity():
    # H(alpha)/(1-alpha) = (x - mu)/s at alpha = 1/2 means x = 2 s ln 2
    d = dist.Logistic(0.0, 1.0)
    x = 2.0 * math.log(2.0)
    assert abs(tm.bpoe_by_root(d, x).value - 0.5) <= 1e-10


def test_minimization_engine_matches_root():
    for d in (dist.Normal(0.0, 1.0), dist.Normal(1.0, 2.0),
              dist.Logistic(0.0, 1.0), dist.Logistic(-2.0, 1.5)):
        for alpha in (0.02, 0.3, 0.7, 0.97):
            x = tm.superquantile(d, alpha)
            r_min = tm.bpoe_by_minimization(d, x)
            r_root = tm.bpoe_by_root(d, x)
            assert abs(r_min.value - r_root.value) <= 1e-8
            assert abs(r_min.quantile_star - d.quantile(1.0 - r_min.value)) <= 1e-7


def test_normal_minimization_equals_root_at_one():
    d = dist.Normal(0.0, 1.0)
    assert abs(tm.bpoe_by_minimization(d, 1.0).value
               - tm.bpoe_by_root(d, 1.0).value) <= 1e-8


def test_logistic_stationarity_residual():
    d = dist.Logistic(0.0, 1.0)
    for x in (0.5, 1.0, 3.0):
        r = tm.bpoe_by_minimization(d, x)
        g = r.quantile_star
        pe = math.log(1.0 + math.exp(-g))
        assert abs(pe / (x - g) - (1.0 - d.cdf(g))) <= 1e-8


def test_bpoe_dominates_poe():
    for d in ALL_FAMILIES:
        m = d.mean()
        for x in (m + 0.3, m + 1.0, m + 3.0):
            if x >= d.support().upper:
                continue
            assert tm.bpoe(d, x).value >= 1.0 - d.cdf(x) - 1e-12
    # extreme threshold: the alpha*-tail average equals x, so the buffered
    # probability must still dominate the plain exceedance probability
    d = dist.Normal(0.0, 1.0)
    assert tm.bpoe(d, 10.0).value >= 1.0 - d.cdf(10.0)


def test_bpoe_nonincreasing_in_threshold():
    for d in ALL_FAMILIES:
        if not math.isfinite(d.mean()):
            continue
        lo = d.mean()
        hi = min(d.support().upper, d.tail_quantile(1e-4))
        xs = [lo + (hi - lo) * i / 25 for i in range(25)]
        vals = [tm.bpoe(d, x).value for x in xs]
        assert all(a >= b - 1e-10 for a, b in zip(vals, vals[1:])), d


def test_minimization_engine_domain():
    with pytest.raises(DomainError):
        tm.bpoe_by_minimization(dist.Weibull(1.0, 2.0), 3.0)
    with pytest.raises(DomainError):
        tm.bpoe_by_minimization(dist.Normal(0, 1), -0.5)


# --- inverse consistency -----------------------------------------------------

@pytest.mark.parametrize("d", ALL_FAMILIES, ids=lambda d: repr(d))
def test_inverse_consistency(d):
    for i in range(1, 100, 7):
        alpha = i / 100
        x = tm.superquantile(d, alpha)
        assert abs(tm.bpoe(d, x).value - (1.0 - alpha)) <= 1e-8


# --- corollary identities ----------------------------------------------------

def test_exponential_poe_shift_identity():
    # bPOE(x) equals the plain exceedance probability at x - mean
    d = dist.Exponential(1.7)
    m = d.mean()
    for i in range(100):
        x = m + 0.05 * i
        poe_shifted = 1.0 - d.cdf(x - m)
        assert abs(tm.bpoe_closed(d, x).value - poe_shifted) <= 1e-12
    for i in range(1, 100):
        alpha = i / 100
        assert abs(tm.superquantile(d, alpha) - (d.quantile(alpha) + m)) <= 1e-12


def test_pareto_poe_scaling_identity():
    d = dist.Pareto(2.5, 1.5)
    factor = (2.5 / 1.5) ** 2.5
    m = d.mean()
    for i in range(100):
        x = m + 0.1 * i + 0.01
        assert abs(tm.bpoe_closed(d, x).value - (1.0 - d.cdf(x)) * factor) <= 1e-12
    for i in range(1, 100):
        alpha = i / 100
        ratio = tm.superquantile(d, alpha) / d.quantile(alpha)
        assert abs(ratio - 2.5 / 1.5) <= 1e-12


def test_gpd_xi_zero_is_shifted_exponential():
    g = dist.GPD(0.7, 2.0, 0.0)
    e = dist.Exponential(0.5)
    for alpha in (0.0, 0.1, 0.5, 0.9, 0.99):
        assert abs(tm.superquantile(g, alpha) - (0.7 + tm.superquantile(e, alpha))) <= 1e-12
    for x in (g.mean(), g.mean() + 1.0, g.mean() + 5.0):
        assert abs(tm.bpoe_closed(g, x).value
                   - tm.bpoe_closed(e, x - 0.7).value) <= 1e-13


# --- partial expectation -----------------------------------------------------

def test_partial_expectation_values():
    assert abs(tm.partial_expectation(dist.Normal(0, 1), 0.0)
               - 1.0 / math.sqrt(2 * math.pi)) <= 1e-14
    d = dist.Logistic(0.0, 1.0)
    for g in (-2.0, 0.0, 1.5):
        assert abs(tm.partial_expectation(d, g) - math.log(1 + math.exp(-g))) <= 1e-12


@pytest.mark.parametrize("d", [dist.Normal(1, 2), dist.Logistic(-2, 1.5),
                               dist.Weibull(0.5, 1.4), dist.GEV(1, 2, 0.3)],
                         ids=lambda d: repr(d))
def test_partial_expectation_tail_integral(d):
    # E[X - g]+ equals the integral of the survival function over [g, inf)
    g = d.quantile(0.62)
    hi = d.tail_quantile(1e-14)
    ref, _ = adaptive_quad(lambda t: 1.0 - d.cdf(t), g, hi, atol=1e-12,
                           rtol=1e-11, limit=4000)
    assert abs(tm.partial_expectation(d, g) - ref) <= 1e-8


def test_partial_expectation_asymptotics():
    d = dist.Normal(3.0, 1.0)
    assert abs(tm.partial_expectation(d, -40.0) - (d.mean() + 40.0)) <= 1e-9
    vals = [tm.partial_expectation(d, g) for g in (-1.0, 0.0, 2.0, 4.0)]
    assert all(x > y for x, y in zip(vals, vals[1:]))
    assert all(v >= 0 for v in vals)


# --- superdistribution -------------------------------------------------------

def test_superdistribution_edges():
    d = dist.Exponential(1.0)
    assert tm.superdistribution_cdf(d, d.mean()) == 0.0
    assert tm.superdistribution_cdf(d, 60.0) >= 1.0 - 1e-12
    xs = [d.mean() + 0.2 * i for i in range(20)]
    vals = [tm.superdistribution_cdf(d, x) for x in xs]
    assert all(x <= y + 1e-12 for x, y in zip(vals, vals[1:]))


def test_superdistribution_monte_carlo():
    # the superdistribution is the CDF of superquantile(U), U uniform
    d = dist.Logistic(0.0, 1.0)
    rng = np.random.default_rng(99)
    u = rng.random(100_000)
    draws = np.array([tm.superquantile(d, float(v)) for v in u])
    for x in (0.5, 1.0, 2.0, 4.0):
        empirical = float(np.mean(draws <= x))
        assert abs(tm.superdistribution_cdf(d, x) - empirical) <= 0.01


# --- left superquantile ------------------------------------------------------

def test_left_superquantile_identity():
    for d in ALL_FAMILIES:
        m = d.mean()
        assert tm.left_superquantile(d, 1.0) == m
        for alpha in (0.05, 0.4, 0.85):
            mix = alpha * tm.left_superquantile(d, alpha) \
                + (1.0 - alpha) * tm.superquantile(d, alpha)
            assert abs(mix - m) <= 1e-10 * (1.0 + abs(m))
    with pytest.raises(DomainError):
        tm.left_superquantile(dist.Normal(0, 1), 0.0)
    with pytest.raises(DomainError):
        tm.left_superquantile(dist.Pareto(0.9, 1.0), 0.5)


def test_left_superquantile_symmetry():
    d = dist.Normal(0.0, 1.0)
    for alpha in (0.1, 0.35, 0.8):
        assert abs(tm.left_superquantile(d, alpha)
                   + tm.superquantile(d, 1.0 - alpha)) <= 1e-12


def test_left_superquantile_logistic_multiplier():
    # mean minus left superquantile at 1-alpha equals stdev times the
    # entropy-based multiplier sqrt(3) H(alpha) / (pi (1 - alpha))
    mu, s = 0.4, 1.3
    d = dist.Logistic(mu, s)
    sd = math.sqrt(d.variance())
    for alpha in (0.2, 0.5, 0.9, 0.99):
        mult = math.sqrt(3.0) * sf.binary_entropy(alpha) / (math.pi * (1.0 - alpha))
        assert abs(tm.left_superquantile(d, 1.0 - alpha) - (mu - sd * mult)) <= 1e-12


def test_tail_result_json():
    r = tm.bpoe(dist.Exponential(1.0), 2.0)
    payload = r.to_json("bpoe")
    assert payload["metric"] == "bpoe"
    assert abs(payload["value"] + payload["alpha_star"] - 1.0) <= 1e-14
