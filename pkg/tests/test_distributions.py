import json
import math

import numpy as np
import pytest

from tailrisk import distributions as dist
from tailrisk._quad import adaptive_quad
from tailrisk.errors import DomainError, ParameterError

# three parameter settings per family, shared by several grids below
SETTINGS = {
    "exponential": [dist.Exponential(1.0), dist.Exponential(0.25), dist.Exponential(4.0)],
    "pareto": [dist.Pareto(1.5, 2.0), dist.Pareto(3.0, 1.0), dist.Pareto(2.2, 0.5)],
    "gpd": [dist.GPD(-1.0, 2.0, 0.3), dist.GPD(0.0, 1.0, -0.5), dist.GPD(0.5, 2.0, 0.0)],
    "laplace": [dist.Laplace(0.0, 1.0), dist.Laplace(1.0, 2.0), dist.Laplace(-3.0, 0.5)],
    "normal": [dist.Normal(0.0, 1.0), dist.Normal(1.0, 2.0), dist.Normal(-2.0, 0.3)],
    "lognormal": [dist.LogNormal(0.0, 1.0), dist.LogNormal(0.5, 0.8), dist.LogNormal(-1.0, 1.5)],
    "logistic": [dist.Logistic(0.0, 1.0), dist.Logistic(-2.0, 1.5), dist.Logistic(3.0, 0.4)],
    "student-t": [dist.StudentT(2.5, 2.0, 1.0), dist.StudentT(3.0), dist.StudentT(6.0, 0.5, -1.0)],
    "weibull": [dist.Weibull(0.5, 1.4), dist.Weibull(2.0, 0.8), dist.Weibull(1.0, 3.0)],
    "loglogistic": [dist.LogLogistic(2.0, 3.0), dist.LogLogistic(1.0, 1.5), dist.LogLogistic(0.5, 4.0)],
    "gev": [dist.GEV(1.0, 2.0, 0.3), dist.GEV(1.0, 2.0, -0.2), dist.GEV(0.0, 1.0, 0.0)],
}
ALL_SETTINGS = [d for group in SETTINGS.values() for d in group]


def test_make_validates():
    assert dist.make("exponential", lam=1.0) == dist.Exponential(1.0)
    assert dist.make("weibull", lam=0.5, k=1.4) == dist.Weibull(0.5, 1.4)
    with pytest.raises(ParameterError, match="a > 0"):
        dist.make("pareto", a=-1.0, xm=1.0)
    with pytest.raises(ParameterError, match="sigma > 0"):
        dist.make("normal", mu=0.0, sigma=0.0)
    with pytest.raises(ParameterError, match="unknown family"):
        dist.make("cauchy", mu=0.0)
    with pytest.raises(ParameterError):
        dist.make("exponential", lam=1.0, k=2.0)


def test_pdf_cdf_spot_values():
    assert dist.Logistic(0.0, 1.0).cdf(0.0) == 0.5
    assert dist.Exponential(2.0).cdf(-0.5) == 0.0
    assert abs(dist.Normal(0.0, 1.0).pdf(0.0) - 1.0 / math.sqrt(2 * math.pi)) <= 1e-15
    assert dist.Pareto(2.0, 1.0).pdf(0.5) == 0.0
    assert dist.Weibull(1.0, 2.0).pdf(-1.0) == 0.0


@pytest.mark.parametrize("d", ALL_SETTINGS, ids=lambda d: repr(d))
def test_quantile_roundtrip(d):
    for i in range(1, 100):
        alpha = i / 100
        assert abs(d.cdf(d.quantile(alpha)) - alpha) <= 1e-9


@pytest.mark.parametrize("d", ALL_SETTINGS, ids=lambda d: repr(d))
def test_tail_quantile_matches_quantile(d):
    for alpha in (0.2, 0.5, 0.9, 0.99):
        q = d.quantile(alpha)
        tq = d.tail_quantile(1.0 - alpha)
        assert abs(tq - q) <= 1e-9 * (1.0 + abs(q))


@pytest.mark.parametrize("d", ALL_SETTINGS, ids=lambda d: repr(d))
def test_pdf_integrates_to_one(d):
    lo, hi = d.support()
    a = d.quantile(1e-10) if not math.isfinite(lo) else lo
    b = d.tail_quantile(1e-10) if not math.isfinite(hi) else hi
    mid = d.quantile(0.5)
    left, _ = adaptive_quad(d.pdf, a, mid, atol=1e-10, rtol=1e-9, limit=4000)
    right, _ = adaptive_quad(d.pdf, mid, b, atol=1e-10, rtol=1e-9, limit=4000)
    assert abs(left + right - 1.0) <= 1e-6


def test_quantile_domain():
    d = dist.Exponential(1.0)
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(DomainError):
            d.quantile(bad)


def test_moments_finite_cases():
    assert abs(dist.Exponential(2.0).mean() - 0.5) <= 1e-15
    assert abs(dist.Logistic(1.0, 1.0).variance() - math.pi ** 2 / 3.0) <= 1e-12
    assert abs(dist.Laplace(0.0, 2.0).variance() - 8.0) <= 1e-12
    assert abs(dist.Pareto(2.0, 1.0).mean() - 2.0) <= 1e-15
    w = dist.Weibull(0.5, 1.4)
    assert abs(w.mean() - 0.5 * math.gamma(1 + 1 / 1.4)) <= 1e-14


def test_moments_divergence_table():
    assert dist.Pareto(0.9, 1.0).mean() == math.inf
    assert dist.Pareto(1.5, 1.0).variance() == math.inf
    assert dist.GPD(0.0, 1.0, 1.2).mean() == math.inf
    assert dist.GPD(0.0, 1.0, 0.6).variance() == math.inf
    assert dist.StudentT(0.9).mean() == math.inf
    assert dist.StudentT(1.8).variance() == math.inf
    assert dist.GEV(0.0, 1.0, 1.1).mean() == math.inf
    assert dist.GEV(0.0, 1.0, 0.7).variance() == math.inf
    assert dist.LogLogistic(1.0, 0.9).mean() == math.inf
    assert dist.LogLogistic(1.0, 1.8).variance() == math.inf


def test_quantile_median_conventions():
    # the Laplace sign convention pins quantile(0.5) to the location
    assert dist.Laplace(0.7, 2.0).quantile(0.5) == 0.7
    assert dist.Normal(1.5, 1.0).quantile(0.5) == 1.5
    assert abs(dist.Exponential(1.0).quantile(1.0 - math.exp(-1.0)) - 1.0) <= 1e-12


def test_student_t_quantile_against_cdf_bisection():
    d = dist.StudentT(3.0, 1.0, 0.0)
    lo, hi = 0.0, 50.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if d.cdf(mid) < 0.95:
            lo = mid
        else:
            hi = mid
    assert abs(d.quantile(0.95) - 0.5 * (lo + hi)) <= 1e-10


def test_support_bounds():
    assert dist.GPD(0.0, 1.0, -0.5).support() == (0.0, 2.0)
    assert dist.Pareto(2.0, 1.5).support().lower == 1.5
    g = dist.GEV(0.0, 1.0, 0.3)
    assert g.support().lower == pytest.approx(-1.0 / 0.3)
    assert g.support().upper == math.inf
    assert dist.GEV(0.0, 1.0, -0.4).support().upper == pytest.approx(2.5)


def test_xi_near_zero_dispatch():
    # |xi| < 1e-9 is evaluated with the xi = 0 formulas
    near = dist.GPD(0.0, 1.0, 1e-12)
    exact = dist.GPD(0.0, 1.0, 0.0)
    for alpha in (0.1, 0.5, 0.9):
        assert near.quantile(alpha) == exact.quantile(alpha)


@pytest.mark.parametrize("d", [
    dist.Exponential(1.0), dist.Pareto(3.0, 1.0), dist.GPD(-1.0, 2.0, 0.3),
    dist.Laplace(1.0, 2.0), dist.Normal(1.0, 2.0), dist.LogNormal(0.0, 1.0),
    dist.Logistic(-2.0, 1.5), dist.StudentT(6.0, 0.5, -1.0),
    dist.Weibull(0.5, 1.4), dist.LogLogistic(2.0, 3.0), dist.GEV(1.0, 2.0, 0.3),
], ids=lambda d: repr(d))
def test_sample_mean_within_4_stderr(d):
    n = 1_000_000
    x = d.sample(n, np.random.default_rng(314159))
    stderr = math.sqrt(d.variance() / n)
    assert abs(float(x.mean()) - d.mean()) <= 4.0 * stderr


def test_sampling_matches_scalar_quantile():
    u = np.array([1e-8, 0.01, 0.3, 0.5, 0.77, 0.99, 1 - 1e-8])
    for d in ALL_SETTINGS:
        vec = d._quantile_array(u)
        scal = np.array([d.quantile(float(p)) for p in u])
        assert np.max(np.abs(vec - scal) / (1.0 + np.abs(scal))) <= 1e-7


def test_json_roundtrip():
    for d in ALL_SETTINGS:
        again = dist.from_json(json.loads(json.dumps(d.to_json())))
        assert again == d
    with pytest.raises(ParameterError):
        dist.from_json({"params": {}})
