import math

import numpy as np
import pytest

from tailrisk import distributions as dist
from tailrisk import tail_metrics as tm
from tailrisk.errors import ConvergenceError, DomainError, ParameterError
from tailrisk.estimation import (FitProblem, empirical_superquantile, ls_mos_fit,
                                 mos_solve, parameter_names, reference_fits)


# --- empirical superquantile -------------------------------------------------

def test_empirical_examples():
    sample = [1.0, 2.0, 3.0, 4.0]
    assert empirical_superquantile(sample, 0.0) == 2.5
    assert empirical_superquantile(sample, 0.75) == 4.0
    assert empirical_superquantile(sample, 0.5) == 3.5


def test_empirical_mean_exact():
    rng = np.random.default_rng(5)
    x = rng.standard_normal(773)
    assert empirical_superquantile(x, 0.0) == float(x.mean())


def test_empirical_monotone_on_atom_grid():
    # at grid points i/n the estimator is exactly the mean of the top n-i
    # order statistics; it is nondecreasing in alpha. (It is NOT convex in
    # alpha in general: {0,0,10,10} gives increments 5/3, 10/3, 0.)
    rng = np.random.default_rng(11)
    x = rng.exponential(size=40)
    n = x.size
    xs = np.sort(x)
    grid = [i / n for i in range(n)]
    vals = [empirical_superquantile(x, a) for a in grid]
    diffs = [b - a for a, b in zip(vals, vals[1:])]
    assert all(d >= -1e-12 for d in diffs)
    for i in (0, 7, 20, n - 1):
        assert vals[i] == pytest.approx(float(xs[i:].mean()), abs=1e-12)


def test_empirical_validation():
    with pytest.raises(ParameterError):
        empirical_superquantile([], 0.5)
    with pytest.raises(DomainError):
        empirical_superquantile([1.0], 1.0)


def test_empirical_unsorted_input():
    assert empirical_superquantile([4.0, 1.0, 3.0, 2.0], 0.75) == 4.0


# --- exact matching (MOS) ----------------------------------------------------

def test_mos_exponential_analytic():
    # single level: lam = (1 - ln(1 - alpha)) / target
    alpha, target = 0.3, 2.0
    r = mos_solve(FitProblem("exponential", (alpha,), targets=(target,)))
    assert abs(r.params["lam"] - (1 - math.log1p(-alpha)) / target) <= 1e-10


@pytest.mark.parametrize("family,d,levels", [
    ("exponential", dist.Exponential(1.7), (0.3,)),
    ("normal", dist.Normal(1.0, 2.0), (0.5, 0.9)),
    ("weibull", dist.Weibull(0.5, 1.4), (0.15, 0.75)),
    ("logistic", dist.Logistic(-1.0, 0.7), (0.2, 0.8)),
    ("laplace", dist.Laplace(2.0, 1.5), (0.25, 0.75)),
    ("lognormal", dist.LogNormal(0.3, 0.9), (0.3, 0.7)),
])
def test_mos_recovers_generating_parameters(family, d, levels):
    targets = tuple(tm.superquantile(d, a) for a in levels)
    r = mos_solve(FitProblem(family, levels, targets=targets))
    for name, value in d.params().items():
        assert abs(r.params[name] - value) <= 1e-6 * (1.0 + abs(value))
    assert max(abs(v) for v in r.residuals) <= 1e-8


def test_mos_level_count_must_match():
    with pytest.raises(ParameterError, match="exactly 1 level"):
        mos_solve(FitProblem("exponential", (0.2, 0.8), targets=(1.0, 2.0)))


def test_mos_no_solution_diagnostic():
    # decreasing targets cannot come from any increasing superquantile
    with pytest.raises(ConvergenceError) as err:
        mos_solve(FitProblem("normal", (0.2, 0.8), targets=(3.0, 1.0)))
    assert "residuals" in err.value.diagnostics


# --- least squares (LS-MOS) --------------------------------------------------

def test_ls_exact_targets_zero_objective():
    d = dist.Weibull(0.5, 1.4)
    levels = (0.15, 0.5, 0.75)
    targets = tuple(tm.superquantile(d, a) for a in levels)
    r = ls_mos_fit(FitProblem("weibull", levels, targets=targets))
    assert r.objective <= 1e-12
    assert abs(r.params["lam"] - 0.5) <= 1e-6
    assert abs(r.params["k"] - 1.4) <= 1e-6
    assert r.converged and r.gradient_norm <= 1e-7


def test_ls_sample_fit_reports_residuals():
    x = dist.Weibull(0.5, 1.4).sample(50, np.random.default_rng(42))
    r = ls_mos_fit(FitProblem("weibull", (0.15, 0.75), sample=tuple(x)))
    assert len(r.residuals) == 2
    assert all(math.isfinite(v) for v in r.residuals)
    assert r.params["lam"] > 0 and r.params["k"] > 0


def test_ls_large_sample_consistency_single_seed():
    x = dist.Weibull(0.5, 1.4).sample(10_000, np.random.default_rng(1003))
    r = ls_mos_fit(FitProblem("weibull", (0.5, 0.75, 0.95), sample=tuple(x)))
    assert abs(r.params["lam"] - 0.5) / 0.5 <= 0.03
    assert abs(r.params["k"] - 1.4) / 1.4 <= 0.03


def test_zero_shifts_identical_to_plain_fit():
    d = dist.Normal(0.5, 1.2)
    levels = (0.4, 0.9)
    targets = tuple(tm.superquantile(d, a) for a in levels)
    plain = ls_mos_fit(FitProblem("normal", levels, targets=targets))
    shifted = ls_mos_fit(FitProblem("normal", levels, shifts=(0.0, 0.0),
                                    targets=targets))
    assert plain.params == shifted.params


def test_conservative_shift_fattens_the_tail():
    d = dist.Weibull(0.5, 1.0)
    levels = (0.5, 0.9)
    targets = tuple(tm.superquantile(d, a) for a in levels)
    shifted = ls_mos_fit(FitProblem("weibull", levels, shifts=(0.05, 0.05),
                                    targets=targets))
    fitted = shifted.distribution()
    # matching the alpha - eps superquantile to the alpha target pushes the
    # fitted superquantile at alpha above the target
    for a, t in zip(levels, targets):
        assert tm.superquantile(fitted, a) > t


def test_weight_rescaling_argmin_invariance():
    x = dist.Weibull(0.5, 1.4).sample(200, np.random.default_rng(17))
    base = ls_mos_fit(FitProblem("weibull", (0.25, 0.6, 0.9),
                                 weights=(1.0, 1.0, 1.0), sample=tuple(x)))
    scaled = ls_mos_fit(FitProblem("weibull", (0.25, 0.6, 0.9),
                                   weights=(7.0, 7.0, 7.0), sample=tuple(x)))
    assert abs(base.params["lam"] - scaled.params["lam"]) <= 1e-7
    assert abs(base.params["k"] - scaled.params["k"]) <= 1e-7
    assert abs(scaled.objective - 7.0 * base.objective) <= 1e-9 * (1 + base.objective)


def test_problem_validation():
    with pytest.raises(ParameterError, match="strictly increasing"):
        FitProblem("normal", (0.8, 0.2), targets=(1.0, 2.0))
    with pytest.raises(ParameterError, match="exactly one"):
        FitProblem("normal", (0.5,), targets=(1.0,), sample=(1.0, 2.0))
    with pytest.raises(ParameterError, match="exactly one"):
        FitProblem("normal", (0.5,))
    with pytest.raises(ParameterError, match="shifts"):
        FitProblem("normal", (0.1, 0.5), shifts=(0.2, 0.0), targets=(1.0, 2.0))
    with pytest.raises(ParameterError, match="positive"):
        FitProblem("normal", (0.5,), weights=(-1.0,), targets=(1.0,))
    with pytest.raises(ParameterError, match="parameterization"):
        ls_mos_fit(FitProblem("unknown", (0.5,), targets=(1.0,)))


def test_parameter_names():
    assert parameter_names("weibull") == ("lam", "k")
    assert parameter_names("student-t") == ("nu", "s", "mu")


# --- Weibull reference fits --------------------------------------------------

def test_mm_recovers_truth_at_scale():
    # synthetic large-n sample carries the generating moments
    x = dist.Weibull(0.5, 1.4).sample(200_000, np.random.default_rng(3))
    mm = reference_fits(x)["mm"]
    assert abs(mm["lam"] - 0.5) / 0.5 <= 0.02
    assert abs(mm["k"] - 1.4) / 1.4 <= 0.02


def test_ml_matches_mm_order_of_magnitude():
    x = dist.Weibull(0.5, 1.4).sample(50, np.random.default_rng(8))
    fits = reference_fits(x)
    for tag in ("mm", "ml"):
        assert 0.1 <= fits[tag]["lam"] <= 2.0
        assert 0.3 <= fits[tag]["k"] <= 5.0


def test_constant_sample_is_degenerate():
    with pytest.raises(ConvergenceError):
        reference_fits([1.0] * 50)


def test_fit_result_json():
    d = dist.Normal(0.0, 1.0)
    targets = tuple(tm.superquantile(d, a) for a in (0.4, 0.9))
    r = ls_mos_fit(FitProblem("normal", (0.4, 0.9), targets=targets))
    payload = r.to_json()
    assert payload["family"] == "normal"
    assert set(payload["diagnostics"]) == {"iterations", "gradient_norm", "converged"}
