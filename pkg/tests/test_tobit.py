import numpy as np
import pytest
from scipy import stats

from bsmix.estimation import FitConfig
from bsmix.model import build_dataset
from bsmix.optim import numerical_gradient
from bsmix.simulation import generate_vaccine_like
from bsmix.tobit import T_DF_GRID, TobitSpec, fit_tobit, tobit_loglik


@pytest.fixture(scope="module")
def uncensored_normal():
    rng = np.random.default_rng(0)
    n = 200
    x = rng.uniform(size=n)
    X = np.column_stack([np.ones(n), x])
    raw = 10.0 + 3.0 * x + rng.normal(scale=1.5, size=n)
    return build_dataset(raw, 1e-3, X, x1_names=("const", "x")), raw, X


def test_no_censoring_is_ordinary_regression(uncensored_normal):
    d, raw, X = uncensored_normal
    params = np.array([1.3, 9.0, 2.5])
    want = stats.norm.logpdf(raw, X @ params[1:], params[0]).sum()
    assert tobit_loglik(TobitSpec("normal"), d, params) == pytest.approx(want, rel=1e-12)
    want_t = (stats.t.logpdf((raw - X @ params[1:]) / 1.3, 5) - np.log(1.3)).sum()
    assert tobit_loglik(TobitSpec("student_t", 5), d, params) == pytest.approx(want_t, rel=1e-12)


def test_recovers_ols(uncensored_normal):
    d, raw, X = uncensored_normal
    fr = fit_tobit(TobitSpec("normal"), d, FitConfig(gradient_tolerance=1e-10))
    beta, *_ = np.linalg.lstsq(X, raw, rcond=None)
    sigma = np.sqrt(np.mean((raw - X @ beta) ** 2))
    assert fr.converged
    assert np.allclose(fr.params[1:], beta, atol=1e-4)
    assert fr.params[0] == pytest.approx(sigma, abs=1e-4)
    assert fr.param_names == ["sigma", "beta[const]", "beta[x]"]


def test_t_with_huge_df_is_normal():
    d = generate_vaccine_like(200, seed=1).select_columns(range(4), [])
    p = np.array([1.2, 0.5, 0.1, -0.1, 0.2])
    a = tobit_loglik(TobitSpec("normal"), d, p)
    b = tobit_loglik(TobitSpec("student_t", 1e6), d, p)
    assert a == pytest.approx(b, abs=1e-4 * abs(a))


def test_censored_contribution():
    X = np.ones((3, 1))
    d = build_dataset([0.1, 0.5, 2.0], 0.1, X)
    p = np.array([0.8, 0.3])
    want = stats.norm.logcdf(0.1, 0.3, 0.8) + stats.norm.logpdf([0.5, 2.0], 0.3, 0.8).sum()
    assert tobit_loglik(TobitSpec("normal"), d, p) == pytest.approx(want, rel=1e-12)
    # log-normal law works on the log scale with threshold log(0.1)
    y = np.log([0.5, 2.0])
    want = stats.norm.logcdf(np.log(0.1), 0.3, 0.8) + stats.norm.logpdf(y, 0.3, 0.8).sum()
    assert tobit_loglik(TobitSpec("log_normal"), d, p) == pytest.approx(want, rel=1e-12)


def test_numeric_gradient_matches_closed_form(uncensored_normal):
    d, raw, X = uncensored_normal
    p = np.array([1.4, 9.5, 2.0])
    r = raw - X @ p[1:]
    want = np.concatenate([[-d.n / p[0] + np.sum(r**2) / p[0] ** 3], X.T @ r / p[0] ** 2])
    got = numerical_gradient(lambda v: tobit_loglik(TobitSpec("normal"), d, v), p)
    assert np.allclose(got, want, rtol=1e-6)


def test_gradient_vanishes_at_fit():
    d = generate_vaccine_like(330, seed=3).select_columns(range(4), [])
    for law in ("normal", "log_normal", "bs"):
        spec = TobitSpec(law)
        fr = fit_tobit(spec, d)
        g = numerical_gradient(lambda v: tobit_loglik(spec, d, v), fr.params)
        assert np.max(np.abs(g)) <= 1e-4 * (1 + abs(fr.loglik)), law
        assert fr.se is not None and np.all(fr.se > 0)


def test_student_t_profiles_df():
    d = generate_vaccine_like(330, seed=3).select_columns(range(4), [])
    fr = fit_tobit(TobitSpec("student_t"), d)
    assert fr.extra["df"] in T_DF_GRID
    assert fr.n_free == 1 + d.p1 + 1
    for df in T_DF_GRID:
        assert tobit_loglik(TobitSpec("student_t", df), d, fit_tobit(TobitSpec("student_t", df), d).params) <= fr.loglik + 1e-8


def test_spec_validation():
    with pytest.raises(ValueError):
        TobitSpec("cauchy")
    with pytest.raises(ValueError):
        TobitSpec("student_t", 1.5)
    d = generate_vaccine_like(50, seed=0).select_columns(range(4), [])
    with pytest.raises(ValueError):
        tobit_loglik(TobitSpec("normal"), d, np.array([-1.0, 0, 0, 0, 0]))
