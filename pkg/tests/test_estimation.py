import numpy as np
import pytest
from scipy import optimize

from bsmix.estimation import (
    FitConfig,
    FitResult,
    IdentificationError,
    clamp_linear_predictor,
    fit_bernoulli_bs,
    initialize,
    refit_significant,
    significance_stars,
    wald_table,
)
from bsmix.likelihood import hessian, loglik, score
from bsmix.model import Theta, build_dataset
from bsmix.simulation import generate_dataset, generate_vaccine_like, replicate_seed
from bsmix.tobit import TobitSpec, fit_tobit


@pytest.fixture(scope="module")
def fitted():
    d = generate_dataset(Theta(0.5, (0.2, 0.5), (1.0, 2.0)), 500, seed=123)
    return d, fit_bernoulli_bs(d, FitConfig(gradient_tolerance=1e-8))


def test_first_order_condition(fitted):
    d, fr = fitted
    assert fr.converged
    g = score(d, fr.theta)
    assert np.max(np.abs(g)) <= 1e-5 * (1 + abs(fr.loglik))


def test_information_positive_definite(fitted):
    d, fr = fitted
    assert np.all(np.linalg.eigvalsh(-hessian(d, fr.theta)) > 0)
    assert fr.se is not None and np.all(fr.se > 0)
    assert fr.extra["hessian"] == "analytic"


def test_aic_bic_formulas(fitted):
    d, fr = fitted
    k = 1 + d.p1 + d.p2
    assert fr.n_free == k
    assert fr.aic == -2 * fr.loglik + 2 * k
    assert fr.bic == -2 * fr.loglik + np.log(d.n) * k
    assert fr.loglik == loglik(d, fr.theta)


def test_matches_scipy_optimizer(fitted):
    d, fr = fitted

    def negll(v):
        th = Theta.unpack(np.concatenate([[np.exp(v[0])], v[1:]]), d.p1)
        return -loglik(d, th)

    x0 = fr.params.copy()
    x0[0] = np.log(x0[0])
    x0 = x0 + 0.1
    res = optimize.minimize(negll, x0, method="Nelder-Mead",
                            options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 40000, "maxfev": 40000})
    assert -res.fun <= fr.loglik + 1e-8
    assert -res.fun == pytest.approx(fr.loglik, abs=1e-6)


def test_reparameterization_invariance(fitted):
    d, fr = fitted

    def fg(v):
        th = Theta.unpack(v, d.p1)
        return -loglik(d, th), -score(d, th)

    bounds = [(1e-3, None)] + [(None, None)] * (fr.params.size - 1)
    res = optimize.minimize(fg, fr.params * 1.05, jac=True, method="L-BFGS-B", bounds=bounds,
                            options={"gtol": 1e-11, "ftol": 1e-16, "maxiter": 5000})
    assert res.x[0] == pytest.approx(fr.params[0], rel=1e-6)


def test_reduction_to_tobit_bs():
    base = generate_vaccine_like(400, seed=5)
    d = base.select_columns(range(base.p1), [0])  # logit part: intercept only
    big = 40.0
    init = initialize(d)
    cfg = FitConfig(init=Theta(init.alpha, init.beta1, (big,)), freeze=(1 + d.p1,), gradient_tolerance=1e-9)
    fr = fit_bernoulli_bs(d, cfg)
    tb = fit_tobit(TobitSpec("bs"), base.select_columns(range(base.p1), []), FitConfig(gradient_tolerance=1e-9))
    assert fr.params[1 + d.p1] == big
    assert np.allclose(fr.params[: 1 + d.p1], tb.params, atol=1e-4)
    assert fr.n_free == tb.n_free
    assert np.isnan(fr.se[-1])


def test_multistart_not_worse(fitted):
    d, fr = fitted
    fr3 = fit_bernoulli_bs(d, FitConfig(n_starts=3, seed=1, gradient_tolerance=1e-8))
    assert fr3.loglik >= fr.loglik - 1e-8


def test_identification_guards():
    X = np.ones((6, 1))
    with pytest.raises(IdentificationError):
        fit_bernoulli_bs(build_dataset([1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 0.1, X))
    with pytest.raises(IdentificationError):
        fit_bernoulli_bs(build_dataset([0.1] * 5 + [2.0], 0.1, X))


def test_init_separation_clamp():
    n = 40
    x = np.linspace(-1, 1, n)
    X = np.column_stack([np.ones(n), x])
    y = np.where(x < 0, 0.1, np.exp(1 + x))
    d = build_dataset(y, 0.1, X, X)
    th = initialize(d)
    assert np.max(np.abs(X @ th.beta2)) <= 10.0 + 1e-12
    assert np.allclose(clamp_linear_predictor(X, np.array([0.0, 50.0])), [0.0, 10.0])


def test_init_alpha_floor():
    n = 10
    x = np.linspace(0, 1, n)
    X = np.column_stack([np.ones(n), x])
    d = build_dataset(np.r_[[0.0, 0.0], 1.0 + 2.0 * x[2:]], 0.0, X, already_log=True)
    assert initialize(d, alpha_floor=1e-4).alpha == 1e-4


def _dummy_fit(est, se):
    est, se = np.atleast_1d(est).astype(float), np.atleast_1d(se).astype(float)
    return FitResult("dummy", est, [f"p{j}" for j in range(est.size)], se, 0.0, 10, 1, 0, True,
                     np.eye(est.size), est.size)


def test_wald_table_values():
    rows = wald_table(_dummy_fit([0.0, 1.959964, 3.0], [1.0, 1.0, 1.0]))
    assert rows[0]["p"] == 1.0
    assert rows[1]["p"] == pytest.approx(0.05, abs=1e-6)
    assert rows[2]["stars"] == "***"
    assert significance_stars(0.03) == "**"
    assert significance_stars(0.07) == "*"
    assert significance_stars(0.2) == ""


def test_wald_table_marks_missing_se():
    fr = _dummy_fit([1.0], [1.0])
    fr.se = None
    row = wald_table(fr)[0]
    assert row["available"] is False and row["p"] is None


def test_refit_significant_keeps_everything_when_significant(fitted):
    d, fr = fitted
    level = 0.5
    assert np.all(fr.p_values < level)
    fr2, d2 = refit_significant(d, fr, level)
    assert d2.p1 == d.p1 and d2.p2 == d.p2
    assert np.allclose(fr2.params, fr.params, atol=1e-5)


def test_refit_significant_drops_noise():
    rng = np.random.default_rng(2)
    base = generate_vaccine_like(330, seed=11)
    noise = rng.normal(size=(base.n, 1))
    X1 = np.column_stack([base.X1, noise])
    d = build_dataset(base.y, base.c, X1, base.X2, already_log=True,
                      x1_names=base.x1_names + ("noise",), x2_names=base.x2_names)
    fr = fit_bernoulli_bs(d)
    fr2, d2 = refit_significant(d, fr, level=0.05)
    assert d2.x1_names == ("const", "HI", "FEM")
    assert d2.x2_names == ("const", "EZ")
    assert fr2.loglik <= fr.loglik + 1e-6


def test_boundary_solution_flagged():
    # this replicate's likelihood is maximised with the point mass removed
    d = generate_dataset(Theta(1.0, (0.2, 0.5), (1.0, 2.0)), 300, replicate_seed(5, 1.0, 300, 11))
    fr = fit_bernoulli_bs(d)
    tb = fit_tobit(TobitSpec("bs"), d.select_columns([0, 1], []))
    assert not fr.converged and "boundary" in fr.message
    assert fr.se is None
    assert fr.loglik == pytest.approx(tb.loglik, abs=1e-4)


def test_separation_flagged():
    d = generate_dataset(Theta(1.0, (0.2, 0.5), (1.0, 2.0)), 300, replicate_seed(5, 1.0, 300, 96))
    fr = fit_bernoulli_bs(d)
    assert not fr.converged and "separation" in fr.message
