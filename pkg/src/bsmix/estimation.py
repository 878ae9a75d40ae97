"""Maximum-likelihood fitting of the Bernoulli/BS mixture model."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .distributions import std_normal_cdf
from .likelihood import hessian, loglik, loglik_and_score, score
from .model import DataError, Theta, log_pi
from .optim import bfgs

log = logging.getLogger(__name__)

MODEL_NAME = "bernoulli-bs"


class IdentificationError(DataError):
    """The data cannot identify every parameter of the requested model."""


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class FitConfig:
    max_iterations: int = 500
    gradient_tolerance: float = 1e-6
    step_tolerance: float = 1e-10
    alpha_floor: float = 1e-4
    init: Optional[Theta] = None
    n_starts: int = 1
    seed: int = 0
    freeze: tuple = ()
    check_identification: bool = True
    eta_bound: float = 30.0
    pi_boundary: float = 1e-3

    def __post_init__(self):
        if not (self.gradient_tolerance > 0 and self.step_tolerance > 0 and self.alpha_floor > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iterations < 1 or self.n_starts < 1:
            raise ValueError("max_iterations and n_starts must be at least 1")


@dataclass
class FitResult:
    """Outcome of a maximum-likelihood fit.

    ``params`` is packed with the shape/scale parameter first, followed by
    the regression coefficients. ``se`` is ``None`` when the observed
    information is not positive definite.
    """

    model: str
    params: np.ndarray
    param_names: list
    se: Optional[np.ndarray]
    loglik: float
    n: int
    m: int
    n_iterations: int
    converged: bool
    information_matrix: np.ndarray
    n_free: int
    p1: int = 0
    p2: int = 0
    message: str = ""
    trace: list = field(default_factory=list)
    loglik_original_scale: float = np.nan
    extra: dict = field(default_factory=dict)

    @property
    def theta(self):
        return Theta.unpack(self.params, self.p1, self.p2)

    @property
    def aic(self):
        return -2.0 * self.loglik + 2.0 * self.n_free

    @property
    def bic(self):
        return -2.0 * self.loglik + np.log(self.n) * self.n_free

    @property
    def aic_original_scale(self):
        return -2.0 * self.loglik_original_scale + 2.0 * self.n_free

    @property
    def z_stats(self):
        if self.se is None:
            return None
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.params / self.se

    @property
    def p_values(self):
        z = self.z_stats
        if z is None:
            return None
        return 2.0 * std_normal_cdf(-np.abs(z))


# ---------------------------------------------------------------------------
# initial values


def _logistic_newton(X, target, steps=8, ridge=1e-8):
    beta = np.zeros(X.shape[1])
    for _ in range(steps):
        eta = np.clip(X @ beta, -30, 30)
        p = 1.0 / (1.0 + np.exp(-eta))
        w = p * (1 - p)
        H = X.T @ (w[:, None] * X) + ridge * np.eye(X.shape[1])
        g = X.T @ (target - p)
        try:
            beta = beta + np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(beta)):
            beta = np.zeros(X.shape[1])
            break
    return beta


def clamp_linear_predictor(X, beta, bound=10.0):
    """Shrink ``beta`` so that max |X beta| <= bound."""
    top = np.max(np.abs(X @ beta)) if X.size else 0.0
    if top > bound:
        beta = beta * (bound / top)
    return beta


def initialize(d, alpha_floor=1e-4):
    """Starting values from OLS, a sinh moment match and a logistic fit."""
    unc = ~d.is_censored
    if unc.sum() < d.p1:
        raise DataError(f"only {int(unc.sum())} uncensored rows for {d.p1} location coefficients")
    X1u = d.X1[unc]
    beta1, *_ = np.linalg.lstsq(X1u, d.y[unc], rcond=None)
    resid = d.y[unc] - X1u @ beta1
    alpha = np.sqrt(np.mean(4.0 * np.sinh(0.5 * resid) ** 2)) if resid.size else 1.0
    alpha = max(float(alpha), alpha_floor)
    if d.p2:
        beta2 = _logistic_newton(d.X2, unc.astype(float))
        beta2 = clamp_linear_predictor(d.X2, beta2)
    else:
        beta2 = np.zeros(0)
    return Theta(alpha, beta1, beta2)


# ---------------------------------------------------------------------------
# fitting


def check_identification(d):
    if d.p2 and d.m == 0:
        raise IdentificationError(
            "no censored rows: the point-mass weight is not identified; fit tobit-BS instead"
        )
    if d.m / d.n > 0.95:
        raise IdentificationError(f"{d.m} of {d.n} rows censored; too few to fit the continuous part")
    if d.n - d.m < d.p1 + 1:
        raise IdentificationError(
            f"{d.n - d.m} uncensored rows cannot identify {d.p1} coefficients and alpha"
        )


def _to_free(theta):
    v = theta.pack()
    v[0] = np.log(v[0])
    return v


def _from_free(v, p1):
    w = np.array(v, dtype=float)
    w[0] = np.exp(w[0])
    return Theta.unpack(w, p1)


def _objective(d, full0, free_idx):
    """Negative log-likelihood and gradient over the free parameters
    (alpha on the log scale)."""
    p1 = d.p1

    def fg(x):
        v = full0.copy()
        v[free_idx] = x
        if v[0] > 700:
            return np.inf, np.full(x.size, np.nan)
        th = _from_free(v, p1)
        ll, sc = loglik_and_score(d, th)
        if not np.isfinite(ll):
            return np.inf, np.full(x.size, np.nan)
        sc = sc.copy()
        sc[0] *= th.alpha
        return -ll, -sc[free_idx]

    return fg


def _fd_hessian(d, theta, rel_step=1e-5):
    v = theta.pack()
    k = v.size
    H = np.empty((k, k))
    for j in range(k):
        h = rel_step * max(1.0, abs(v[j]))
        e = np.zeros(k)
        e[j] = h
        if j == 0:
            h = min(h, 0.5 * v[0])
            e[0] = h
        gp = score(d, Theta.unpack(v + e, d.p1, d.p2))
        gm = score(d, Theta.unpack(v - e, d.p1, d.p2))
        H[:, j] = (gp - gm) / (2.0 * h)
    return 0.5 * (H + H.T)


def standard_errors(info, free_idx):
    """Square roots of the diagonal of the inverse information over the free
    parameters; frozen parameters get NaN. Returns None if not positive
    definite."""
    k = info.shape[0]
    sub = info[np.ix_(free_idx, free_idx)]
    if not np.all(np.isfinite(sub)):
        return None
    try:
        L = np.linalg.cholesky(sub)
    except np.linalg.LinAlgError:
        return None
    Linv = np.linalg.solve(L, np.eye(len(free_idx)))
    var = np.sum(Linv * Linv, axis=0)
    se = np.full(k, np.nan)
    se[free_idx] = np.sqrt(var)
    return se


def information_at(d, theta):
    """Observed information at ``theta``; the analytic Hessian is checked
    against finite differences of the score and replaced if they disagree."""
    H = hessian(d, theta)
    Hn = _fd_hessian(d, theta)
    scale = max(1.0, np.max(np.abs(Hn)))
    if not np.all(np.isfinite(H)) or np.max(np.abs(H - Hn)) > 1e-4 * scale:
        log.warning("analytic Hessian failed its self-check; using finite differences")
        return -Hn, "finite-difference"
    return -H, "analytic"


def param_names_for(d):
    return ["alpha"] + [f"beta1[{nm}]" for nm in d.x1_names] + [f"beta2[{nm}]" for nm in d.x2_names]


def _perturb(theta, rng, frozen):
    v = _to_free(theta)
    jitter = rng.normal(scale=0.25, size=v.size) * np.maximum(1.0, np.abs(v)) * 0.5
    jitter[list(frozen)] = 0.0
    return v + jitter


def fit_bernoulli_bs(d, cfg=None):
    """Maximise the mixture log-likelihood by BFGS.

    ``alpha`` is optimised on the log scale. With ``cfg.n_starts > 1`` extra
    starts are random perturbations of the initial value; the best
    log-likelihood wins and near ties go to the smaller parameter norm.
    """
    cfg = cfg or FitConfig()
    if cfg.check_identification:
        check_identification(d)
    theta0 = cfg.init if cfg.init is not None else initialize(d, cfg.alpha_floor)
    if theta0.beta1.size != d.p1 or theta0.beta2.size != d.p2:
        raise ValueError("initial value does not match the design widths")
    k = theta0.size
    frozen = sorted(set(cfg.freeze))
    free_idx = np.array([j for j in range(k) if j not in frozen], dtype=int)

    base = _to_free(theta0)
    starts = [base]
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.n_starts - 1):
        starts.append(_perturb(theta0, rng, frozen))

    best = None
    for x0 in starts:
        fg = _objective(d, x0, free_idx)
        res = bfgs(
            fg,
            x0[free_idx],
            max_iterations=cfg.max_iterations,
            gradient_tolerance=cfg.gradient_tolerance,
            step_tolerance=cfg.step_tolerance,
        )
        full = x0.copy()
        full[free_idx] = res.x
        if not np.isfinite(res.fun):
            continue
        cand = (res, full)
        if best is None:
            best = cand
            continue
        diff = best[0].fun - res.fun
        if diff > 1e-8 or (abs(diff) <= 1e-8 and np.linalg.norm(full) < np.linalg.norm(best[1])):
            best = cand
    if best is None:
        raise ConvergenceError("every start produced a non-finite log-likelihood")
    res, full = best
    theta_hat = _from_free(full, d.p1)
    ll = loglik(d, theta_hat)
    info, source = information_at(d, theta_hat)
    se = standard_errors(info, free_idx)
    converged = bool(res.converged)
    message = res.message
    free_b2 = [j for j in range(1 + d.p1, k) if j not in frozen]
    if free_b2 and np.max(np.abs(d.X2 @ theta_hat.beta2)) > cfg.eta_bound:
        # separation: the point-mass weight is driven to 0 or 1 for some rows
        converged = False
        message = "logit linear predictor diverged (separation)"
    elif free_b2 and se is None and np.max(np.exp(log_pi(d.X2 @ theta_hat.beta2))) < cfg.pi_boundary:
        # no interior maximum: the point mass vanishes and tobit-BS fits as well
        converged = False
        message = "point-mass weight vanishes (boundary solution)"
    return FitResult(
        model=MODEL_NAME,
        params=theta_hat.pack(),
        param_names=param_names_for(d),
        se=se,
        loglik=ll,
        n=d.n,
        m=d.m,
        n_iterations=res.n_iterations,
        converged=converged,
        information_matrix=info,
        n_free=len(free_idx),
        p1=d.p1,
        p2=d.p2,
        message=message,
        trace=[-f for f in res.trace],
        loglik_original_scale=ll - float(np.sum(d.y[~d.is_censored])),
        extra={"hessian": source},
    )


# ---------------------------------------------------------------------------
# inference tables


def significance_stars(p):
    if p is None or not np.isfinite(p):
        return ""
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.10:
        return "*"
    return ""


def wald_table(fr):
    """Rows of (name, estimate, se, z, p, stars); SE-less rows are marked."""
    rows = []
    z = fr.z_stats
    p = fr.p_values
    for j, name in enumerate(fr.param_names):
        row = {"name": name, "estimate": float(fr.params[j])}
        if fr.se is None or not np.isfinite(fr.se[j]):
            row.update(se=None, z=None, p=None, stars="", available=False)
        else:
            row.update(
                se=float(fr.se[j]),
                z=float(z[j]),
                p=float(p[j]),
                stars=significance_stars(p[j]),
                available=True,
            )
        rows.append(row)
    return rows


def format_wald_table(fr):
    lines = [f"{'parameter':<22}{'estimate':>12}{'se':>10}{'z':>9}{'p':>9}"]
    for r in wald_table(fr):
        if r["available"]:
            lines.append(
                f"{r['name']:<22}{r['estimate']:>12.4f}{r['se']:>10.4f}{r['z']:>9.3f}"
                f"{r['p']:>9.4f} {r['stars']}"
            )
        else:
            lines.append(f"{r['name']:<22}{r['estimate']:>12.4f}{'n/a':>10}")
    return "\n".join(lines)


def _intercept_columns(X):
    return {j for j in range(X.shape[1]) if np.ptp(X[:, j]) == 0}


def refit_significant(d, fr, level=0.05, cfg=None):
    """Drop non-significant non-intercept covariates from each component and refit.

    Returns ``(fit, reduced_dataset)``. Parameters whose SE is unavailable
    are kept.
    """
    if fr.p_values is None:
        raise ValueError("standard errors are unavailable; cannot select covariates")
    p = fr.p_values
    keep1 = [
        j for j in range(d.p1)
        if j in _intercept_columns(d.X1) or not (p[1 + j] >= level)
    ]
    keep2 = [
        j for j in range(d.p2)
        if j in _intercept_columns(d.X2) or not (p[1 + d.p1 + j] >= level)
    ]
    reduced = d.select_columns(keep1, keep2)
    cfg = cfg or FitConfig()
    if cfg.init is not None:
        t = cfg.init
        cfg = replace(cfg, init=Theta(t.alpha, t.beta1[keep1], t.beta2[keep2]))
    return fit_bernoulli_bs(reduced, cfg), reduced
