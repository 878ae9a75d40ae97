"""Left-censored tobit regression with normal, Student-t, log-normal or BS errors.

All laws share one likelihood: censored rows contribute ``log F(xi - x'b)``
and uncensored rows ``log f(y - x'b)``, where ``f`` and ``F`` are the law's
density and CDF with its scale/shape parameter. Normal and Student-t models
work on the original response scale (``exp(y)``, threshold ``exp(c)``);
log-normal and BS models work on the log scale.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import distributions as dist
from .estimation import FitConfig, FitResult, standard_errors
from .model import DataError
from .optim import bfgs, numerical_gradient

T_DF_GRID = (3, 4, 5, 7, 10, 15, 30)
LAWS = ("normal", "student_t", "log_normal", "bs")


@dataclass(frozen=True)
class TobitSpec:
    error_law: str = "normal"
    df: Optional[float] = None

    def __post_init__(self):
        if self.error_law not in LAWS:
            raise ValueError(f"unknown error law {self.error_law!r}; choose from {LAWS}")
        if self.error_law == "student_t" and self.df is not None and not self.df > 2:
            raise ValueError("Student-t tobit needs df > 2")

    @property
    def log_scale(self):
        return self.error_law in ("log_normal", "bs")

    @property
    def model_name(self):
        return {
            "normal": "tobit-normal",
            "student_t": "tobit-t",
            "log_normal": "tobit-ln",
            "bs": "tobit-bs",
        }[self.error_law]

    @property
    def scale_name(self):
        return "alpha" if self.error_law == "bs" else "sigma"


def _log_density(spec, r, scale):
    law = spec.error_law
    if law in ("normal", "log_normal"):
        return dist.std_normal_logpdf(r / scale) - np.log(scale)
    if law == "student_t":
        return dist.student_t_logpdf(r / scale, spec.df) - np.log(scale)
    return dist.logbs_logpdf(r, scale, 0.0)


def _log_cdf(spec, r, scale):
    law = spec.error_law
    if law in ("normal", "log_normal"):
        return dist.std_normal_logcdf(r / scale)
    if law == "student_t":
        return dist.student_t_logcdf(r / scale, spec.df)
    return dist.logbs_logcdf(r, scale, 0.0)


def _log_sf(spec, r, scale):
    law = spec.error_law
    if law in ("normal", "log_normal"):
        return dist.std_normal_logcdf(-r / scale)
    if law == "student_t":
        return dist.student_t_logcdf(-r / scale, spec.df)
    return dist.logbs_logsf(r, scale, 0.0)


def response_and_threshold(spec, data):
    """Response vector and censoring threshold on the law's working scale."""
    if spec.log_scale:
        return data.y, data.c
    return np.exp(data.y), float(np.exp(data.c))


def tobit_loglik_terms(spec, data, params):
    scale = params[0]
    beta = np.asarray(params[1:], dtype=float)
    y, xi = response_and_threshold(spec, data)
    lin = data.X1 @ beta
    with np.errstate(over="ignore", invalid="ignore"):
        lc = _log_cdf(spec, xi - lin, scale)
        lu = _log_density(spec, y - lin, scale)
    return np.where(data.is_censored, lc, lu)


def tobit_loglik(spec, data, params):
    """Tobit log-likelihood at ``params = (scale, beta...)``."""
    params = np.asarray(params, dtype=float)
    if not params[0] > 0:
        raise ValueError("scale/shape parameter must be positive")
    if spec.error_law == "student_t" and spec.df is None:
        raise ValueError("Student-t tobit needs a df value")
    val = float(np.sum(tobit_loglik_terms(spec, data, params)))
    return val if np.isfinite(val) else -np.inf


def tobit_log_sf(spec, data, params, y_query=None):
    """log P(Y > y) per row on the law's working scale; censored rows at the threshold."""
    scale = params[0]
    beta = np.asarray(params[1:], dtype=float)
    y, xi = response_and_threshold(spec, data)
    if y_query is not None:
        y = y_query
    yq = np.where(data.is_censored, xi, y)
    return _log_sf(spec, yq - data.X1 @ beta, scale)


def tobit_initialize(spec, data):
    y, xi = response_and_threshold(spec, data)
    unc = ~data.is_censored
    if unc.sum() < data.p1 + 1:
        raise DataError("too few uncensored rows to fit the tobit model")
    beta, *_ = np.linalg.lstsq(data.X1[unc], y[unc], rcond=None)
    r = y[unc] - data.X1[unc] @ beta
    if spec.error_law == "bs":
        scale = np.sqrt(np.mean(4.0 * np.sinh(0.5 * r) ** 2))
    else:
        scale = np.std(r)
    return np.concatenate([[max(scale, 1e-3)], beta])


def numerical_hessian(fun, x, rel_step=1e-4):
    """Central second differences of a scalar function."""
    x = np.asarray(x, dtype=float)
    k = x.size
    h = rel_step * np.maximum(1.0, np.abs(x))
    H = np.empty((k, k))
    f0 = fun(x)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = h[i]
        H[i, i] = (fun(x + ei) - 2.0 * f0 + fun(x - ei)) / h[i] ** 2
        for j in range(i + 1, k):
            ej = np.zeros(k)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                fun(x + ei + ej) - fun(x + ei - ej) - fun(x - ei + ej) + fun(x - ei - ej)
            ) / (4.0 * h[i] * h[j])
    return H


def _fit_fixed_law(spec, data, cfg, x0=None):
    init = tobit_initialize(spec, data) if x0 is None else np.asarray(x0, dtype=float)
    free0 = init.copy()
    free0[0] = np.log(init[0])

    def f(v):
        w = v.copy()
        if w[0] > 700:
            return np.inf
        w[0] = np.exp(w[0])
        ll = float(np.sum(tobit_loglik_terms(spec, data, w)))
        return -ll if np.isfinite(ll) else np.inf

    def fg(v):
        val = f(v)
        if not np.isfinite(val):
            return val, np.full(v.size, np.nan)
        return val, numerical_gradient(f, v)

    res = bfgs(
        fg,
        free0,
        max_iterations=cfg.max_iterations,
        gradient_tolerance=cfg.gradient_tolerance,
        step_tolerance=cfg.step_tolerance,
    )
    params = res.x.copy()
    params[0] = np.exp(params[0])
    return params, res


def fit_tobit(spec, data, cfg=None):
    """Fit a tobit model; Student-t degrees of freedom are profiled over a grid
    when ``spec.df`` is None."""
    cfg = cfg or FitConfig()
    if spec.error_law == "student_t" and spec.df is None:
        best = None
        for df in T_DF_GRID:
            fr = fit_tobit(TobitSpec("student_t", df), data, cfg)
            if best is None or fr.loglik > best.loglik:
                best = fr
        best.n_free += 1  # profiled df counts as an estimated parameter
        best.extra["df_profiled"] = True
        return best

    params, res = _fit_fixed_law(spec, data, cfg)
    ll = tobit_loglik(spec, data, params)

    def negll(v):
        if not v[0] > 0:
            return np.inf
        return -float(np.sum(tobit_loglik_terms(spec, data, v)))

    info = numerical_hessian(negll, params)
    se = standard_errors(info, np.arange(params.size))
    jac = float(np.sum(data.y[~data.is_censored])) if spec.log_scale else 0.0
    extra = {"error_law": spec.error_law}
    if spec.error_law == "student_t":
        extra["df"] = float(spec.df)
    return FitResult(
        model=spec.model_name,
        params=params,
        param_names=[spec.scale_name] + [f"beta[{nm}]" for nm in data.x1_names],
        se=se,
        loglik=ll,
        n=data.n,
        m=data.m,
        n_iterations=res.n_iterations,
        converged=bool(res.converged),
        information_matrix=info,
        n_free=params.size,
        p1=data.p1,
        p2=0,
        message=res.message,
        trace=[-f for f in res.trace],
        loglik_original_scale=ll - jac,
        extra=extra,
    )
