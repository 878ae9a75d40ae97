"""Birnbaum-Saunders, log-BS and reference distributions.

All functions are vectorised over their first argument. Log-domain versions
are preferred by the likelihood code; the plain densities are provided for
convenience and for tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

LOG_2PI = np.log(2.0 * np.pi)
LOG_2 = np.log(2.0)
# sinh/cosh overflow boundary in double precision
_HYP_CLAMP = 700.0


@dataclass(frozen=True)
class BSParams:
    """Shape ``alpha`` and scale ``sigma`` (the median) of a BS law."""

    alpha: float
    sigma: float = 1.0

    def __post_init__(self):
        _check_alpha(self.alpha)
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError(f"sigma must be positive, got {self.sigma!r}")


@dataclass(frozen=True)
class LogBSParams:
    """Shape ``alpha`` and location ``mu`` (= log sigma) of a log-BS law."""

    alpha: float
    mu: float = 0.0

    def __post_init__(self):
        _check_alpha(self.alpha)
        if not np.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu!r}")


def _check_alpha(alpha):
    if not (np.isfinite(alpha) and alpha > 0):
        raise ValueError(f"alpha must be positive, got {alpha!r}")


def _check_loc(mu):
    if not np.all(np.isfinite(mu)):
        raise ValueError("location must be finite")


# ---------------------------------------------------------------------------
# hyperbolic helpers


def sinh_clamped(u):
    """sinh with the argument clamped to the double-precision range."""
    return np.sinh(np.clip(u, -_HYP_CLAMP, _HYP_CLAMP))


def cosh_clamped(u):
    return np.cosh(np.clip(u, -_HYP_CLAMP, _HYP_CLAMP))


def logcosh(u):
    """log(cosh(u)) without overflow."""
    a = np.abs(u)
    return a + np.log1p(np.exp(-2.0 * a)) - LOG_2


# ---------------------------------------------------------------------------
# standard normal and Student-t


def std_normal_pdf(x):
    return np.exp(-0.5 * np.square(x)) / np.sqrt(2.0 * np.pi)


def std_normal_logpdf(x):
    return -0.5 * np.square(x) - 0.5 * LOG_2PI


def std_normal_cdf(x):
    return special.ndtr(x)


def std_normal_logcdf(x):
    """log Phi(x), accurate deep in the lower tail."""
    return special.log_ndtr(x)


def std_normal_ppf(q):
    return special.ndtri(q)


def _check_df(df):
    if not df > 0:
        raise ValueError(f"degrees of freedom must be positive, got {df!r}")


def student_t_logpdf(x, df):
    _check_df(df)
    if np.isinf(df):
        return std_normal_logpdf(x)
    x = np.asarray(x, dtype=float)
    return (
        special.gammaln(0.5 * (df + 1.0))
        - special.gammaln(0.5 * df)
        - 0.5 * np.log(df * np.pi)
        - 0.5 * (df + 1.0) * np.log1p(np.square(x) / df)
    )


def student_t_pdf(x, df):
    return np.exp(student_t_logpdf(x, df))


def student_t_cdf(x, df):
    _check_df(df)
    if np.isinf(df):
        return std_normal_cdf(x)
    return special.stdtr(df, x)


def student_t_logcdf(x, df):
    """log of the t CDF, using the incomplete-beta tail form for x < 0."""
    _check_df(df)
    if np.isinf(df):
        return std_normal_logcdf(x)
    x = np.asarray(x, dtype=float)
    tail = np.log(0.5) + np.log(special.betainc(0.5 * df, 0.5, df / (df + np.square(x))))
    with np.errstate(divide="ignore"):
        body = np.log(special.stdtr(df, x))
    return np.where(x < 0, tail, body)


# ---------------------------------------------------------------------------
# BS on the positive half line


def bs_pdf(t, alpha, sigma=1.0):
    """Density of BS(alpha, sigma) at ``t > 0``."""
    BSParams(alpha, sigma)
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise ValueError("bs_pdf is defined for t > 0 only")
    a = np.sqrt(t / sigma)
    b = np.sqrt(sigma / t)
    return (a + b) / (2.0 * alpha * t) * std_normal_pdf((a - b) / alpha)


def bs_cdf(t, alpha, sigma=1.0):
    BSParams(alpha, sigma)
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        z = (np.sqrt(t / sigma) - np.sqrt(sigma / t)) / alpha
    return np.where(t > 0, std_normal_cdf(z), 0.0)


def bs_ppf(q, alpha, sigma=1.0):
    """Closed-form quantile: sigma * (a z / 2 + sqrt((a z / 2)^2 + 1))^2."""
    BSParams(alpha, sigma)
    h = 0.5 * alpha * std_normal_ppf(q)
    return sigma * np.square(h + np.sqrt(np.square(h) + 1.0))


def bs_from_normal(z, alpha, sigma=1.0):
    """Map standard normal draws to BS(alpha, sigma) draws."""
    h = 0.5 * alpha * np.asarray(z, dtype=float)
    # algebraically equal to (h + sqrt(h^2+1))^2 but without cancellation for h << 0
    root = np.sqrt(np.square(h) + 1.0)
    base = np.where(h >= 0, h + root, 1.0 / (root - h))
    return sigma * np.square(base)


def sample_bs(alpha, sigma=1.0, n=1, seed=None):
    """Draw ``n`` variates from BS(alpha, sigma).

    ``seed`` may be an integer, a ``SeedSequence`` or a ``Generator``; the
    same integer seed always yields the same sequence.
    """
    BSParams(alpha, sigma)
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    return bs_from_normal(rng.standard_normal(n), alpha, sigma)


# ---------------------------------------------------------------------------
# log-BS on the real line


def logbs_logpdf(y, alpha, mu=0.0):
    """Log density of log-BS(alpha, mu), finite far into the tails."""
    _check_alpha(alpha)
    _check_loc(mu)
    u = 0.5 * (np.asarray(y, dtype=float) - mu)
    with np.errstate(over="ignore"):
        s = sinh_clamped(u)
        quad = (2.0 / alpha**2) * np.square(s)
    return -LOG_2 - 0.5 * LOG_2PI + np.log(2.0 / alpha) + logcosh(u) - quad


def logbs_pdf(y, alpha, mu=0.0):
    _check_alpha(alpha)
    _check_loc(mu)
    u = 0.5 * (np.asarray(y, dtype=float) - mu)
    with np.errstate(over="ignore"):
        return (
            np.exp(-0.5 * LOG_2PI)
            / alpha
            * cosh_clamped(u)
            * np.exp(-(2.0 / alpha**2) * np.square(sinh_clamped(u)))
        )


def logbs_standardize(y, alpha, mu=0.0):
    """Return (2/alpha) sinh((y - mu)/2), which is N(0, 1) under the model."""
    with np.errstate(over="ignore"):
        return (2.0 / alpha) * sinh_clamped(0.5 * (np.asarray(y, dtype=float) - mu))


def logbs_cdf(y, alpha, mu=0.0):
    _check_alpha(alpha)
    _check_loc(mu)
    return std_normal_cdf(logbs_standardize(y, alpha, mu))


def logbs_logcdf(y, alpha, mu=0.0):
    _check_alpha(alpha)
    _check_loc(mu)
    return std_normal_logcdf(logbs_standardize(y, alpha, mu))


def logbs_logsf(y, alpha, mu=0.0):
    _check_alpha(alpha)
    _check_loc(mu)
    return std_normal_logcdf(-logbs_standardize(y, alpha, mu))


def logbs_ppf(q, alpha, mu=0.0):
    _check_alpha(alpha)
    return mu + 2.0 * np.arcsinh(0.5 * alpha * std_normal_ppf(q))


def sample_logbs(alpha, mu=0.0, n=1, seed=None):
    rng = np.random.default_rng(seed)
    return mu + 2.0 * np.arcsinh(0.5 * alpha * rng.standard_normal(n))
