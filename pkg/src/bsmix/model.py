"""Censored data container and the Bernoulli/BS mixture density.

Everything here lives on the log scale. The detection limit ``c`` is the log
of the assay limit; censored rows store ``y == c`` and carry both the point
mass and the continuous mass below ``c``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .distributions import (
    logbs_logpdf,
    logcosh,
    sinh_clamped,
    cosh_clamped,
    std_normal_cdf,
    std_normal_logcdf,
)


class DataError(ValueError):
    """Raised for malformed or non-identifiable input data."""


@dataclass(frozen=True)
class CensoredDataset:
    """Left-censored responses on the log scale with two design matrices.

    Use :func:`build_dataset` rather than the constructor; it performs the
    log transform, derives the censoring indicator and validates ranks.
    """

    y: np.ndarray
    is_censored: np.ndarray
    X1: np.ndarray
    X2: np.ndarray
    c: float
    x1_names: tuple = ()
    x2_names: tuple = ()

    def __post_init__(self):
        for name in ("y", "is_censored", "X1", "X2"):
            arr = getattr(self, name)
            arr.setflags(write=False)
        if not self.x1_names:
            object.__setattr__(self, "x1_names", tuple(f"x1_{j}" for j in range(self.p1)))
        if not self.x2_names:
            object.__setattr__(self, "x2_names", tuple(f"x2_{j}" for j in range(self.p2)))

    @property
    def n(self):
        return self.y.shape[0]

    @property
    def m(self):
        return int(self.is_censored.sum())

    @property
    def p1(self):
        return self.X1.shape[1]

    @property
    def p2(self):
        return self.X2.shape[1]

    def subset(self, rows):
        """Dataset restricted to ``rows`` (indices or boolean mask)."""
        return CensoredDataset(
            y=self.y[rows].copy(),
            is_censored=self.is_censored[rows].copy(),
            X1=self.X1[rows].copy(),
            X2=self.X2[rows].copy(),
            c=self.c,
            x1_names=self.x1_names,
            x2_names=self.x2_names,
        )

    def select_columns(self, cols1, cols2):
        return CensoredDataset(
            y=self.y.copy(),
            is_censored=self.is_censored.copy(),
            X1=self.X1[:, list(cols1)].copy(),
            X2=self.X2[:, list(cols2)].copy(),
            c=self.c,
            x1_names=tuple(self.x1_names[j] for j in cols1),
            x2_names=tuple(self.x2_names[j] for j in cols2),
        )


def _as_design(X, n, label):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] != n:
        raise DataError(f"{label} must have {n} rows, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DataError(f"{label} contains NaN or infinite entries")
    if X.shape[1] > 0 and np.linalg.matrix_rank(X) < X.shape[1]:
        raise DataError(f"{label} is rank deficient")
    return np.array(X, copy=True)


def build_dataset(response, ldl, X1, X2=None, already_log=False, x1_names=(), x2_names=()):
    """Assemble a :class:`CensoredDataset`.

    Parameters
    ----------
    response : array_like
        Raw responses (positive) or, with ``already_log``, log responses.
    ldl : float
        Lower detection limit on the same scale as ``response``.
    X1, X2 : array_like
        Design matrices of the continuous and logit components. Intercept
        columns are not added here. ``X2`` defaults to ``X1``.
    """
    r = np.asarray(response, dtype=float).ravel()
    n = r.shape[0]
    if n == 0:
        raise DataError("empty response")
    if not np.all(np.isfinite(r)):
        raise DataError("response contains NaN or infinite entries")
    if already_log:
        y = r.copy()
        c = float(ldl)
    else:
        if np.any(r <= 0):
            bad = int(np.flatnonzero(r <= 0)[0])
            raise DataError(f"nonpositive response {r[bad]!r} at row {bad}")
        if not ldl > 0:
            raise DataError("detection limit must be positive on the original scale")
        y = np.log(r)
        c = float(np.log(ldl))
    if not np.isfinite(c):
        raise DataError("detection limit must be finite")
    cens = y <= c
    y[cens] = c
    X1 = _as_design(X1, n, "X1")
    X2 = X1.copy() if X2 is None else _as_design(X2, n, "X2")
    return CensoredDataset(y, cens, X1, X2, c, tuple(x1_names), tuple(x2_names))


@dataclass(frozen=True)
class Theta:
    """Mixture parameters packed in the fixed order (alpha, beta1, beta2)."""

    alpha: float
    beta1: np.ndarray
    beta2: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta1", np.atleast_1d(np.asarray(self.beta1, dtype=float)))
        object.__setattr__(self, "beta2", np.atleast_1d(np.asarray(self.beta2, dtype=float)))
        if not (self.alpha > 0 and np.isfinite(self.alpha)):
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")

    def pack(self):
        return np.concatenate([[self.alpha], self.beta1, self.beta2])

    @classmethod
    def unpack(cls, vec, p1, p2=None):
        vec = np.asarray(vec, dtype=float)
        if p2 is None:
            p2 = vec.size - 1 - p1
        if vec.size != 1 + p1 + p2:
            raise ValueError(f"expected {1 + p1 + p2} parameters, got {vec.size}")
        return cls(vec[0], vec[1 : 1 + p1].copy(), vec[1 + p1 :].copy())

    @property
    def size(self):
        return 1 + self.beta1.size + self.beta2.size


def link_tau(eta):
    """Logistic link, exp(eta) / (1 + exp(eta)), stable for any eta."""
    eta = np.asarray(eta, dtype=float)
    return np.exp(-np.logaddexp(0.0, -eta))


def log_tau(eta):
    return -np.logaddexp(0.0, -np.asarray(eta, dtype=float))


def log_pi(eta):
    """log(1 - tau)."""
    return -np.logaddexp(0.0, np.asarray(eta, dtype=float))


@dataclass(frozen=True)
class MixtureDensityTerms:
    """Per-observation intermediates at a given parameter value."""

    alpha: float
    mu: np.ndarray
    eta: np.ndarray
    tau: np.ndarray
    pi: np.ndarray
    log_tau: np.ndarray
    log_pi: np.ndarray
    zeta1: np.ndarray
    zeta2: np.ndarray
    zeta1c: np.ndarray
    zeta2c: np.ndarray
    log_zeta1: np.ndarray
    y: np.ndarray
    c: float


def compute_terms(d, theta):
    """Evaluate mu, tau, pi and the zeta quantities at ``theta``."""
    if theta.beta1.size != d.p1 or theta.beta2.size != d.p2:
        raise ValueError(
            f"parameter sizes ({theta.beta1.size}, {theta.beta2.size}) do not match "
            f"design widths ({d.p1}, {d.p2})"
        )
    a = theta.alpha
    mu = d.X1 @ theta.beta1
    with np.errstate(invalid="ignore"):
        eta = d.X2 @ theta.beta2 if d.p2 else np.full(d.n, np.inf)
    u = 0.5 * (d.y - mu)
    uc = 0.5 * (d.c - mu)
    with np.errstate(over="ignore"):
        zeta1 = (2.0 / a) * cosh_clamped(u)
        zeta2 = (2.0 / a) * sinh_clamped(u)
        zeta1c = (2.0 / a) * cosh_clamped(uc)
        zeta2c = (2.0 / a) * sinh_clamped(uc)
    lt = log_tau(eta)
    lp = log_pi(eta)
    return MixtureDensityTerms(
        alpha=a,
        mu=mu,
        eta=eta,
        tau=np.exp(lt),
        pi=np.exp(lp),
        log_tau=lt,
        log_pi=lp,
        zeta1=zeta1,
        zeta2=zeta2,
        zeta1c=zeta1c,
        zeta2c=zeta2c,
        log_zeta1=np.log(2.0 / a) + logcosh(u),
        y=d.y,
        c=d.c,
    )


def censored_log_mass(terms):
    """log(pi + tau * Phi(zeta2c)) for every row."""
    return np.logaddexp(terms.log_pi, terms.log_tau + std_normal_logcdf(terms.zeta2c))


def uncensored_log_density(terms):
    """log(tau) + log-BS log density at y for every row."""
    return terms.log_tau + logbs_logpdf(terms.y, terms.alpha, terms.mu)


def mixture_log_density(i, terms, is_censored):
    """Log density of observation ``i`` (or an index array) under the mixture."""
    i = np.asarray(i)
    cens = np.asarray(is_censored)[i]
    lc = np.logaddexp(terms.log_pi[i], terms.log_tau[i] + std_normal_logcdf(terms.zeta2c[i]))
    lu = terms.log_tau[i] + logbs_logpdf(terms.y[i], terms.alpha, terms.mu[i])
    return np.where(cens, lc, lu)


def mixture_cdf(y_query, i, terms):
    """Mixture CDF of row ``i`` at ``y_query`` (log scale).

    Constant at pi + (1 - pi) F(c) on (-inf, c] and pi + (1 - pi) F(y)
    above ``c``, with F the log-BS CDF.
    """
    yq = np.maximum(np.asarray(y_query, dtype=float), terms.c)
    mu = terms.mu[i]
    z = (2.0 / terms.alpha) * sinh_clamped(0.5 * (yq - mu))
    return terms.pi[i] + terms.tau[i] * std_normal_cdf(z)


def mixture_log_sf(y_query, i, terms):
    """log(1 - mixture_cdf), computed as log(tau) + log Phi(-z)."""
    yq = np.maximum(np.asarray(y_query, dtype=float), terms.c)
    z = (2.0 / terms.alpha) * sinh_clamped(0.5 * (yq - terms.mu[i]))
    return terms.log_tau[i] + std_normal_logcdf(-z)
