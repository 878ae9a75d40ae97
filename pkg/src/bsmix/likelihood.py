"""Log-likelihood, score and Hessian of the Bernoulli/BS mixture model.

Derivatives are taken with respect to the packed vector
``(alpha, beta1, beta2)``. Censored rows depend on the parameters only
through ``s = zeta2c`` and ``eta``, so their derivatives are assembled by the
chain rule from the partials of ``log(pi + tau * Phi(s))``.
"""

from __future__ import annotations

import numpy as np

from .distributions import std_normal_logcdf, std_normal_logpdf
from .model import compute_terms, censored_log_mass, uncensored_log_density


def loglik_terms(d, terms):
    """Per-observation log-likelihood contributions."""
    with np.errstate(invalid="ignore"):
        out = np.where(d.is_censored, censored_log_mass(terms), uncensored_log_density(terms))
    return out


def loglik(d, theta):
    """Log-likelihood at ``theta``; returns ``-inf`` instead of NaN on failure."""
    val = float(np.sum(loglik_terms(d, compute_terms(d, theta))))
    if not np.isfinite(val):
        return -np.inf
    return val


def _censored_partials(t):
    """Partials of log(pi + tau Phi(s)) w.r.t. s and eta, per row."""
    s = t.zeta2c
    lden = censored_log_mass(t)
    with np.errstate(invalid="ignore", over="ignore"):
        R = np.exp(t.log_tau + std_normal_logpdf(s) - lden)
        p = np.exp(t.log_tau + std_normal_logcdf(s) - lden)
        q = np.exp(t.log_pi - lden)  # 1 - p
    return s, R, p, q


def hessian_blocks(d, theta, terms=None):
    """Per-observation first and second partials.

    Returns a dict with first partials ``l_alpha``, ``l_mu``, ``l_eta`` and
    the Hessian block scalars ``g`` (alpha, alpha), ``k1`` (alpha, mu),
    ``k2`` (alpha, eta), ``v1`` (mu, mu), ``dd`` (mu, eta) and ``v2``
    (eta, eta). Uncensored rows have ``k2 == dd == 0``.
    """
    t = compute_terms(d, theta) if terms is None else terms
    a = t.alpha
    cens = d.is_censored

    # uncensored branch
    z1, z2 = t.zeta1, t.zeta2
    th = np.tanh(0.5 * (t.y - t.mu))  # zeta2 / zeta1
    with np.errstate(over="ignore", invalid="ignore"):
        u_a = (z2 * z2 - 1.0) / a
        u_m = 0.5 * (z1 * z2 - th)
        u_e = t.pi
        u_aa = -(3.0 * z2 * z2 - 1.0) / a**2
        u_am = -z1 * z2 / a
        u_mm = 0.25 * (1.0 - th * th - z1 * z1 - z2 * z2)
        u_ee = -t.tau * t.pi

    # censored branch, via s = zeta2c
    s, R, p, q = _censored_partials(t)
    l_s = R
    l_ss = -s * R - R * R
    l_se = R * q
    s_a = -s / a
    s_aa = 2.0 * s / a**2
    s_m = -0.5 * t.zeta1c
    s_mm = 0.25 * s
    s_am = 0.5 * t.zeta1c / a
    with np.errstate(invalid="ignore", over="ignore"):
        c_a = l_s * s_a
        c_m = l_s * s_m
        c_e = p - t.tau
        c_aa = l_ss * s_a * s_a + l_s * s_aa
        c_am = l_ss * s_a * s_m + l_s * s_am
        c_mm = l_ss * s_m * s_m + l_s * s_mm
        c_ae = l_se * s_a
        c_me = l_se * s_m
        c_ee = p * q - t.tau * t.pi

    zero = np.zeros_like(s)
    return {
        "l_alpha": np.where(cens, c_a, u_a),
        "l_mu": np.where(cens, c_m, u_m),
        "l_eta": np.where(cens, c_e, u_e),
        "g": np.where(cens, c_aa, u_aa),
        "k1": np.where(cens, c_am, u_am),
        "k2": np.where(cens, c_ae, zero),
        "v1": np.where(cens, c_mm, u_mm),
        "dd": np.where(cens, c_me, zero),
        "v2": np.where(cens, c_ee, u_ee),
    }


def score(d, theta, terms=None):
    """Analytic gradient of :func:`loglik`, packed as (alpha, beta1, beta2)."""
    b = hessian_blocks(d, theta, terms)
    return np.concatenate(
        [[np.sum(b["l_alpha"])], d.X1.T @ b["l_mu"], d.X2.T @ b["l_eta"]]
    )


def hessian(d, theta, terms=None):
    """Analytic Hessian of :func:`loglik` in block form.

    ::

        [ sum(g)     k1' X1       k2' X2     ]
        [ X1' k1     X1' V1 X1    X1' D X2   ]
        [ X2' k2     X2' D X1     X2' V2 X2  ]
    """
    b = hessian_blocks(d, theta, terms)
    X1, X2 = d.X1, d.X2
    p1, p2 = X1.shape[1], X2.shape[1]
    k = 1 + p1 + p2
    H = np.empty((k, k))
    H[0, 0] = np.sum(b["g"])
    H[0, 1 : 1 + p1] = b["k1"] @ X1
    H[0, 1 + p1 :] = b["k2"] @ X2
    H[1 : 1 + p1, 1 : 1 + p1] = X1.T @ (b["v1"][:, None] * X1)
    H[1 : 1 + p1, 1 + p1 :] = X1.T @ (b["dd"][:, None] * X2)
    H[1 + p1 :, 1 + p1 :] = X2.T @ (b["v2"][:, None] * X2)
    iu = np.triu_indices(k, 1)
    H[(iu[1], iu[0])] = H[iu]
    return H


def observed_information(d, theta):
    return -hessian(d, theta)


def loglik_and_score(d, theta):
    """Both quantities from one evaluation of the per-row terms."""
    t = compute_terms(d, theta)
    val = float(np.sum(loglik_terms(d, t)))
    if not np.isfinite(val):
        return -np.inf, np.full(theta.size, np.nan)
    return val, score(d, theta, t)
