"""Monte Carlo study of the mixture-model ML estimators.

The default configuration: one Uniform(0, 1)
covariate in both components, alpha in {0.1, 0.5, 1, 2, 4},
n in {100, 300, 500}, beta1 = (0.2, 0.5), beta2 = (1, 2). The point mass sits
at T = 1, i.e. y = 0, which is also the detection limit used when fitting.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .distributions import bs_from_normal
from .estimation import FitConfig, fit_bernoulli_bs
from .model import CensoredDataset, Theta, link_tau

log = logging.getLogger(__name__)

WORKERS_ENV = "BSMIX_WORKERS"
PARAM_LABELS = ("alpha", "beta1_0", "beta1_1", "beta2_0", "beta2_1")


def simulate_response(theta, X1, X2, c, rng):
    """Draw log responses from the mixture with the point mass at ``c``.

    Rows whose continuous draw falls at or below ``c`` are censored too.
    Returns ``(y, is_censored, from_point_mass)``.
    """
    n = X1.shape[0]
    mu = X1 @ theta.beta1
    tau = link_tau(X2 @ theta.beta2) if theta.beta2.size else np.ones(n)
    branch = rng.uniform(size=n)
    z = rng.standard_normal(n)
    point = branch >= tau
    y = mu + np.log(bs_from_normal(z, theta.alpha))
    y = np.where(point, c, y)
    cens = y <= c
    y = np.where(cens, c, y)
    return y, cens, point


def generate_dataset(theta, n, seed, c=0.0):
    """One replicate of the single-covariate design.

    The covariate is Uniform(0, 1); both design matrices are ``[1, x]``.
    """
    rng = np.random.default_rng(seed)
    x = rng.uniform(size=n)
    X = np.column_stack([np.ones(n), x])
    y, cens, _ = simulate_response(theta, X, X, c, rng)
    return CensoredDataset(y, cens, X, X.copy(), float(c), ("const", "x"), ("const", "x"))


@dataclass(frozen=True)
class MCConfig:
    alphas: tuple = (0.1, 0.5, 1.0, 2.0, 4.0)
    ns: tuple = (100, 300, 500)
    beta1: tuple = (0.2, 0.5)
    beta2: tuple = (1.0, 2.0)
    replications: int = 5000
    seed: int = 20190101
    retry_starts: int = 0
    fit: FitConfig = field(default_factory=FitConfig)

    def __post_init__(self):
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if any(a <= 0 for a in self.alphas) or any(n < 1 for n in self.ns):
            raise ValueError("alphas must be positive and sample sizes at least 1")


def replicate_seed(master, alpha, n, rep):
    """Counter-based seed: independent of execution order and worker count."""
    return np.random.SeedSequence(master, spawn_key=(int(round(alpha * 1e6)), int(n), int(rep)))


def _one_replicate(args):
    alpha, n, rep, cfg = args
    theta = Theta(alpha, cfg.beta1, cfg.beta2)
    d = generate_dataset(theta, n, replicate_seed(cfg.seed, alpha, n, rep))
    try:
        fr = fit_bernoulli_bs(d, cfg.fit)
        if fr.converged:
            return fr.params
    except Exception as exc:  # failures are data here
        log.debug("replicate %s/%s/%s failed: %s", alpha, n, rep, exc)
    if cfg.retry_starts > 0:
        try:
            fr = fit_bernoulli_bs(d, replace(cfg.fit, n_starts=1 + cfg.retry_starts))
            if fr.converged:
                return fr.params
        except Exception as exc:
            log.debug("retry failed: %s", exc)
    return None


def worker_count():
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _map(fn, tasks, workers):
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


@dataclass
class MCSummary:
    """Per (alpha, n, parameter) empirical mean, bias and MSE."""

    rows: list

    def cell(self, alpha, n, parameter):
        for r in self.rows:
            if r["alpha"] == alpha and r["n"] == n and r["parameter"] == parameter:
                return r
        raise KeyError((alpha, n, parameter))

    def to_tsv(self):
        cols = ["alpha", "n", "parameter", "true", "mean", "bias", "mse", "n_failed", "n_used"]
        out = ["\t".join(cols)]
        for r in self.rows:
            out.append("\t".join(_fmt(r[c]) for c in cols))
        return "\n".join(out) + "\n"

    def to_json(self):
        return json.dumps({"schema_version": 1, "rows": self.rows}, indent=2, sort_keys=True) + "\n"


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def summarize(estimates, truth):
    """Mean, bias and MSE of each column of ``estimates`` against ``truth``."""
    est = np.asarray(estimates, dtype=float)
    truth = np.asarray(truth, dtype=float)
    mean = est.mean(axis=0)
    return mean, mean - truth, np.mean((est - truth) ** 2, axis=0)


def run_study(cfg, workers=None):
    """Run every (alpha, n) cell; non-converged replicates are excluded and counted."""
    workers = worker_count() if workers is None else workers
    rows = []
    for alpha in cfg.alphas:
        for n in cfg.ns:
            tasks = [(alpha, n, r, cfg) for r in range(cfg.replications)]
            results = _map(_one_replicate, tasks, workers)
            ok = [p for p in results if p is not None]
            failed = len(results) - len(ok)
            truth = np.concatenate([[alpha], cfg.beta1, cfg.beta2])
            if ok:
                mean, bias, mse = summarize(ok, truth)
            else:
                mean = bias = mse = np.full(truth.size, np.nan)
            for j, label in enumerate(PARAM_LABELS[: truth.size]):
                rows.append(
                    {
                        "alpha": float(alpha),
                        "n": int(n),
                        "parameter": label,
                        "true": float(truth[j]),
                        "mean": float(mean[j]),
                        "bias": float(bias[j]),
                        "mse": float(mse[j]),
                        "n_failed": int(failed),
                        "n_used": len(ok),
                    }
                )
            log.info("alpha=%s n=%s done, %d failed", alpha, n, failed)
    return MCSummary(rows)


# Reference Bernoulli/BS estimates for measles-vaccine antibody data; used as a
# realistic data-generating process with binary covariates (EZ, HI, FEM).
VACCINE_THETA = Theta(
    1.208,
    (-0.061, -0.159, -0.180, 0.284),
    (0.762, 0.739, 0.347, -0.269),
)
VACCINE_LDL = 0.1
VACCINE_COVARIATES = ("EZ", "HI", "FEM")


def generate_vaccine_like(n=330, seed=0, theta=VACCINE_THETA):
    """Dataset shaped like the vaccine study: three Bernoulli(1/2) covariates
    plus intercept in both components, detection limit 0.1 (log scale c)."""
    rng = np.random.default_rng(seed)
    Z = (rng.uniform(size=(n, 3)) < 0.5).astype(float)
    X = np.column_stack([np.ones(n), Z])
    c = float(np.log(VACCINE_LDL))
    y, cens, _ = simulate_response(theta, X, X, c, rng)
    names = ("const",) + VACCINE_COVARIATES
    return CensoredDataset(y, cens, X, X.copy(), c, names, names)
