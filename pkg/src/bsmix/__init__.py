"""Bernoulli/Birnbaum-Saunders mixture regression for left-censored data."""

from .distributions import (
    BSParams,
    LogBSParams,
    bs_cdf,
    bs_pdf,
    bs_ppf,
    logbs_cdf,
    logbs_logpdf,
    logbs_pdf,
    logbs_ppf,
    sample_bs,
)
from .model import (
    CensoredDataset,
    DataError,
    MixtureDensityTerms,
    Theta,
    build_dataset,
    compute_terms,
    link_tau,
    mixture_cdf,
    mixture_log_density,
)
from .likelihood import hessian, hessian_blocks, loglik, observed_information, score
from .estimation import (
    FitConfig,
    FitResult,
    IdentificationError,
    fit_bernoulli_bs,
    initialize,
    refit_significant,
    wald_table,
)
from .tobit import TobitSpec, fit_tobit, tobit_loglik
from .diagnostics import EnvelopeBands, ResidualSet, describe, gcs_residuals, simulate_envelope
from .simulation import MCConfig, MCSummary, generate_dataset, generate_vaccine_like, run_study

__version__ = "0.1.0"
