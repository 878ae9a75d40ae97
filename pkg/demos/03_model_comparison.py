"""Compare the mixture against tobit models with four error laws.

Likelihoods are put on the original response scale before comparing AIC,
since the normal and Student-t tobit models fit the raw response while
the log-normal and BS variants fit its logarithm.

Run: python demos/03_model_comparison.py
"""

from bsmix.estimation import fit_bernoulli_bs
from bsmix.simulation import generate_vaccine_like
from bsmix.tobit import TobitSpec, fit_tobit

d = generate_vaccine_like(n=330, seed=7)
d1 = d.select_columns(range(d.p1), [])  # tobit models use the continuous design only

fits = [fit_bernoulli_bs(d)] + [fit_tobit(TobitSpec(law), d1) for law in ("normal", "student_t", "log_normal", "bs")]

print(f"{'model':<14}{'k':>3}{'loglik':>11}{'AIC':>10}")
for fr in sorted(fits, key=lambda f: f.aic_original_scale):
    extra = f"  (df={fr.extra['df']:g})" if "df" in fr.extra else ""
    print(f"{fr.model:<14}{fr.n_free:>3}{fr.loglik_original_scale:>11.2f}{fr.aic_original_scale:>10.2f}{extra}")
