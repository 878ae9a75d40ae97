"""Generalized Cox-Snell residuals with a simulated QQ envelope.

Under a correct model the residuals behave like a unit exponential sample.
The envelope is written as TSV so any plotting tool can draw the QQ plot.

Run: python demos/04_residual_envelope.py [output.tsv]
"""

import sys

from bsmix.diagnostics import gcs_residuals, simulate_envelope
from bsmix.estimation import fit_bernoulli_bs
from bsmix.simulation import generate_vaccine_like
from bsmix.tobit import TobitSpec, fit_tobit

d = generate_vaccine_like(n=330, seed=11)
d1 = d.select_columns(range(d.p1), [])

for fr, data in ((fit_bernoulli_bs(d), d), (fit_tobit(TobitSpec("normal"), d1), d1)):
    res = gcs_residuals(fr, data)
    env = simulate_envelope(fr, data, B=100, level=0.95, seed=0)
    print(
        f"{fr.model:<13} mean r={res.r.mean():.3f}  var r={res.r.var(ddof=1):.3f}  "
        f"outside 95% envelope={env.outside_fraction(res.sorted_r):.1%}"
    )
    if fr.model == "bernoulli-bs" and len(sys.argv) > 1:
        with open(sys.argv[1], "w") as fh:
            fh.write(env.to_tsv(res))
        print("envelope written to", sys.argv[1])
