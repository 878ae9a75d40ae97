"""A small Monte Carlo study of the ML estimators.

The full grid (five alphas, three sample sizes, 5000 replicates) is the
default of MCConfig; here a reduced version runs in under a minute.
Set BSMIX_WORKERS to use several processes; results do not depend on it.

Run: python demos/05_monte_carlo.py
"""

from bsmix.simulation import MCConfig, run_study

cfg = MCConfig(alphas=(0.5, 2.0), ns=(100, 500), replications=100)
summary = run_study(cfg)

print(f"{'alpha':>5} {'n':>4} {'parameter':<9} {'true':>6} {'mean':>8} {'bias':>8} {'mse':>8} {'excl':>4}")
for r in summary.rows:
    print(
        f"{r['alpha']:>5} {r['n']:>4} {r['parameter']:<9} {r['true']:>6} "
        f"{r['mean']:>8.4f} {r['bias']:>+8.4f} {r['mse']:>8.4f} {r['n_failed']:>4}"
    )
