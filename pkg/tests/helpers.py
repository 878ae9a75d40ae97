import numpy as np

from bsmix.model import CensoredDataset, Theta
from bsmix.simulation import simulate_response


def random_instance(seed, n=50, p1=2, p2=2):
    """A random (dataset, theta) pair with a mix of censored and uncensored rows."""
    rng = np.random.default_rng(seed)
    alpha = float(rng.uniform(0.3, 2.0))
    X1 = np.column_stack([np.ones(n), rng.normal(size=(n, p1 - 1))])
    X2 = np.column_stack([np.ones(n), rng.normal(size=(n, p2 - 1))])
    theta = Theta(alpha, rng.normal(scale=0.5, size=p1), rng.normal(scale=0.7, size=p2))
    c = float(rng.uniform(-0.8, 0.2))
    y, cens, _ = simulate_response(theta, X1, X2, c, rng)
    if cens.all() or not cens.any():
        cens[0], cens[1] = True, False
        y[0], y[1] = c, c + 0.5
    d = CensoredDataset(y, cens, X1, X2, c, tuple(f"a{j}" for j in range(p1)), tuple(f"b{j}" for j in range(p2)))
    # evaluate away from the generating value
    th = Theta(
        alpha * float(rng.uniform(0.7, 1.4)),
        theta.beta1 + rng.normal(scale=0.2, size=p1),
        theta.beta2 + rng.normal(scale=0.2, size=p2),
    )
    return d, th


ACCEPTANCE = []


def record(label, ok, detail):
    """Log one acceptance line; the session summary prints them all."""
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def note(text):
    ACCEPTANCE.append(f"INFO  {text}")
    print(text)
