"""BFGS quasi-Newton minimiser with a backtracking Armijo line search.

Infinite or NaN objective values are treated as infeasible trial points and
trigger further backtracking, so callers can return ``inf`` for parameter
values outside the model's domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    n_iterations: int
    n_evaluations: int
    converged: bool
    message: str
    trace: list


def numerical_gradient(fun, x, rel_step=1e-6):
    """Central-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for j in range(x.size):
        h = rel_step * max(1.0, abs(x[j]))
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (fun(x + e) - fun(x - e)) / (2.0 * h)
    return g


def bfgs(
    fun_and_grad,
    x0,
    max_iterations=500,
    gradient_tolerance=1e-6,
    step_tolerance=1e-10,
    armijo=1e-4,
    shrink=0.5,
    max_backtracks=60,
):
    """Minimise ``fun_and_grad(x) -> (f, g)`` starting from ``x0``.

    Convergence is declared when ``max|g| <= gradient_tolerance * (1 + |f|)``,
    or when the relative step falls below ``step_tolerance`` without the
    objective increasing.
    """
    x = np.array(x0, dtype=float)
    k = x.size
    f, g = fun_and_grad(x)
    n_eval = 1
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        return OptimizeResult(x, f, g, 0, n_eval, False, "infeasible starting point", [f])
    Hinv = np.eye(k)
    trace = [f]
    first = True
    message = "maximum iterations reached"
    converged = False
    it = 0
    for it in range(1, max_iterations + 1):
        if np.max(np.abs(g)) <= gradient_tolerance * (1.0 + abs(f)):
            converged = True
            message = "gradient below tolerance"
            it -= 1
            break
        direction = -Hinv @ g
        slope = g @ direction
        if not slope < 0:
            # lost descent; restart from steepest descent
            Hinv = np.eye(k)
            direction = -g
            slope = -(g @ g)
            first = True
        step = 1.0
        if first:
            # keep the first trial step modest in parameter space
            step = min(1.0, 1.0 / max(1e-12, np.max(np.abs(direction))))
        accepted = False
        for _ in range(max_backtracks):
            x_new = x + step * direction
            f_new, g_new = fun_and_grad(x_new)
            n_eval += 1
            if np.isfinite(f_new) and np.all(np.isfinite(g_new)) and f_new <= f + armijo * step * slope:
                accepted = True
                break
            step *= shrink
        if not accepted:
            rel = np.max(np.abs(step * direction) / np.maximum(np.abs(x), 1.0))
            if rel < step_tolerance or np.max(np.abs(g)) <= 1e3 * gradient_tolerance * (1.0 + abs(f)):
                converged = True
                message = "line search stalled at a stationary point"
            else:
                message = "line search failed"
            break
        s = x_new - x
        yv = g_new - g
        sy = s @ yv
        if first and sy > 0:
            Hinv = np.eye(k) * (sy / (yv @ yv))
            first = False
        if sy > 1e-12 * np.sqrt((s @ s) * (yv @ yv)):
            rho = 1.0 / sy
            Hy = Hinv @ yv
            Hinv = Hinv + ((sy + yv @ Hy) * rho * rho) * np.outer(s, s) - rho * (
                np.outer(Hy, s) + np.outer(s, Hy)
            )
        rel_step = np.max(np.abs(s) / np.maximum(np.abs(x_new), 1.0))
        x, f, g = x_new, f_new, g_new
        trace.append(f)
        if rel_step < step_tolerance:
            converged = np.max(np.abs(g)) <= 1e3 * gradient_tolerance * (1.0 + abs(f))
            message = "step below tolerance"
            break
    return OptimizeResult(x, f, g, it, n_eval, converged, message, trace)
