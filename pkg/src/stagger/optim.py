"""Multi-start bound-constrained local search on the unit box."""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.optimize import minimize


def central_diff_grad(fun: Callable[[np.ndarray], float], x: np.ndarray, step: float = 1e-4,
                      lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    """Central-difference gradient with both probes projected into ``[lo, hi]``."""
    g = np.empty_like(x)
    for j in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[j] = min(x[j] + step, hi)
        xm[j] = max(x[j] - step, lo)
        h = xp[j] - xm[j]
        g[j] = (fun(xp) - fun(xm)) / h if h > 0 else 0.0
    return g


def multistart_maximize(fun_grad: Callable[[np.ndarray], tuple[float, np.ndarray]], starts: np.ndarray,
                        maxiter: int = 64) -> tuple[np.ndarray, float]:
    """Run L-BFGS-B from each start and return the best ``(x, value)``.

    A result replaces the incumbent only if strictly better, so ties go to the
    earliest start and the answer is never worse than ``starts[0]``.
    """
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    bounds = [(0.0, 1.0)] * starts.shape[1]

    def neg(x):
        v, g = fun_grad(x)
        return -float(v), -np.asarray(g, dtype=float)

    best_x, best_v = None, -np.inf
    for x0 in starts:
        x0 = np.clip(x0, 0.0, 1.0)
        v0 = float(fun_grad(x0)[0])
        res = minimize(neg, x0, jac=True, method="L-BFGS-B", bounds=bounds, options={"maxiter": maxiter})
        x, v = np.clip(res.x, 0.0, 1.0), -float(res.fun)
        if not (np.isfinite(v) and v >= v0):
            x, v = x0, v0
        if v > best_v:
            best_x, best_v = x, v
    return best_x, best_v
