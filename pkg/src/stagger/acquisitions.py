"""Classical single-arm acquisition functions: EI, UCB and simple regret."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from .domain import check_dim, sobol_points, uniform_point, uniform_points
from .gp import GpModel
from .optim import multistart_maximize

KINDS = ("ei", "ucb", "sr", "random", "sobol")


@dataclass(frozen=True)
class AcqSpec:
    kind: str
    beta: float = 2.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown acquisition {self.kind!r}; expected one of {KINDS}")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")


def expected_improvement(mu, sigma, best):
    """E[max(0, Y - best)] for Y ~ N(mu, sigma^2); vectorized."""
    mu = np.asarray(mu, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    imp = mu - best
    safe = sigma > 0
    s = np.where(safe, sigma, 1.0)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        z = imp / s
        ei = np.where(safe, imp * norm.cdf(z) + s * norm.pdf(z), np.maximum(imp, 0.0))
    ei = np.maximum(ei, 0.0)
    return float(ei) if ei.ndim == 0 else ei


def ucb(mu, sigma, beta: float = 2.0):
    return mu + beta * sigma


def _values(spec: AcqSpec, model: GpModel, X: np.ndarray, best: float) -> np.ndarray:
    mu, var = model.mean_var(X)
    if spec.kind == "sr":
        return mu
    sigma = np.sqrt(var)
    if spec.kind == "ucb":
        return ucb(mu, sigma, spec.beta)
    return expected_improvement(mu, sigma, best)


def _value_and_grad(spec: AcqSpec, model: GpModel, best: float):
    if spec.kind == "sr":
        return model.mean_grad

    def fun(x):
        mu, var, dmu, dvar = model.mean_var_grad(x)
        sigma = np.sqrt(var)
        if sigma < 1e-12:
            if spec.kind == "ucb":
                return mu, dmu
            return max(mu - best, 0.0), dmu * float(mu > best)
        dsigma = dvar / (2.0 * sigma)
        if spec.kind == "ucb":
            return mu + spec.beta * sigma, dmu + spec.beta * dsigma
        z = (mu - best) / sigma
        cdf, pdf = norm.cdf(z), norm.pdf(z)
        return (mu - best) * cdf + sigma * pdf, cdf * dmu + pdf * dsigma

    return fun


def maximize_acquisition(spec: AcqSpec, model: GpModel, d: int, rng: np.random.Generator,
                         budget: tuple[int, int] = (8, 64), raw_samples: int = 1024) -> np.ndarray:
    """Multi-start L-BFGS-B on the acquisition; the best measured point is always a start."""
    n_starts, steps = budget
    best = float(model.data.y.max())
    raw = uniform_points(rng, raw_samples, d)
    vals = _values(spec, model, raw, best)
    top = raw[np.argsort(-vals, kind="stable")[: max(n_starts - 1, 0)]]
    lead = model.data.X[[int(np.argmax(model.data.y))]]
    x, _ = multistart_maximize(_value_and_grad(spec, model, best), np.vstack([lead, top]), maxiter=steps)
    return x


def propose_arm(spec: AcqSpec, model: GpModel, d: int, round_index: int, rng: np.random.Generator) -> np.ndarray:
    """Propose one arm.

    ``sobol`` returns point ``round_index`` of the scrambled sequence keyed by
    ``rng``, so hand in a generator in the same state every round to walk a
    single sequence.  ``ei``/``ucb``/``sr`` fall back to the first Sobol'
    point while there are no measurements.
    """
    d = check_dim(d)
    if spec.kind == "random":
        return uniform_point(rng, d)
    if spec.kind == "sobol":
        return sobol_points(round_index + 1, d, rng)[round_index]
    if model.n == 0:
        return sobol_points(1, d, rng)[0]
    return maximize_acquisition(spec, model, d, rng)
