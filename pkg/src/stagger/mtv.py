"""Minimal Terminal Variance batch design.

A batch of arms is chosen to minimize the posterior variance, after
measuring the batch, summed over a fixed set of p* samples.  The sum stands
in for the p*-weighted integral of the post-measurement variance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import check_dim, sobol_points
from .gp import GpModel, conditional_variance
from .optim import central_diff_grad, multistart_maximize
from .samplers import PssConfig, StsConfig, pss_samples, sts_samples


@dataclass(frozen=True)
class MtvConfig:
    num_arms: int = 1
    num_pstar_samples: int = 16
    minimizer_starts: int = 4
    minimizer_steps: int = 100
    fd_step: float = 1e-4
    pstar_sampler: str = "sts"

    def __post_init__(self):
        for name in ("num_arms", "num_pstar_samples", "minimizer_starts", "minimizer_steps"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.pstar_sampler not in ("sts", "pss"):
            raise ValueError("pstar_sampler must be 'sts' or 'pss'")


@dataclass(frozen=True)
class BatchDesign:
    arms: np.ndarray
    objective_value: float
    pstar_points: np.ndarray


def pstar_samples(model: GpModel, d: int, n: int, rng: np.random.Generator, sampler: str = "sts") -> np.ndarray:
    """``n`` independent draws from p*; uniform when there are no measurements."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if sampler == "pss":
        return pss_samples(model, d, PssConfig(), rng, n=n)
    return sts_samples(model, d, StsConfig(), rng, n=n)


def mtv_objective(model: GpModel, pstar_points, arms) -> float:
    pstar_points = np.atleast_2d(pstar_points)
    arms = np.atleast_2d(arms)
    if pstar_points.size == 0 or arms.size == 0:
        raise ValueError("pstar_points and arms must be non-empty")
    return float(conditional_variance(model, pstar_points, arms).sum())


def _starts(P: np.ndarray, q: int, d: int, n_starts: int, rng: np.random.Generator) -> list[np.ndarray]:
    # alternate between q-subsets of the p* points and Sobol' batches
    sob = sobol_points(q * n_starts, d, rng)
    starts = []
    for i in range(n_starts):
        if i % 2 == 0:
            take = rng.choice(len(P), size=min(q, len(P)), replace=False)
            batch = P[take]
            if len(batch) < q:
                batch = np.vstack([batch, sob[i * q: i * q + q - len(batch)]])
        else:
            batch = sob[i * q:(i + 1) * q]
        starts.append(batch.reshape(-1))
    return starts


def design_batch(model: GpModel, d: int, cfg: MtvConfig, rng: np.random.Generator) -> BatchDesign:
    """Choose ``cfg.num_arms`` arms minimizing the summed conditional variance at frozen p* points."""
    d = check_dim(d)
    q = cfg.num_arms
    P = pstar_samples(model, d, cfg.num_pstar_samples, rng, cfg.pstar_sampler)

    def objective(z):
        return mtv_objective(model, P, z.reshape(q, d))

    def neg_value_grad(z):
        return -objective(z), -central_diff_grad(objective, z, cfg.fd_step)

    starts = np.array(_starts(P, q, d, cfg.minimizer_starts, rng))
    z, _ = multistart_maximize(neg_value_grad, starts, maxiter=cfg.minimizer_steps)
    arms = z.reshape(q, d)
    return BatchDesign(arms, mtv_objective(model, P, arms), P)
