"""Sampler diagnostics on the shifted sphere.

At each round of a one-arm-per-round optimization, 64 extra samples are
drawn from the sampler under test (never measured) and summarized:

* ``rmse``: mean squared distance to the true optimum,
* ``bias``: mean signed coordinate deviation from the optimum,
* ``scale``: geometric mean over dimensions of the per-dimension std,
* ``std_p_max``: spread of how often each sample wins a joint posterior draw.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..domain import make_rng, sobol_points
from ..gp import Dataset, GpModel, fit, joint_sample
from ..samplers import PssConfig, StsConfig, TsConfig, pss_samples, sts_samples, ts_samples
from ..testbed import get_function

NUM_SAMPLES = 64
NUM_PMAX_DRAWS = 1024
DEFAULT_SAMPLERS = ("sts", "pss", "ts-1000", "ts-3000", "ts-10000", "sobol")

# (model, d, rng, n) -> (n, d)
Sampler = Callable[[GpModel, int, np.random.Generator, int], np.ndarray]


@dataclass
class DiagnosticsRecord:
    rmse: float
    bias: float
    scale: float
    std_p_max: float
    duration: float
    samples: np.ndarray


def sample_statistics(samples: np.ndarray, x_star: np.ndarray) -> tuple[float, float, float]:
    """``(rmse, bias, scale)`` of ``samples`` around ``x_star``."""
    dev = np.asarray(samples, dtype=float) - np.asarray(x_star, dtype=float)
    rmse = float((dev * dev).sum(axis=1).mean())
    bias = float(dev.mean())
    sd = dev.std(axis=0)
    scale = float(np.prod(sd) ** (1.0 / sd.size))
    return rmse, bias, scale


def p_max(model: GpModel, samples: np.ndarray, rng: np.random.Generator, draws: int = NUM_PMAX_DRAWS) -> np.ndarray:
    """Fraction of joint posterior draws in which each sample is the maximum.

    Exact ties (repeated points) are split at random.
    """
    Y = joint_sample(model, samples, rng, size=draws)
    top = Y == Y.max(axis=1, keepdims=True)
    winner = np.argmax(top * rng.random(Y.shape), axis=1)
    return np.bincount(winner, minlength=len(samples)) / draws


def diagnostics(model: GpModel, true_opt: np.ndarray, sampler: Sampler, rng: np.random.Generator,
                n: int = NUM_SAMPLES) -> DiagnosticsRecord:
    t0 = time.perf_counter()
    samples = sampler(model, model.d, rng, n)
    duration = time.perf_counter() - t0
    rmse, bias, scale = sample_statistics(samples, true_opt)
    pm = p_max(model, samples, rng)
    return DiagnosticsRecord(rmse, bias, scale, float(pm.std()), duration, samples)


def make_sampler(name: str) -> Sampler:
    """Sampler for a diagnostics name: ``sts``, ``pss``, ``ts-<candidates>`` or ``sobol``."""
    if name == "sts":
        return lambda model, d, rng, n: sts_samples(model, d, StsConfig(), rng, n=n)
    if name == "pss":
        return lambda model, d, rng, n: pss_samples(model, d, PssConfig(), rng, n=n)
    if name == "sobol":
        return lambda model, d, rng, n: sobol_points(n, d, rng)
    if name.startswith("ts"):
        count = int(name.split("-", 1)[1]) if "-" in name else TsConfig().num_candidates
        cfg = TsConfig(num_candidates=count)
        return lambda model, d, rng, n: ts_samples(model, d, cfg, rng, n=n)
    raise ValueError(f"unknown diagnostics sampler {name!r}")


@dataclass
class DiagnosticsRow:
    sampler: str
    seed: int
    round: int
    rmse: float
    bias: float
    scale: float
    std_p_max: float
    duration: float
    best_so_far: float


def run_diagnostics(samplers=DEFAULT_SAMPLERS, seeds=range(5), num_dim: int = 5, num_rounds: int = 30,
                    base_seed: int = 0) -> list[DiagnosticsRow]:
    """Optimize the undistorted shifted sphere one arm per round, recording diagnostics after each refit.

    ``duration`` is the wall time to generate that round's arm.  The
    ``sobol`` baseline proposes arms along one Sobol' sequence and uses fresh
    Sobol' points as its "samples".
    """
    fn = get_function("sphere", num_dim)
    x_star = fn.known_optimum[0]
    rows = []
    for si, name in enumerate(samplers):
        sampler = make_sampler(name)
        for seed in seeds:
            rng = make_rng(base_seed, 3, si, seed)
            fit_rng = make_rng(base_seed, 4, si, seed)
            arm_seq = sobol_points(num_rounds, num_dim, rng) if name == "sobol" else None
            data = Dataset.empty(num_dim)
            model = fit(data)
            for r in range(num_rounds):
                t0 = time.perf_counter()
                arm = arm_seq[r] if arm_seq is not None else sampler(model, num_dim, rng, 1)[0]
                duration = time.perf_counter() - t0
                data = data.append(arm[None, :], fn(arm))
                model = fit(data, rng=fit_rng)
                rec = diagnostics(model, x_star, sampler, rng)
                rows.append(DiagnosticsRow(name, seed, r, rec.rmse, rec.bias, rec.scale, rec.std_p_max,
                                           duration, float(data.y.max())))
    return rows
