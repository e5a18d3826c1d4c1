"""Samplers that draw arms from p*(x), the posterior probability of being the maximizer.

* :func:`sts_sample` walks a chain from a good starting point, proposing
  moves toward uniform targets with log-uniform ("stagger") step lengths and
  accepting whichever of the two points wins a joint posterior draw.
* :func:`ts_sample` is classic Thompson sampling over uniform candidates.
* :func:`pss_sample` is a Hit-and-Run chain with an adaptive Gaussian
  chord proposal, kept as a baseline.

Every sampler has a batched ``*_samples`` form that runs ``n`` independent
chains (or draws) at once; the single-draw functions are thin wrappers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import check_dim, uniform_points
from .gp import GpModel, argmax_mean, joint_sample, rff_posterior_sampler

DEFAULT_K = math.log(1e6)

INIT_MODES = ("argmax-mean", "uniform", "best-measured", "thompson-at-measured")
PROPOSAL_MODES = ("stagger", "uniform")


@dataclass(frozen=True)
class StsConfig:
    M: int = 30
    k: float = DEFAULT_K
    init_mode: str = "argmax-mean"
    proposal_mode: str = "stagger"

    def __post_init__(self):
        if self.M < 0:
            raise ValueError("M must be non-negative")
        if not self.k > 0:
            raise ValueError("k must be positive")
        if self.init_mode not in INIT_MODES:
            raise ValueError(f"unknown init_mode {self.init_mode!r}; expected one of {INIT_MODES}")
        if self.proposal_mode not in PROPOSAL_MODES:
            raise ValueError(f"unknown proposal_mode {self.proposal_mode!r}; expected one of {PROPOSAL_MODES}")


# the canonical sampler and its ablations
STS_VARIANTS = {
    "sts": StsConfig(),
    "sts-ui": StsConfig(init_mode="uniform"),
    "sts-m": StsConfig(init_mode="best-measured"),
    "sts-t": StsConfig(init_mode="thompson-at-measured"),
    "sts-ns": StsConfig(proposal_mode="uniform"),
}


@dataclass(frozen=True)
class TsConfig:
    """Candidate-set Thompson sampling.

    Above ``exact_limit`` candidates the joint draw switches from an exact
    Cholesky draw to a random-Fourier-feature posterior sample with
    ``num_features`` features.
    """

    num_candidates: int = 1000
    exact_limit: int = 4096
    num_features: int = 1024

    def __post_init__(self):
        if self.num_candidates < 1:
            raise ValueError("num_candidates must be at least 1")


@dataclass(frozen=True)
class PssConfig:
    iterations: int = 100
    proposal_scale: float = 0.5
    scale_up: float = 1.1
    scale_down: float = 0.9
    bisection_steps: int = 16

    def __post_init__(self):
        if self.iterations < 1 or self.bisection_steps < 1:
            raise ValueError("iterations and bisection_steps must be at least 1")
        if not (self.proposal_scale > 0 and self.scale_up > 1 and 0 < self.scale_down < 1):
            raise ValueError("need proposal_scale > 0, scale_up > 1 and 0 < scale_down < 1")


def stagger_length(rng: np.random.Generator, k: float = DEFAULT_K, size=None):
    """``exp(-k U)`` with ``U ~ Uniform(0, 1)``: log-uniform on ``[exp(-k), 1]``.

    Takes no state, so the proposal is the same wherever the chain is.
    """
    return np.exp(-k * rng.random(size))


def perturb(x_a: np.ndarray, x_t: np.ndarray, s) -> np.ndarray:
    """Move ``x_a`` a fraction ``s`` of the way to ``x_t``.

    A convex combination of box points, so the result stays in the box.
    """
    x_a = np.asarray(x_a, dtype=float)
    x_t = np.asarray(x_t, dtype=float)
    s = np.asarray(s, dtype=float)
    if s.ndim == 1 and x_a.ndim == 2:
        s = s[:, None]
    return np.clip(x_a + s * (x_t - x_a), 0.0, 1.0)


def _sts_init(model: GpModel, d: int, cfg: StsConfig, rng: np.random.Generator, n: int) -> np.ndarray:
    if cfg.init_mode == "argmax-mean":
        return np.tile(argmax_mean(model, d, rng=rng), (n, 1))
    if cfg.init_mode == "uniform":
        return uniform_points(rng, n, d)
    X = model.data.X
    if cfg.init_mode == "best-measured":
        return np.tile(X[int(np.argmax(model.data.y))], (n, 1))
    draws = joint_sample(model, X, rng, size=n)
    return X[np.argmax(draws, axis=1)].copy()


def sts_samples(model: GpModel, d: int, cfg: StsConfig = StsConfig(), rng: np.random.Generator | None = None,
                n: int = 1) -> np.ndarray:
    """Run ``n`` independent stagger chains and return their final states, shape ``(n, d)``.

    With no measurements p* is taken as uniform.  In argmax-mean mode the
    posterior-mean maximizer is found once and shared by all chains.
    """
    d = check_dim(d)
    rng = np.random.default_rng() if rng is None else rng
    if model.n == 0:
        return uniform_points(rng, n, d)
    x_a = _sts_init(model, d, cfg, rng, n)
    for _ in range(cfg.M):
        x_t = uniform_points(rng, n, d)
        if cfg.proposal_mode == "stagger":
            s = stagger_length(rng, cfg.k, n)
        else:
            s = rng.random(n)
        x_p = perturb(x_a, x_t, s)
        y, y_p = model.pair_samples(x_a, x_p, rng)
        x_a = np.where((y_p > y)[:, None], x_p, x_a)
    return x_a


def sts_sample(model: GpModel, d: int, cfg: StsConfig = StsConfig(), rng: np.random.Generator | None = None):
    return sts_samples(model, d, cfg, rng, n=1)[0]


def _candidate_argmax(model: GpModel, cands: np.ndarray, cfg: TsConfig, rng: np.random.Generator,
                      n: int) -> np.ndarray:
    if len(cands) <= cfg.exact_limit:
        values = joint_sample(model, cands, rng, size=n)
    else:
        values = rff_posterior_sampler(model, rng, size=n, num_features=cfg.num_features)(cands)
    return cands[np.argmax(values, axis=1)]


def ts_samples(model: GpModel, d: int, cfg: TsConfig = TsConfig(), rng: np.random.Generator | None = None,
               n: int = 1, shared_candidates: bool = True) -> np.ndarray:
    """Draw ``n`` Thompson samples, shape ``(n, d)``.

    With ``shared_candidates`` all draws reuse one uniform candidate set (one
    factorization, ``n`` posterior draws); otherwise every draw gets its own.
    """
    d = check_dim(d)
    rng = np.random.default_rng() if rng is None else rng
    if model.n == 0:
        return uniform_points(rng, n, d)
    if shared_candidates:
        return _candidate_argmax(model, uniform_points(rng, cfg.num_candidates, d), cfg, rng, n)
    return np.vstack([
        _candidate_argmax(model, uniform_points(rng, cfg.num_candidates, d), cfg, rng, 1) for _ in range(n)
    ])


def ts_sample(model: GpModel, d: int, cfg: TsConfig = TsConfig(), rng: np.random.Generator | None = None):
    return ts_samples(model, d, cfg, rng, n=1)[0]


def _inside(x: np.ndarray) -> np.ndarray:
    return np.all((x >= 0.0) & (x <= 1.0), axis=-1)


def chord_extent(x: np.ndarray, u: np.ndarray, steps: int) -> np.ndarray:
    """Largest ``t >= 0`` with ``x + t u`` inside the box, by step-out then bisection.

    Works row-wise on ``(n, d)`` arrays.  The returned value is always inside
    and within ``2**-steps`` of the boundary when the bracket is ``[0, 1]``.
    """
    x = np.atleast_2d(x)
    u = np.atleast_2d(u)
    hi = np.ones(len(x))
    while True:
        still = _inside(x + hi[:, None] * u)
        if not still.any():
            break
        hi = np.where(still, 2.0 * hi, hi)
    lo = np.zeros(len(x))
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        ok = _inside(x + mid[:, None] * u)
        lo = np.where(ok, mid, lo)
        hi = np.where(ok, hi, mid)
    return lo


def pss_samples(model: GpModel, d: int, cfg: PssConfig = PssConfig(), rng: np.random.Generator | None = None,
                n: int = 1) -> np.ndarray:
    """Run ``n`` independent Hit-and-Run chains with adaptive Gaussian chord steps."""
    d = check_dim(d)
    rng = np.random.default_rng() if rng is None else rng
    x = uniform_points(rng, n, d)
    if model.n == 0:
        return x
    scale = np.full(n, cfg.proposal_scale)
    for _ in range(cfg.iterations):
        u = rng.standard_normal((n, d))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        t_hi = chord_extent(x, u, cfg.bisection_steps)
        t_lo = -chord_extent(x, -u, cfg.bisection_steps)
        t = rng.standard_normal(n) * scale * (t_hi - t_lo)
        t = np.clip(t, t_lo, t_hi)
        x_p = np.clip(x + t[:, None] * u, 0.0, 1.0)
        y, y_p = model.pair_samples(x, x_p, rng)
        accept = y_p > y
        x = np.where(accept[:, None], x_p, x)
        scale = np.where(accept, scale * cfg.scale_up, scale * cfg.scale_down)
    return x


def pss_sample(model: GpModel, d: int, cfg: PssConfig = PssConfig(), rng: np.random.Generator | None = None):
    return pss_samples(model, d, cfg, rng, n=1)[0]
