"""Optimization runs: functions x methods x repeats, one trace per cell."""

from __future__ import annotations

import logging
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..domain import check_dim, make_rng
from ..gp import Dataset, fit
from ..testbed import distort, get_function
from .methods import ArmGenerator, resolve_method

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExperimentConfig:
    functions: tuple[str, ...] = ("sphere",)
    num_dim: int = 1
    num_rounds: int | None = None
    num_arms: int = 1
    methods: tuple[str, ...] = ("sts", "random")
    repeats: int = 1
    seed: int = 0
    distort: bool = True

    def __post_init__(self):
        object.__setattr__(self, "functions", tuple(self.functions))
        object.__setattr__(self, "methods", tuple(self.methods))
        check_dim(self.num_dim)
        if self.num_rounds is None:
            object.__setattr__(self, "num_rounds", max(30, self.num_dim))
        if self.num_rounds < 1 or self.num_arms < 1 or self.repeats < 1:
            raise ValueError("num_rounds, num_arms and repeats must all be at least 1")
        if not self.functions or not self.methods:
            raise ValueError("need at least one function and one method")
        for name in self.functions:
            get_function(name, self.num_dim)
        for name in self.methods:
            resolve_method(name)


@dataclass
class RunTrace:
    method: str
    function: str
    repeat: int
    best_so_far: np.ndarray
    wall_time: np.ndarray
    X: np.ndarray = field(repr=False, default=None)
    y: np.ndarray = field(repr=False, default=None)
    error: str | None = None


def _key(name: str) -> int:
    return zlib.crc32(name.encode())


def distortion_seed(seed: int, function: str, repeat: int) -> int:
    """Shared by every method so all methods face the same distorted function."""
    return int(make_rng(seed, 0, _key(function), repeat).integers(2**63 - 1))


def method_rng(seed: int, function: str, method: str, repeat: int) -> np.random.Generator:
    return make_rng(seed, 1, _key(function), _key(method), repeat)


def run_cell(cfg: ExperimentConfig, function: str, method: str, repeat: int) -> RunTrace:
    d, q, R = cfg.num_dim, cfg.num_arms, cfg.num_rounds
    fn = get_function(function, d)
    if cfg.distort:
        fn = distort(fn, distortion_seed(cfg.seed, function, repeat))
    rng = method_rng(cfg.seed, function, method, repeat)
    fit_rng = make_rng(cfg.seed, 2, _key(function), _key(method), repeat)
    spec = resolve_method(method)
    gen = ArmGenerator(spec, d, q, R, rng)
    needs_model = spec.kind not in ("random", "sobol")
    data = Dataset.empty(d)
    model = fit(data)
    best = np.full(R, np.nan)
    wall = np.full(R, np.nan)
    error = None
    try:
        for r in range(R):
            t0 = time.perf_counter()
            arms = np.clip(np.asarray(gen(model, r), dtype=float).reshape(q, d), 0.0, 1.0)
            wall[r] = time.perf_counter() - t0
            data = data.append(arms, fn(arms))
            best[r] = data.y.max()
            if needs_model and r + 1 < R:
                model = fit(data, rng=fit_rng)
    except Exception as exc:  # a failing method must not take down the whole experiment
        log.exception("method %s failed on %s repeat %d", method, function, repeat)
        error = f"{type(exc).__name__}: {exc}"
    done = ~np.isnan(best)
    return RunTrace(method, function, repeat, best[done], wall[done], data.X, data.y, error)


def _run_cell_args(args):
    return run_cell(*args)


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> list[RunTrace]:
    """Run every (function, method, repeat) cell; order is function, then method, then repeat."""
    cells = [(cfg, f, m, r) for f in cfg.functions for m in cfg.methods for r in range(cfg.repeats)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(_run_cell_args, cells))
    traces = []
    for cell in cells:
        log.info("running %s / %s / repeat %d", cell[1], cell[2], cell[3])
        traces.append(run_cell(*cell))
    return traces


def with_methods(cfg: ExperimentConfig, methods) -> ExperimentConfig:
    return replace(cfg, methods=tuple(methods))
