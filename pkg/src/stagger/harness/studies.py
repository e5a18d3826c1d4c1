"""Ablation and walk-length sweeps built on :func:`run_experiment`."""

from __future__ import annotations

from .experiment import ExperimentConfig, run_experiment, with_methods
from .scoring import ScoreTable, rank_scores

ABLATION_METHODS = ("sts", "sts-ui", "sts-m", "sts-t", "sts-ns", "pss", "ts", "random")


def ablate(cfg: ExperimentConfig, methods=ABLATION_METHODS, jobs: int = 1):
    """Run the canonical sampler against its ablations; returns ``(traces, scores)``."""
    traces = run_experiment(with_methods(cfg, methods), jobs=jobs)
    return traces, rank_scores(traces)


def sweep_method_name(M: int) -> str:
    return f"sts:M={int(M)}"


def sweep_M(cfg: ExperimentConfig, M_values, jobs: int = 1):
    """Score STS at each walk length against the others; one score row per M.

    A single M value has nothing to rank against, so it is scored against
    ``random``, which is dropped from the returned table.
    """
    M_values = [int(M) for M in M_values]
    if any(M < 0 for M in M_values):
        raise ValueError("M values must be non-negative")
    names = [sweep_method_name(M) for M in dict.fromkeys(M_values)]
    padded = names if len(names) > 1 else names + ["random"]
    traces = run_experiment(with_methods(cfg, padded), jobs=jobs)
    table = rank_scores(traces)
    keep = [table.methods.index(n) for n in names]
    return traces, ScoreTable(names, table.scores[keep], table.se[keep], table.ranks)
