from .diagnostics import DiagnosticsRecord, diagnostics, p_max, run_diagnostics, sample_statistics
from .experiment import ExperimentConfig, RunTrace, run_cell, run_experiment
from .methods import MethodSpec, resolve_method
from .scoring import ScoreTable, rank_scores, scaled_ranks
from .studies import ablate, sweep_M

__all__ = [
    "DiagnosticsRecord", "ExperimentConfig", "MethodSpec", "RunTrace", "ScoreTable", "ablate", "diagnostics",
    "p_max", "rank_scores", "resolve_method", "run_cell", "run_diagnostics", "run_experiment",
    "sample_statistics", "scaled_ranks", "sweep_M",
]
