"""Rank-based scores.

Within each (function, repeat) group and each round, methods are ranked by
their best value so far (ties share the mean rank), ranks are scaled to
``[0, 1]`` by ``(rank - 1) / (M - 1)`` and averaged over rounds.  A method's
score is the mean over groups; its standard error is the spread over groups.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

log = logging.getLogger(__name__)


class ScoreError(ValueError):
    pass


@dataclass
class ScoreTable:
    methods: list[str]
    scores: np.ndarray
    se: np.ndarray
    # (function, repeat) -> array of shape (rounds, methods)
    ranks: dict

    def score(self, method: str) -> float:
        return float(self.scores[self.methods.index(method)])

    def rows(self):
        return [(m, float(s), float(e)) for m, s, e in zip(self.methods, self.scores, self.se)]


def scaled_ranks(y: np.ndarray) -> np.ndarray:
    """Scaled per-round ranks for a ``(rounds, methods)`` array of best-so-far values."""
    y = np.asarray(y, dtype=float)
    return _raw_ranks(y) / (y.shape[1] - 1)


def _raw_ranks(y: np.ndarray) -> np.ndarray:
    # zero-based, ties at the mean: multiples of 1/2, so sums stay exact
    if y.shape[1] < 2:
        raise ScoreError("rank scores need at least two methods")
    return rankdata(y, method="average", axis=1) - 1.0


def rank_scores(traces) -> ScoreTable:
    groups: dict[tuple[str, int], dict[str, np.ndarray]] = defaultdict(dict)
    methods: list[str] = []
    for t in traces:
        if t.method not in methods:
            methods.append(t.method)
        groups[(t.function, t.repeat)][t.method] = (np.asarray(t.best_so_far, dtype=float), t.error)
    if len(methods) < 2:
        raise ScoreError("rank scores need at least two methods")

    ranks = {}
    per_group = []
    for key in sorted(groups):
        g = groups[key]
        if any(err for _, err in g.values()):
            log.warning("skipping %s: a trace in this group failed", key)
            continue
        if set(g) != set(methods):
            raise ScoreError(f"group {key} is missing methods {sorted(set(methods) - set(g))}")
        lengths = {len(g[m][0]) for m in methods}
        if len(lengths) != 1:
            raise ScoreError(f"group {key} has mismatched round counts {sorted(lengths)}")
        raw = _raw_ranks(np.column_stack([g[m][0] for m in methods]))
        R, M = raw.shape
        ranks[key] = raw / (M - 1)
        per_group.append(raw.sum(axis=0) / (R * (M - 1)))
    if not per_group:
        raise ScoreError("no complete groups to score")
    S = np.array(per_group)
    se = S.std(axis=0, ddof=1) / np.sqrt(len(S)) if len(S) > 1 else np.zeros(len(methods))
    return ScoreTable(methods, S.mean(axis=0), se, ranks)


def best_so_far_bands(traces, function: str | None = None) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Per method: mean best-so-far over repeats and a band half-width of two standard errors."""
    by_method: dict[str, list[np.ndarray]] = defaultdict(list)
    for t in traces:
        if t.error or (function is not None and t.function != function):
            continue
        by_method[t.method].append(np.asarray(t.best_so_far, dtype=float))
    out = {}
    for m, runs in by_method.items():
        Y = np.array(runs)
        se = Y.std(axis=0, ddof=1) / np.sqrt(len(Y)) if len(Y) > 1 else np.zeros(Y.shape[1])
        out[m] = (Y.mean(axis=0), 2.0 * se)
    return out
