"""Config parsing and CSV/SVG output."""

from __future__ import annotations

import csv
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from .experiment import ExperimentConfig, RunTrace

TRACE_COLUMNS = ("method", "function", "repeat", "round", "best_so_far", "wall_time_s")
SCORE_COLUMNS = ("method", "score", "se")


class ConfigError(ValueError):
    pass


def _csv_list(value: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in value.split(",") if v.strip())


_PARSERS = {
    "functions": _csv_list,
    "methods": _csv_list,
    "num_dim": int,
    "num_rounds": int,
    "num_arms": int,
    "repeats": int,
    "seed": int,
    "distort": lambda v: v.strip().lower() in ("1", "true", "yes", "on"),
}


def parse_config(text: str, **overrides) -> ExperimentConfig:
    """Parse flat ``key=value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig(**values)
    except (ValueError, KeyError) as exc:
        raise ConfigError(str(exc)) from None


def read_config(path, **overrides) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, **overrides)


def write_traces(traces, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for t in traces:
            for r, (b, s) in enumerate(zip(t.best_so_far, t.wall_time)):
                w.writerow([t.method, t.function, t.repeat, r, repr(float(b)), repr(float(s))])


def read_traces(*paths) -> list[RunTrace]:
    rows: dict[tuple[str, str, int], list[tuple[int, float, float]]] = {}
    for path in paths:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            missing = set(TRACE_COLUMNS) - set(reader.fieldnames or ())
            if missing:
                raise ConfigError(f"{path}: missing columns {sorted(missing)}")
            for row in reader:
                key = (row["method"], row["function"], int(row["repeat"]))
                rows.setdefault(key, []).append(
                    (int(row["round"]), float(row["best_so_far"]), float(row["wall_time_s"])))
    traces = []
    for (method, function, repeat), items in rows.items():
        items.sort()
        traces.append(RunTrace(method, function, repeat, np.array([b for _, b, _ in items]),
                               np.array([s for _, _, s in items])))
    return traces


def write_scores(table, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SCORE_COLUMNS)
        for m, s, e in table.rows():
            w.writerow([m, repr(s), repr(e)])


def write_rows(rows, path) -> None:
    """Write a list of dataclass rows to CSV."""
    rows = list(rows)
    if not rows:
        Path(path).write_text("")
        return
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f.name for f in fields(rows[0])])
        for row in rows:
            w.writerow(list(asdict(row).values()))


def write_svg(traces, path) -> None:
    """Best-so-far mean +/- 2 standard errors per method, one panel per function."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    from .scoring import best_so_far_bands

    functions = sorted({t.function for t in traces})
    fig, axes = plt.subplots(1, len(functions), figsize=(4.5 * len(functions), 3.5), squeeze=False)
    for ax, fname in zip(axes[0], functions):
        for method, (mean, band) in best_so_far_bands(traces, fname).items():
            rounds = np.arange(len(mean))
            ax.plot(rounds, mean, label=method)
            ax.fill_between(rounds, mean - band, mean + band, alpha=0.2)
        ax.set_title(fname)
        ax.set_xlabel("round")
        ax.set_ylabel("best so far")
    axes[0][-1].legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
