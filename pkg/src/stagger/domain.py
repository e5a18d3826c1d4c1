"""Unit-box geometry and seeded point generation.

Points are plain ``numpy`` arrays: a single point has shape ``(d,)`` and a
set of points has shape ``(n, d)``.  All randomness flows through explicit
``numpy.random.Generator`` objects; :func:`make_rng` derives independent
streams from a ``(seed, stream...)`` key.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.stats import qmc


class InvalidDimensionError(ValueError):
    """Raised when a dimension is not a positive integer or does not match."""


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Return a generator for the stream ``(seed, *stream)``.

    Equal keys give bitwise-identical sequences; distinct keys give
    independent streams (``SeedSequence`` spawn keys).
    """
    ss = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(ss))


def check_dim(d: int) -> int:
    if not isinstance(d, (int, np.integer)) or isinstance(d, bool) or d < 1:
        raise InvalidDimensionError(f"dimension must be a positive integer, got {d!r}")
    return int(d)


def in_box(x: np.ndarray, tol: float = 0.0) -> bool:
    x = np.asarray(x)
    return bool(np.all(x >= -tol) and np.all(x <= 1.0 + tol))


def as_points(x, d: int | None = None) -> np.ndarray:
    """Coerce ``x`` to an ``(n, d)`` float array, checking the dimension."""
    arr = np.atleast_2d(np.asarray(x, dtype=float))
    if arr.ndim != 2:
        raise InvalidDimensionError(f"expected points of shape (n, d), got {arr.shape}")
    if d is not None and arr.shape[1] != d:
        raise InvalidDimensionError(f"points have dimension {arr.shape[1]}, expected {d}")
    return arr


def uniform_point(rng: np.random.Generator, d: int) -> np.ndarray:
    d = check_dim(d)
    return rng.random(d)


def uniform_points(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    d = check_dim(d)
    return rng.random((n, d))


def sobol_points(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """First ``n`` points of an Owen-scrambled Sobol' sequence keyed by ``rng``.

    Prefixes are stable: the first ``k`` rows of ``sobol_points(n, ...)`` equal
    ``sobol_points(k, ...)`` for the same generator state.
    """
    d = check_dim(d)
    if n <= 0:
        return np.empty((0, d))
    seed = int(rng.integers(0, 2**63 - 1))
    engine = qmc.Sobol(d, scramble=True, seed=seed)
    with warnings.catch_warnings():
        # balance warning for non powers of two
        warnings.simplefilter("ignore", UserWarning)
        return engine.random(n)
