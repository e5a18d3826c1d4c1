"""Benchmark objectives on the unit box, maximization convention.

Each function is defined in its usual native domain in minimization form;
:func:`evaluate_unit` maps unit-box points to the native domain and negates,
so larger is always better.  The sphere is the shifted form
``-(x - 0.65)^2`` used for sampler diagnostics, evaluated directly on the
unit box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .domain import check_dim, make_rng

SPHERE_CENTER = 0.65


class UnknownFunctionError(KeyError):
    pass


@dataclass(frozen=True)
class Distortion:
    """Permutation, then reflection ``x -> 1 - x``, then toroidal shift, all in unit coordinates."""

    permutation: np.ndarray
    reflections: np.ndarray
    shifts: np.ndarray

    def __post_init__(self):
        perm = np.asarray(self.permutation, dtype=int)
        if sorted(perm.tolist()) != list(range(perm.size)):
            raise ValueError("permutation must be a bijection on 0..d-1")
        object.__setattr__(self, "permutation", perm)
        object.__setattr__(self, "reflections", np.asarray(self.reflections, dtype=bool))
        object.__setattr__(self, "shifts", np.asarray(self.shifts, dtype=float))

    @classmethod
    def identity(cls, d: int) -> "Distortion":
        return cls(np.arange(d), np.zeros(d, bool), np.zeros(d))

    @classmethod
    def random(cls, d: int, seed: int) -> "Distortion":
        rng = make_rng(seed)
        return cls(rng.permutation(d), rng.random(d) < 0.5, rng.random(d))

    def apply(self, x: np.ndarray) -> np.ndarray:
        v = x[..., self.permutation]
        v = np.where(self.reflections, 1.0 - v, v)
        return np.mod(v + self.shifts, 1.0)

    def inverse(self, w: np.ndarray) -> np.ndarray:
        v = np.mod(w - self.shifts, 1.0)
        v = np.where(self.reflections, 1.0 - v, v)
        x = np.empty_like(v)
        x[..., self.permutation] = v
        return x


@dataclass(frozen=True)
class TestFunction:
    """``objective`` takes native coordinates ``(n, d)`` and returns maximization values ``(n,)``."""

    __test__ = False  # not a pytest class

    name: str
    dim: int
    native_domain: np.ndarray
    objective: Callable[[np.ndarray], np.ndarray]
    known_optimum: tuple[np.ndarray, float] | None = None
    distortions: tuple[Distortion, ...] = ()

    def to_native(self, u: np.ndarray) -> np.ndarray:
        lo, hi = self.native_domain[:, 0], self.native_domain[:, 1]
        return lo + u * (hi - lo)

    def __call__(self, x):
        return evaluate_unit(self, x)


def evaluate_unit(fn: TestFunction, x):
    """Evaluate at unit-box point(s); returns a float for one point, an array for many."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    X = np.atleast_2d(arr)
    if X.shape[1] != fn.dim:
        raise ValueError(f"{fn.name} is {fn.dim}-dimensional, got points of dimension {X.shape[1]}")
    if np.any(X < 0.0) or np.any(X > 1.0):
        raise ValueError("point outside the unit box")
    for dist in reversed(fn.distortions):
        X = dist.apply(X)
    values = fn.objective(fn.to_native(X))
    return float(values[0]) if single else values


def distort(fn: TestFunction, seed: int | Distortion) -> TestFunction:
    """Compose ``fn`` with a seeded random distortion; the optimum value is kept and its location remapped."""
    dist = seed if isinstance(seed, Distortion) else Distortion.random(fn.dim, seed)
    opt = fn.known_optimum
    if opt is not None:
        opt = (dist.inverse(opt[0]), opt[1])
    return replace(fn, known_optimum=opt, distortions=fn.distortions + (dist,))


# minimization forms in native coordinates, rows are points


def _ackley(x):
    d = x.shape[1]
    a = -20.0 * np.exp(-0.2 * np.sqrt((x * x).sum(1) / d))
    b = -np.exp(np.cos(2 * np.pi * x).sum(1) / d)
    return a + b + 20.0 + math.e


def _dixonprice(x):
    i = np.arange(2, x.shape[1] + 1)
    return (x[:, 0] - 1.0) ** 2 + (i * (2.0 * x[:, 1:] ** 2 - x[:, :-1]) ** 2).sum(1)


def _griewank(x):
    i = np.arange(1, x.shape[1] + 1)
    return 1.0 + (x * x).sum(1) / 4000.0 - np.prod(np.cos(x / np.sqrt(i)), axis=1)


def _levy(x):
    w = 1.0 + (x - 1.0) / 4.0
    head = np.sin(np.pi * w[:, 0]) ** 2
    mid = ((w[:, :-1] - 1.0) ** 2 * (1.0 + 10.0 * np.sin(np.pi * w[:, :-1] + 1.0) ** 2)).sum(1)
    tail = (w[:, -1] - 1.0) ** 2 * (1.0 + np.sin(2 * np.pi * w[:, -1]) ** 2)
    return head + mid + tail


def _michalewicz(x, m: int = 10):
    i = np.arange(1, x.shape[1] + 1)
    return -(np.sin(x) * np.sin(i * x * x / np.pi) ** (2 * m)).sum(1)


def _rastrigin(x):
    return 10.0 * x.shape[1] + (x * x - 10.0 * np.cos(2 * np.pi * x)).sum(1)


def _rosenbrock(x):
    if x.shape[1] == 1:
        return (x[:, 0] - 1.0) ** 2
    return (100.0 * (x[:, 1:] - x[:, :-1] ** 2) ** 2 + (x[:, :-1] - 1.0) ** 2).sum(1)


def _sphere(x):
    return ((x - SPHERE_CENTER) ** 2).sum(1)


def _stybtang(x):
    return 0.5 * (x**4 - 16.0 * x * x + 5.0 * x).sum(1)


# name -> (minimization form, native (lo, hi), native minimizer coordinate or None)
_REGISTRY: dict[str, tuple[Callable, tuple[float, float], float | None]] = {
    "ackley": (_ackley, (-32.768, 32.768), 0.0),
    "dixonprice": (_dixonprice, (-10.0, 10.0), None),
    "griewank": (_griewank, (-600.0, 600.0), 0.0),
    "levy": (_levy, (-10.0, 10.0), 1.0),
    "michalewicz": (_michalewicz, (0.0, math.pi), None),
    "rastrigin": (_rastrigin, (-5.12, 5.12), 0.0),
    "rosenbrock": (_rosenbrock, (-5.0, 10.0), 1.0),
    "sphere": (_sphere, (0.0, 1.0), SPHERE_CENTER),
    "stybtang": (_stybtang, (-5.0, 5.0), None),
}

FUNCTION_NAMES = tuple(_REGISTRY)


def get_function(name: str, d: int) -> TestFunction:
    """Look a benchmark up by name, e.g. ``get_function("ackley", 10)``."""
    try:
        form, (lo, hi), xmin = _REGISTRY[name]
    except KeyError:
        raise UnknownFunctionError(f"unknown test function {name!r}; known: {', '.join(FUNCTION_NAMES)}") from None
    d = check_dim(d)
    opt = None
    if xmin is not None:
        loc = np.full(d, (xmin - lo) / (hi - lo))
        opt = (loc, 0.0)
    return TestFunction(name, d, np.tile([lo, hi], (d, 1)).astype(float), lambda x, f=form: -f(x), opt)
