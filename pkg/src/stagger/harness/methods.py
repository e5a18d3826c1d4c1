"""Method names used by the harness and how each one generates a round of arms.

Names: ``random``, ``sobol``, ``sts`` and its ablations (``sts-ui``,
``sts-m``, ``sts-t``, ``sts-ns``), ``ts`` or ``ts-<candidates>``, ``pss``,
``ei``, ``ucb``, ``sr``, ``mtv`` (p* from PSS) and ``mtv+sts``.  STS-family
names accept an ``:M=<int>`` suffix overriding the walk length, e.g.
``sts:M=3``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

import numpy as np

from ..acquisitions import AcqSpec, propose_arm
from ..domain import sobol_points, uniform_points
from ..gp import GpModel
from ..mtv import MtvConfig, design_batch
from ..samplers import STS_VARIANTS, PssConfig, StsConfig, TsConfig, pss_samples, sts_samples, ts_samples


class UnknownMethodError(ValueError):
    pass


@dataclass(frozen=True)
class MethodSpec:
    name: str
    kind: str
    sts: StsConfig = field(default_factory=StsConfig)
    ts: TsConfig = field(default_factory=TsConfig)
    pss: PssConfig = field(default_factory=PssConfig)
    acq: AcqSpec | None = None
    pstar_sampler: str = "sts"


_SUFFIX = re.compile(r"^(?P<base>[a-z0-9+\-]+?)(?::M=(?P<M>\d+))?$")


def resolve_method(name: str) -> MethodSpec:
    m = _SUFFIX.match(name.strip())
    if not m:
        raise UnknownMethodError(f"cannot parse method name {name!r}")
    base, M = m.group("base"), m.group("M")
    if M is not None and base not in STS_VARIANTS:
        raise UnknownMethodError(f"':M=' only applies to sts variants, got {name!r}")
    if base in STS_VARIANTS:
        cfg = STS_VARIANTS[base]
        if M is not None:
            cfg = replace(cfg, M=int(M))
        return MethodSpec(name, "sts", sts=cfg)
    if base == "ts":
        return MethodSpec(name, "ts")
    tm = re.fullmatch(r"ts-(\d+)", base)
    if tm:
        return MethodSpec(name, "ts", ts=TsConfig(num_candidates=int(tm.group(1))))
    if base == "pss":
        return MethodSpec(name, "pss")
    if base in ("ei", "ucb", "sr"):
        return MethodSpec(name, "acq", acq=AcqSpec(base))
    if base in ("random", "sobol"):
        return MethodSpec(name, base)
    if base == "mtv":
        return MethodSpec(name, "mtv", pstar_sampler="pss")
    if base == "mtv+sts":
        return MethodSpec(name, "mtv", pstar_sampler="sts")
    raise UnknownMethodError(f"unknown method {name!r}")


class ArmGenerator:
    """Per-trace state for one method: holds the Sobol' sequence where one is needed."""

    def __init__(self, spec: MethodSpec, d: int, num_arms: int, num_rounds: int, rng: np.random.Generator):
        self.spec = spec
        self.d = d
        self.q = num_arms
        self.rng = rng
        self._sobol = None
        if spec.kind == "sobol":
            self._sobol = sobol_points(num_arms * num_rounds, d, rng)
        elif spec.kind == "acq":
            self._sobol = sobol_points(num_arms, d, rng)

    def __call__(self, model: GpModel, round_index: int) -> np.ndarray:
        spec, d, q, rng = self.spec, self.d, self.q, self.rng
        if spec.kind == "random":
            return uniform_points(rng, q, d)
        if spec.kind == "sobol":
            return self._sobol[round_index * q:(round_index + 1) * q]
        if spec.kind == "sts":
            return sts_samples(model, d, spec.sts, rng, n=q)
        if spec.kind == "ts":
            return ts_samples(model, d, spec.ts, rng, n=q, shared_candidates=False)
        if spec.kind == "pss":
            return pss_samples(model, d, spec.pss, rng, n=q)
        if spec.kind == "mtv":
            cfg = MtvConfig(num_arms=q, pstar_sampler=spec.pstar_sampler)
            return design_batch(model, d, cfg, rng).arms
        if spec.kind == "acq":
            if model.n == 0:
                return self._sobol.copy()
            return _greedy_batch(spec.acq, model, d, q, round_index, rng)
        raise UnknownMethodError(spec.kind)


def _greedy_batch(acq: AcqSpec, model: GpModel, d: int, q: int, round_index: int,
                  rng: np.random.Generator) -> np.ndarray:
    # sequential greedy: condition on the posterior mean at each chosen arm
    arms = []
    fantasy = model
    for _ in range(q):
        x = propose_arm(acq, fantasy, d, round_index, rng)
        arms.append(x)
        if len(arms) < q:
            fantasy = fantasy.condition_on(x[None, :], fantasy.mean(x[None, :]))
    return np.array(arms)
