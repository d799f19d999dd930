"""Solver output record and RNG plumbing shared by the solvers."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .csp import Instance, max_degree, mu, sqrt_degree_yardstick


def as_rng(rng) -> np.random.Generator:
    """Accept a Generator, an integer seed or None."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass
class SolveReport:
    """
    Summary of one solver run.

    ``value`` is the satisfied fraction and ``advantage`` its excess over ``mu``,
    the expected fraction under a uniformly random assignment.
    """

    alg: str
    seed: int | None
    n: int
    m: int
    D: int
    mu: float
    satisfied: int
    value: float
    advantage: float
    trials: int = 0
    reps: int = 0
    millis: float = 0.0
    yardstick: float = 0.0  # sum_i sqrt(deg i) / m
    extra: dict = field(default_factory=dict)

    @classmethod
    def build(cls, alg, inst: Instance, x, satisfied: int, *, seed=None, millis=0.0,
              trials=0, reps=0, extra=None) -> "SolveReport":
        base = mu(inst)
        value = Fraction(satisfied, inst.m)
        return cls(
            alg=alg, seed=None if seed is None else int(seed), n=inst.n, m=inst.m,
            D=max_degree(inst), mu=float(base), satisfied=int(satisfied), value=float(value),
            advantage=float(value - base), trials=int(trials), reps=int(reps), millis=float(millis),
            yardstick=sqrt_degree_yardstick(inst), extra=dict(extra or {}),
        )

    def to_dict(self, timing: bool = True) -> dict:
        d = asdict(self)
        if not timing:
            d.pop("millis")
        return _jsonable(d)

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, Fraction)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj
