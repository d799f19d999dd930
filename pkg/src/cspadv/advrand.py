"""
AdvRand: find x with ``|g(x)| >= t`` for a normalized low-degree polynomial g,
and the resulting Max-kXOR solver.

One repetition picks a Fourier scale s, keeps each coordinate alive with
probability ``2^-s`` and fixes the rest at random, sets the live coordinates
to the signs of the surviving linear coefficients, then re-randomizes them
with a noise rate drawn from the Chebyshev extrema. Repetitions continue
until the post-check ``|g(x)| >= t`` passes or the budget runs out.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import calibration
from .csp import Instance, associated_polynomial, max_degree
from .fourier import (
    ZERO_TOL,
    MultilinearPoly,
    PartialAssignment,
    evaluate,
    evaluate_at_biases,
    level_mass,
    restrict,
    variance,
)
from .report import SolveReport, as_rng

log = logging.getLogger(__name__)

C_INFLUENCE = 100.0
K_MAX = 8


def default_reps(k: int) -> int:
    return math.ceil(64 * math.exp(2 * k))


def effective_degree(k: int) -> int:
    """Even degrees are treated as the next odd degree."""
    return k if k % 2 else k + 1


@dataclass
class AdvRandParams:
    t: float
    k: int
    max_reps: int | None = None
    C: float = C_INFLUENCE

    def __post_init__(self):
        if self.t < 1:
            raise ValueError("t must be at least 1 for a variance-1 polynomial")
        if self.k < 2:
            raise ValueError("AdvRand needs k >= 2; degree-1 inputs are solved by greedy signs")

    @property
    def reps(self) -> int:
        return self.max_reps if self.max_reps is not None else default_reps(self.k)

    @property
    def influence_bound(self) -> float:
        return self.C ** (-self.k) * self.t ** (-2)


def max_influence(g: MultilinearPoly) -> float:
    inf = np.zeros(g.n)
    for idx, coef in g.compiled():
        if idx.shape[1]:
            np.add.at(inf, idx.ravel(), np.repeat(coef ** 2, idx.shape[1]))
    return float(inf.max()) if g.n else 0.0


def influence_limited_t(g: MultilinearPoly, k: int, C: float = C_INFLUENCE) -> float:
    """Largest t with ``max_i Inf_i[g] <= C^-k t^-2``."""
    mi = max_influence(g)
    return math.inf if mi == 0 else C ** (-k / 2) / math.sqrt(mi)


def normalize(p: MultilinearPoly) -> tuple[MultilinearPoly, float]:
    """Drop the constant term and rescale to variance 1; returns ``(g, stddev)``."""
    var = float(variance(p))
    if var <= ZERO_TOL:
        raise ValueError("polynomial has zero variance")
    sd = math.sqrt(var)
    if abs(sd - 1.0) <= 1e-12 and p.coefficient(()) == 0:
        return p, 1.0
    return MultilinearPoly(p.n, {k: float(c) / sd for k, c in p.terms.items() if k}), sd


def _bands(k: int) -> list[tuple[int, int]]:
    L = max(1, math.ceil(math.log2(k)))
    return [(1 if s == 1 else 2 ** (s - 1) + 1, 2 ** s) for s in range(1, L + 1)]


def choose_scale(g: MultilinearPoly, k: int) -> int:
    """
    Smallest band ``s`` whose Fourier mass reaches ``1 / (ceil(log2 k) + 1)``.

    Band s covers levels ``(2^(s-1), 2^s]``, and band 1 also covers level 1.
    Falls back to the heaviest band if none qualifies.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    bands = _bands(k)
    threshold = 1 / (len(bands) + 1)
    masses = [float(level_mass(g, lo, hi)) for lo, hi in bands]
    for s, mass in enumerate(masses, 1):
        if mass >= threshold:
            return s
    return int(np.argmax(masses)) + 1


class Restriction(NamedTuple):
    U: np.ndarray  # sorted indices left free
    y: PartialAssignment  # values on the complement of U
    g_y: MultilinearPoly


def _draw_restriction(n: int, s: int, rng) -> tuple[np.ndarray, np.ndarray]:
    in_U = rng.random(n) < 2.0 ** (-s)
    y = rng.choice(np.array([-1, 1], dtype=np.int8), size=n)
    return in_U, y


def random_restriction(g: MultilinearPoly, s: int, rng) -> Restriction:
    if s < 1:
        raise ValueError("s must be at least 1")
    in_U, y = _draw_restriction(g.n, s, as_rng(rng))
    pa = PartialAssignment.from_mask(~in_U, y)
    return Restriction(np.flatnonzero(in_U), pa, restrict(g, pa))


def greedy_signs(g_y: MultilinearPoly, U) -> np.ndarray:
    """
    Length-n vector with ``sgn(g_y({j}))`` on U (``sgn(0) = +1``) and +1 elsewhere.
    """
    x = np.ones(g_y.n, dtype=np.int8)
    for j in np.asarray(U, dtype=np.int64):
        if g_y.coefficient((int(j),)) < 0:
            x[j] = -1
    return x


def linear_mass(g_y: MultilinearPoly, U) -> float:
    """``sum_{j in U} |g_y({j})|``."""
    return float(sum(abs(g_y.coefficient((int(j),))) for j in U))


def chebyshev_extrema(k: int) -> np.ndarray:
    """``cos(j pi / k)`` for ``j = 0..k``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return np.cos(np.arange(k + 1) * np.pi / k)


def noise_flip(x_star, eta: float, rng) -> np.ndarray:
    """Negate each coordinate independently with probability ``(1 - eta) / 2``."""
    if abs(eta) > 1:
        raise ValueError("|eta| must be at most 1")
    x_star = np.asarray(x_star, dtype=np.int8)
    flips = as_rng(rng).random(x_star.shape[0]) < (1 - eta) / 2
    return np.where(flips, -x_star, x_star).astype(np.int8)


def chebyshev_profile(g_y: MultilinearPoly, x_star, k: int) -> np.ndarray:
    """``(T_eta g_y)(x*)`` at each halved extremum ``eta = eta_j / 2``."""
    x_star = np.asarray(x_star, dtype=np.float64)
    return np.array([evaluate_at_biases(g_y, e / 2 * x_star) for e in chebyshev_extrema(k)])


@dataclass
class RepOutcome:
    x: np.ndarray
    value: float  # g(x)
    s: int
    r: int
    eta: float
    linear_mass: float


def adv_rand_rep(g: MultilinearPoly, k: int, rng) -> RepOutcome:
    """
    One repetition written with the generic polynomial operations.

    Consumes randomness in the same order as the vectorized engine used by
    :func:`adv_rand`, so both give the same outcome for the same generator state.
    """
    rng = as_rng(rng)
    k_eff = effective_degree(k)
    s = choose_scale(g, k_eff)
    U, y, g_y = random_restriction(g, s, rng)
    x_star = greedy_signs(g_y, U)
    r = int(rng.integers(k_eff + 1))
    eta = float(np.cos(r * np.pi / k_eff) / 2)
    flipped = noise_flip(x_star, eta, rng)
    x = y.merge(flipped, g.n)
    return RepOutcome(x, evaluate(g, x), s, r, eta, linear_mass(g_y, U))


class _Engine:
    """Vectorized repetitions for a fixed polynomial."""

    def __init__(self, g: MultilinearPoly, k: int):
        self.g = g
        self.n = g.n
        self.k_eff = effective_degree(k)
        self.s = choose_scale(g, self.k_eff)
        self.groups = [(idx, coef) for idx, coef in g.compiled() if idx.shape[1]]
        self.const = g.coefficient(())

    def value(self, x) -> float:
        xf = np.asarray(x, dtype=np.float64)
        return float(self.const) + sum(float(coef @ np.prod(xf[idx], axis=1)) for idx, coef in self.groups)

    def rep(self, rng) -> RepOutcome:
        n = self.n
        in_U, y = _draw_restriction(n, self.s, rng)
        singles = np.zeros(n)
        yf = y.astype(np.float64)
        for idx, coef in self.groups:
            live = in_U[idx]
            sel = live.sum(axis=1) == 1
            if not sel.any():
                continue
            sub = idx[sel]
            j = sub[np.arange(sub.shape[0]), np.argmax(live[sel], axis=1)]
            np.add.at(singles, j, coef[sel] * np.prod(yf[sub], axis=1) * yf[j])
        singles[np.abs(singles) <= ZERO_TOL] = 0.0
        x_star = np.where(in_U & (singles < 0), -1, 1).astype(np.int8)
        r = int(rng.integers(self.k_eff + 1))
        eta = float(np.cos(r * np.pi / self.k_eff) / 2)
        flipped = noise_flip(x_star, eta, rng)
        x = np.where(in_U, flipped, y).astype(np.int8)
        return RepOutcome(x, self.value(x), self.s, r, eta, float(np.abs(singles[in_U]).sum()))


@dataclass
class AdvRandResult:
    x: np.ndarray
    value: float
    reps: int
    outcome: RepOutcome


class AdvRandFailure(RuntimeError):
    def __init__(self, best: RepOutcome, reps: int, t: float):
        super().__init__(f"|g(x)| < {t:.4g} in all {reps} repetitions (best {abs(best.value):.4g})")
        self.best = best
        self.reps = reps
        self.t = t


def adv_rand(g: MultilinearPoly, params: AdvRandParams, rng=None) -> AdvRandResult:
    """
    Repeat AdvRand until ``|g(x)| >= params.t``.

    ``g`` should have variance 1 and degree at most ``params.k``. Raises
    :class:`AdvRandFailure` with the best repetition once the budget is spent.
    """
    rng = as_rng(rng)
    engine = _Engine(g, params.k)
    best = None
    for rep in range(1, params.reps + 1):
        out = engine.rep(rng)
        if abs(out.value) >= params.t:
            return AdvRandResult(out.x, out.value, rep, out)
        if best is None or abs(out.value) > abs(best.value):
            best = out
    raise AdvRandFailure(best, params.reps, params.t)


def rep_values(g: MultilinearPoly, k: int, reps: int, rng=None) -> np.ndarray:
    """``|g(x)|`` for ``reps`` independent repetitions (used for calibration)."""
    rng = as_rng(rng)
    engine = _Engine(g, k)
    return np.array([abs(engine.rep(rng).value) for _ in range(reps)])


@dataclass
class KxorParams:
    t_scale: float | None = None  # c_k in t = c_k sqrt(m / D)
    reps: int | None = None
    C: float = C_INFLUENCE
    extra: dict = field(default_factory=dict)


def solve_kxor(inst: Instance, rng=None, params: KxorParams | None = None):
    """
    Max-kXOR through AdvRand on the normalized associated polynomial.

    The target is ``t = max(1, c_k sqrt(m / D))``. For odd k the better of x
    and -x is returned; for even k negation is useless, and the report
    records on which side of 1/2 the value fell. Returns ``(x, SolveReport)``.
    """
    params = params or KxorParams()
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = as_rng(rng)
    t0 = time.perf_counter()
    k = inst.kxor_arity
    if k is None:
        raise ValueError("instance is not kXOR")
    if not 1 <= k <= K_MAX:
        raise ValueError(f"arity {k} outside [1, {K_MAX}]")
    m = inst.m
    D = max(1, max_degree(inst))
    p = associated_polynomial(inst)
    extra: dict = {"k": k}

    if k == 1:
        x = np.where(np.array([float(p.coefficient((i,))) for i in range(inst.n)]) < 0, -1, 1).astype(np.int8)
        reps = 0
        extra["bypass"] = "greedy signs on the linear form"
    else:
        g, scale = normalize(p)
        c_k = params.t_scale if params.t_scale is not None else calibration.advrand_scale(k)
        t = max(1.0, c_k * math.sqrt(m / D))
        t_infl = influence_limited_t(g, k, params.C)
        notes = []
        if t > t_infl >= 1:
            notes.append(f"t lowered from {t:.4g} to {t_infl:.4g} to meet the influence bound")
            t = t_infl
        extra.update(t=t, t_scale=c_k, t_influence=t_infl, precondition_met=t <= t_infl, notes=notes)
        ap = AdvRandParams(t=t, k=k, max_reps=params.reps, C=params.C)
        try:
            res = adv_rand(g, ap, rng)
            x, gval, reps = res.x, res.value, res.reps
            extra["success"] = True
        except AdvRandFailure as exc:
            x, gval, reps = exc.best.x, exc.best.value, exc.reps
            extra["success"] = False
        extra["g_value"] = gval
        extra["scale"] = scale

    count = inst.satisfied_count(x)
    if k % 2 == 1:
        if m - count > count:
            x, count = (-x).astype(np.int8), m - count
    else:
        extra["side"] = 1 if 2 * count >= m else -1
    millis = (time.perf_counter() - t0) * 1000
    report = SolveReport.build("advrand", inst, x, count, seed=seed, millis=millis, reps=reps, extra=extra)
    return x, report
