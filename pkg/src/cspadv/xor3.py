"""
Max-3XOR by decoupling.

The associated cubic ``sum_{ijk} a_ijk x_i x_j x_k`` is replaced by the
bilinear-in-y form ``sum_i y_i G_i(z)`` with ``G_i(z) = sum_{jk} a_ijk z_j z_k``.
A random ``z`` makes ``sum_i |G_i(z)|`` large, ``y = sgn(G(z))`` collects it,
and a three-scheme randomized rounding recovers a third of it in expectation.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from . import calibration
from .csp import Instance, associated_polynomial, degrees, max_degree
from .fourier import MultilinearPoly, evaluate_at_biases
from .report import SolveReport, as_rng

log = logging.getLogger(__name__)

ROUNDING_WEIGHTS = (4 / 9, 4 / 9, 1 / 9)


@dataclass(frozen=True, eq=False)
class DecoupledForm:
    """
    Decoupled cubic form of a 3XOR instance.

    ``scopes[l]`` is a sorted triple and ``coefs[l]`` the matching coefficient
    of the associated polynomial; ``a_ijk = coefs[l] / 6`` for every ordering
    of ``scopes[l]``.
    """

    n: int
    scopes: np.ndarray
    coefs: np.ndarray

    def a(self, i: int, j: int, k: int) -> float:
        if len({i, j, k}) < 3:
            return 0.0
        return self._amap.get(tuple(sorted((i, j, k))), 0.0)

    def coefficient_map(self) -> dict[tuple[int, int, int], float]:
        return self._amap

    @cached_property
    def _amap(self):
        return {tuple(int(v) for v in s): float(c) / 6 for s, c in zip(self.scopes, self.coefs)}

    @cached_property
    def _incidence(self):
        # G(z) = sum_t M_t @ (coef/3 * z_o1 * z_o2) over the three roles t
        m = len(self.coefs)
        mats = []
        for t in range(3):
            rows = self.scopes[:, t] if m else np.zeros(0, dtype=np.int64)
            mats.append(sp.csr_matrix((np.full(m, 1.0), (rows, np.arange(m))), shape=(self.n, m)))
        return mats

    def G(self, z) -> np.ndarray:
        """All ``G_i(z)`` at once; ``z`` may be a vector or an (N, n) batch."""
        z = np.asarray(z, dtype=np.float64)
        batch = z.ndim == 2
        Z = z if batch else z[None, :]
        c = self.coefs / 3.0
        out = np.zeros((Z.shape[0], self.n))
        for t, M in enumerate(self._incidence):
            o1, o2 = [self.scopes[:, u] for u in range(3) if u != t]
            out += (M @ (c[None, :] * Z[:, o1] * Z[:, o2]).T).T
        return out if batch else out[0]

    def G_poly(self, i: int) -> MultilinearPoly:
        terms = {}
        for s, c in zip(self.scopes, self.coefs):
            if i in s:
                j, k = [int(v) for v in s if v != i]
                terms[(j, k)] = terms.get((j, k), 0.0) + c / 3
        return MultilinearPoly(self.n, terms)

    def decoupled_value(self, y, z) -> float:
        """``sum_i y_i G_i(z)``."""
        return float(np.asarray(y, dtype=np.float64) @ self.G(z))


def decouple(inst: Instance) -> DecoupledForm:
    if inst.kxor_arity != 3:
        raise ValueError("decouple needs a 3XOR instance")
    P = associated_polynomial(inst)
    keys = [k for k in P.terms if len(k) == 3]
    scopes = np.array(keys, dtype=np.int64).reshape(len(keys), 3)
    coefs = np.array([float(P.terms[k]) for k in keys])
    return DecoupledForm(inst.n, scopes, coefs)


def cubic_poly(df: DecoupledForm) -> MultilinearPoly:
    """The cubic polynomial ``sum_{ijk} a_ijk x_i x_j x_k`` the form came from."""
    return MultilinearPoly(df.n, {tuple(s): c for s, c in zip(df.scopes.tolist(), df.coefs)})


def sgn(v) -> np.ndarray:
    """Sign with ``sgn(0) = +1``."""
    return np.where(np.asarray(v) >= 0, 1, -1).astype(np.int8)


@dataclass
class ZTrial:
    z: np.ndarray
    y: np.ndarray
    value: float  # sum_i |G_i(z)|
    trials: int


class TrialsExhausted(RuntimeError):
    def __init__(self, best: ZTrial, target: float):
        super().__init__(f"no z reached {target:.4g} in {best.trials} trials (best {best.value:.4g})")
        self.best = best
        self.target = target


def greedy_z_trials(df: DecoupledForm, target: float, max_trials: int, rng) -> ZTrial:
    """
    Draw uniform ``z`` until ``sum_i |G_i(z)| >= target``; return it with ``y = sgn(G(z))``.

    Raises :class:`TrialsExhausted` (carrying the best draw) after ``max_trials``.
    """
    if target <= 0:
        raise ValueError("target must be positive")
    rng = as_rng(rng)
    best = None
    for trial in range(1, max_trials + 1):
        z = rng.choice(np.array([-1, 1], dtype=np.int8), size=df.n)
        G = df.G(z)
        value = float(np.abs(G).sum())
        if best is None or value > best.value:
            best = ZTrial(z, sgn(G), value, trial)
        if value >= target:
            return ZTrial(z, sgn(G), value, trial)
    if best is None:
        best = ZTrial(np.ones(df.n, dtype=np.int8), np.ones(df.n, dtype=np.int8), 0.0, 0)
    best.trials = max_trials
    raise TrialsExhausted(best, target)


def rounding_biases(y, z) -> list[np.ndarray]:
    """Bias vectors of the three rounding schemes, in the order of ``ROUNDING_WEIGHTS``."""
    y = np.asarray(y, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    return [(y + z) / 2, (y - z) / 2, -y]


def expected_rounding_value(P: MultilinearPoly, y, z) -> float:
    """``E[P(x)]`` for ``x = round_to_x(y, z)``, computed exactly by multilinearity."""
    return sum(w * evaluate_at_biases(P, b) for w, b in zip(ROUNDING_WEIGHTS, rounding_biases(y, z)))


def round_to_x(y, z, rng) -> np.ndarray:
    """
    Randomized rounding of a decoupled pair.

    With probability 4/9 each coordinate copies y or z; with probability 4/9
    it copies y or -z; with probability 1/9 the output is -y.
    """
    rng = as_rng(rng)
    y = np.asarray(y, dtype=np.int8)
    z = np.asarray(z, dtype=np.int8)
    scheme = rng.choice(3, p=ROUNDING_WEIGHTS)
    if scheme == 2:
        return -y
    other = z if scheme == 0 else -z
    pick = rng.random(y.shape[0]) < 0.5
    return np.where(pick, y, other).astype(np.int8)


@dataclass
class Xor3Params:
    trials: int | None = None  # z-trial budget per target
    draws: int | None = None  # rounding draws
    target_scale: float | None = None  # c0 in target = sum sqrt(deg) / (c0 m)
    max_halvings: int = 8


def default_trials(n: int, D: int) -> int:
    return math.ceil(64 * math.sqrt(D) * math.log(n + 1))


def solve_3xor(inst: Instance, rng=None, params: Xor3Params | None = None):
    """
    Decouple, search ``z``, set ``y`` greedily, then keep the best of many roundings.

    Every rounding is compared with its negation, so the returned value is at
    least 1/2. Returns ``(x, SolveReport)``.
    """
    params = params or Xor3Params()
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = as_rng(rng)
    t0 = time.perf_counter()
    df = decouple(inst)
    D = max(1, max_degree(inst))
    m = inst.m
    c0 = params.target_scale or calibration.get("xor3_target_scale")
    target = float(np.sqrt(degrees(inst)).sum()) / (c0 * m)
    budget = params.trials or default_trials(inst.n, D)
    notes = []
    trials_used = 0
    found = None
    for _ in range(params.max_halvings + 1):
        try:
            found = greedy_z_trials(df, target, budget, rng)
            trials_used += found.trials
            break
        except TrialsExhausted as exc:
            trials_used += budget
            found = exc.best
            notes.append(f"target {target:.4g} missed; halved")
            target /= 2
    flags = {"z_target_met": found.value >= target}

    draws = params.draws or 8 * math.ceil(math.sqrt(D))
    best_x, best_count = None, -1
    for _ in range(draws):
        x = round_to_x(found.y, found.z, rng)
        c = inst.satisfied_count(x)
        if m - c > c:
            x, c = -x, m - c
        if c > best_count:
            best_x, best_count = x, c
    millis = (time.perf_counter() - t0) * 1000
    report = SolveReport.build(
        "xor3", inst, best_x, best_count, seed=seed, millis=millis,
        trials=trials_used, reps=draws,
        extra={"target": target, "sum_abs_G": found.value, "decoupled_value": df.decoupled_value(found.y, found.z),
               "notes": notes, **flags},
    )
    return best_x, report


# --------------------------------------------------------------------------
# 4-wise independent sample space

# irreducible polynomials over GF(2), including the x^q term
_IRREDUCIBLE = {
    1: 0b11, 2: 0b111, 3: 0b1011, 4: 0b10011, 5: 0b100101, 6: 0b1000011,
    7: 0b10001001, 8: 0b100011101, 9: 0b1000010001, 10: 0b10000001001,
    11: 0b100000000101, 12: 0b1000001010011, 13: 0b10000000011011,
    14: 0b100010001000011, 15: 0b1000000000000011, 16: 0b10001000000001011,
}


def gf_mul(a: int, b: int, q: int) -> int:
    poly = _IRREDUCIBLE[q]
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> q:
            a ^= poly
    return out


@dataclass(frozen=True)
class FourWiseSpace:
    """
    Uniform distribution over ``2**rows`` strings in {-1,+1}^n whose bits are 4-wise independent.

    Sample ``u`` has coordinate ``i`` equal to ``(-1)^popcount(u & columns[i])``.
    Any four columns are linearly independent over GF(2), so every product of
    one to four distinct coordinates averages to zero over the space.
    """

    n: int
    rows: int
    columns: tuple[int, ...]
    construction: str = field(default="")

    @property
    def size(self) -> int:
        return 1 << self.rows

    def block(self, start: int, stop: int) -> np.ndarray:
        u = np.arange(start, min(stop, self.size), dtype=np.uint64)
        cols = np.array(self.columns, dtype=np.uint64)
        parity = np.bitwise_count(u[:, None] & cols[None, :]) & 1
        return (1 - 2 * parity.astype(np.int8)).astype(np.int8)

    def matrix(self) -> np.ndarray:
        return self.block(0, self.size)

    def __iter__(self):
        step = 1 << 12
        for start in range(0, self.size, step):
            yield from self.block(start, start + step)

    def __len__(self):
        return self.size


def fourwise_space(n: int) -> FourWiseSpace:
    """
    Smallest of three constructions of a 4-wise independent space on n bits.

    - ``cube``: all 2^n strings.
    - ``bch``: columns ``(p, p^3)`` over GF(2^q) for distinct nonzero p (needs 2^q > n).
    - ``bch-ext``: columns ``(1, p, p^3)`` for distinct p including 0 (needs 2^q >= n).
    """
    if n < 1:
        raise ValueError("n must be positive")
    options = [(n, "cube", None)]
    q = max(1, math.ceil(math.log2(n + 1)))
    if q in _IRREDUCIBLE:
        options.append((2 * q, "bch", q))
    q2 = max(1, math.ceil(math.log2(n)))
    if q2 in _IRREDUCIBLE:
        options.append((2 * q2 + 1, "bch-ext", q2))
    rows, name, q = min(options, key=lambda o: o[0])
    if rows > 40:
        raise ValueError(f"no 4-wise space construction for n={n} (field tables stop at 2^16)")
    if name == "cube":
        cols = tuple(1 << i for i in range(n))
    elif name == "bch":
        cols = tuple(p | gf_mul(p, gf_mul(p, p, q), q) << q for p in range(1, n + 1))
    else:
        cols = tuple(1 | p << 1 | gf_mul(p, gf_mul(p, p, q), q) << (q + 1) for p in range(n))
    return FourWiseSpace(n, rows, cols, name)


def fix_by_conditional_expectation(P: MultilinearPoly, biases) -> np.ndarray:
    """
    Round independent biased bits to a point with ``P(x) >= E[P]``.

    Coordinates are fixed in index order, each to the sign of the partial
    derivative of the multilinear extension at the current bias vector
    (``+1`` on ties), which never decreases the expectation.
    """
    point = np.array(biases, dtype=np.float64)
    by_var: list[list[tuple[tuple[int, ...], float]]] = [[] for _ in range(P.n)]
    for key, c in P.terms.items():
        for v in key:
            by_var[v].append((key, float(c)))
    for i in range(P.n):
        if abs(point[i]) == 1.0:
            continue
        d = 0.0
        for key, c in by_var[i]:
            prod = c
            for v in key:
                if v != i:
                    prod *= point[v]
            d += prod
        point[i] = 1.0 if d >= 0 else -1.0
    return point.astype(np.int8)


def best_z_in_space(df: DecoupledForm, space: FourWiseSpace, chunk: int = 1 << 12) -> tuple[np.ndarray, float]:
    """The first sample maximising ``sum_i |G_i(z)|`` over the whole space."""
    best_val, best_z = -1.0, None
    for start in range(0, space.size, chunk):
        Z = space.block(start, start + chunk)
        vals = np.abs(df.G(Z)).sum(axis=1)
        b = int(np.argmax(vals))
        if vals[b] > best_val + 1e-15:
            best_val, best_z = float(vals[b]), Z[b].copy()
    return best_z, best_val


def solve_3xor_derandomized(inst: Instance):
    """
    Deterministic variant: exhaust a 4-wise independent space for ``z``,
    set ``y`` greedily, and derandomize each rounding scheme by conditional
    expectations; keep the best of the three results and their negations.
    """
    t0 = time.perf_counter()
    df = decouple(inst)
    P = cubic_poly(df)
    space = fourwise_space(inst.n)
    z, zval = best_z_in_space(df, space)
    y = sgn(df.G(z))
    m = inst.m
    best_x, best_count, scheme_values = None, -1, []
    for biases in rounding_biases(y, z):
        x = fix_by_conditional_expectation(P, biases)
        c = inst.satisfied_count(x)
        scheme_values.append(c / m)
        if m - c > c:
            x, c = -x, m - c
        if c > best_count:
            best_x, best_count = x, c
    millis = (time.perf_counter() - t0) * 1000
    report = SolveReport.build(
        "xor3-derand", inst, best_x, best_count, seed=None, millis=millis,
        trials=space.size, reps=3,
        extra={"space": space.construction, "space_size": space.size, "sum_abs_G": zval,
               "decoupled_value": df.decoupled_value(y, z), "scheme_values": scheme_values},
    )
    return best_x, report
