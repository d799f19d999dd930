"""
Exhaustive ground truth for small instances.

Assignments are enumerated as a dense low block of up to 2^16 rows times a
Gray-code walk over the remaining high variables; each Gray step only
re-evaluates the constraints touching the flipped variable.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Sequence

import numpy as np

from .csp import Instance, incidence
from .fourier import hypercube

MAX_BRUTE_N = 26
MAX_DISTRIBUTION_N = 22
MAX_RANDOM_BITS = 24
LOW_BLOCK = 16


class TooLarge(ValueError):
    pass


def _walk(inst: Instance):
    """
    Yield ``(high_bits, counts)`` for every setting of the high block.

    ``counts[b]`` is the satisfied count with the low block at row ``b`` of
    :func:`cspadv.fourier.hypercube` and the high variables at ``high_bits``
    (bit h set means variable ``low + h`` is +1).
    """
    n = inst.n
    low = min(n, LOW_BLOCK)
    high = n - low
    low_bits = ((np.arange(1 << low)[:, None] >> np.arange(low)) & 1).astype(np.int64)
    inc = incidence(inst)

    low_rows = []
    tables = []
    high_parts = []  # per constraint: list of (position, high index)
    for pred, scope in inst:
        row = np.zeros(1 << low, dtype=np.int64)
        hp = []
        for t, v in enumerate(scope):
            if v < low:
                row |= low_bits[:, v] << t
            else:
                hp.append((t, v - low))
        low_rows.append(row)
        tables.append(np.array(pred.table, dtype=np.int64))
        high_parts.append(hp)

    hbits = [0] * high

    def sat(ell):
        offset = sum(hbits[h] << t for t, h in high_parts[ell])
        return tables[ell][low_rows[ell] + offset]

    current = [sat(ell) for ell in range(inst.m)]
    counts = np.sum(current, axis=0) if current else np.zeros(1 << low, dtype=np.int64)
    state = 0
    yield state, counts
    for g in range(1, 1 << high):
        h = (g & -g).bit_length() - 1
        hbits[h] ^= 1
        state ^= 1 << h
        for ell in inc[low + h]:
            new = sat(ell)
            counts = counts - current[ell] + new
            current[ell] = new
        yield state, counts


def _assignment(inst: Instance, high_state: int, low_row: int) -> np.ndarray:
    low = min(inst.n, LOW_BLOCK)
    x = np.empty(inst.n, dtype=np.int8)
    x[:low] = [1 if low_row >> t & 1 else -1 for t in range(low)]
    x[low:] = [1 if high_state >> h & 1 else -1 for h in range(inst.n - low)]
    return x


def brute_force_opt(inst: Instance) -> tuple[Fraction, np.ndarray]:
    """Maximum satisfied fraction over all 2^n assignments, with a maximiser."""
    if inst.n > MAX_BRUTE_N:
        raise TooLarge(f"n={inst.n} exceeds {MAX_BRUTE_N}")
    if inst.m == 0:
        raise ValueError("instance has no constraints")
    best, best_at = -1, (0, 0)
    for state, counts in _walk(inst):
        b = int(np.argmax(counts))
        if counts[b] > best:
            best, best_at = int(counts[b]), (state, b)
    return Fraction(best, inst.m), _assignment(inst, *best_at)


def value_distribution(inst: Instance) -> np.ndarray:
    """``hist[c]`` = number of assignments satisfying exactly ``c`` constraints."""
    if inst.n > MAX_DISTRIBUTION_N:
        raise TooLarge(f"n={inst.n} exceeds {MAX_DISTRIBUTION_N}")
    hist = np.zeros(inst.m + 1, dtype=np.int64)
    for _, counts in _walk(inst):
        hist += np.bincount(counts, minlength=inst.m + 1)
    return hist


def max_deviation(inst: Instance) -> Fraction:
    """``max_x |val(x) - 1/2|`` over all assignments."""
    hist = value_distribution(inst)
    present = np.flatnonzero(hist)
    return max(abs(Fraction(int(c), inst.m) - Fraction(1, 2)) for c in present)


@dataclass
class Procedure:
    """
    A randomised procedure driven by ``width`` independent coins.

    ``run(inst, coins)`` receives a tuple of +-1 coins and returns a number;
    coin ``i`` is +1 with probability ``(1 + biases[i]) / 2`` (fair by default).
    Randomness that is not enumerable, such as ties broken with an irrational
    probability, should be folded into ``run``'s return value analytically.
    """

    width: int
    run: Callable[[Instance, tuple], object]
    biases: Sequence | None = None


@dataclass
class Mixture:
    """Run ``branches[i][1]`` with probability ``branches[i][0]``."""

    branches: list = field(default_factory=list)


def exhaustive_expectation(procedure, inst: Instance):
    """
    Exact average of a :class:`Procedure` (or :class:`Mixture`) over all coin outcomes.

    Returns a Fraction when every weight and output is rational, else a float.
    """
    if isinstance(procedure, Mixture):
        return sum((w * exhaustive_expectation(p, inst) for w, p in procedure.branches), 0)
    if procedure.width > MAX_RANDOM_BITS:
        raise TooLarge(f"{procedure.width} random bits exceed {MAX_RANDOM_BITS}")
    biases = procedure.biases
    if biases is None:
        total = sum((procedure.run(inst, coins) for coins in product((-1, 1), repeat=procedure.width)), 0)
        if isinstance(total, (int, Fraction)):
            return Fraction(total, 1 << procedure.width)
        return total / (1 << procedure.width)
    if len(biases) != procedure.width:
        raise ValueError("one bias per coin required")
    exact = all(isinstance(b, (int, Fraction)) for b in biases)
    half = Fraction(1, 2) if exact else 0.5
    total = 0
    for coins in product((-1, 1), repeat=procedure.width):
        w = 1
        for c, b in zip(coins, biases):
            w = w * (half + half * b if c > 0 else half - half * b)
        if w:
            total = total + w * procedure.run(inst, coins)
    return total


def all_assignments(n: int) -> np.ndarray:
    """Every point of {-1,+1}^n as a row (n <= 20)."""
    return hypercube(n)
