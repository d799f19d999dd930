"""Instance generators: random bounded-degree families and small adversarial examples."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .csp import Instance, Predicate, ae, and_, nae, nand, or_, xor

log = logging.getLogger(__name__)

ATTEMPTS_PER_CONSTRAINT = 50

DEFAULT_MIX = ("xor3", "nae3", "or2", "and2")

_NAMED = {
    "xor2": lambda: xor(2),
    "xor3": lambda: xor(3),
    "xor4": lambda: xor(4),
    "nae3": lambda: nae(3),
    "nae4": lambda: nae(4),
    "or2": lambda: or_(2),
    "or3": lambda: or_(3),
    "and2": lambda: and_(2),
    "and3": lambda: and_(3),
}


class InfeasibleSpec(ValueError):
    """Generator parameters admit no constraint at all."""


@dataclass(frozen=True)
class GenSpec:
    kind: str
    n: int = 0
    k: int = 3
    D: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.kind in ("kxor", "triangle_free"):
            if not (self.n >= self.k >= 2) or self.D < 1:
                raise ValueError("need n >= k >= 2 and D >= 1")


def generate(spec: GenSpec) -> Instance:
    if spec.kind == "kxor":
        return random_kxor(spec.n, spec.k, spec.D, spec.seed)
    if spec.kind == "triangle_free":
        mix = [name for name in DEFAULT_MIX if int(name[-1]) <= spec.k]
        return triangle_free_random(spec.n, mix, spec.D, spec.seed)
    if spec.kind == "complete_cut":
        return complete_graph_maxcut(spec.n)
    if spec.kind == "grid_2sat":
        return grid_2sat(spec.D)
    if spec.kind == "nae_ae":
        return nae_ae_gadget()
    if spec.kind == "random_sign_graph":
        return random_sign_complete_graph(spec.n, spec.seed)
    raise ValueError(f"unknown generator kind {spec.kind!r}")


class _OpenSet:
    """Variables that still have spare degree, with O(1) removal and uniform sampling."""

    def __init__(self, n: int):
        self.items = list(range(n))
        self.pos = list(range(n))

    def __len__(self):
        return len(self.items)

    def remove(self, v: int) -> None:
        i = self.pos[v]
        last = self.items[-1]
        self.items[i] = last
        self.pos[last] = i
        self.items.pop()
        self.pos[v] = -1

    def __contains__(self, v: int) -> bool:
        return self.pos[v] >= 0

    def candidates(self, rng, r: int, size: int):
        """
        ``size`` uniform r-tuples of distinct open variables, drawn from the current set.

        Callers must re-check membership before use; conditioned on all of its
        variables still being open, a stale candidate is uniform over the
        tuples of the shrunken set.
        """
        items = list(self.items)
        idx = rng.integers(len(items), size=(size, r)).tolist()
        for row in idx:
            if len(set(row)) == r:
                yield [items[i] for i in row]


BATCH = 256


def random_kxor(n: int, k: int, D: int, seed: int) -> Instance:
    """
    Random kXOR instance with every variable in at most ``D`` constraints.

    Scopes are drawn uniformly from variables with spare degree, rejecting
    repeated scope sets; signs are uniform. Aims for ``floor(n*D/k)`` constraints
    and stops early when the rejection budget runs out.
    """
    if n < k or k < 1 or D < 1:
        raise InfeasibleSpec(f"cannot place a {k}-ary constraint on {n} variables with D={D}")
    rng = np.random.default_rng(seed)
    target = (n * D) // k
    if target < 1:
        raise InfeasibleSpec("n*D/k < 1")
    deg = np.zeros(n, dtype=np.int64)
    open_vars = _OpenSet(n)
    used: set[frozenset] = set()
    scopes = []
    attempts = 0
    budget = ATTEMPTS_PER_CONSTRAINT * target
    while len(scopes) < target and attempts < budget and len(open_vars) >= k:
        size = min(BATCH, budget - attempts)
        attempts += size
        for scope in open_vars.candidates(rng, k, size):
            if len(scopes) >= target or not all(v in open_vars for v in scope):
                continue
            key = frozenset(scope)
            if key in used:
                continue
            used.add(key)
            scopes.append(tuple(sorted(scope)))
            for v in scope:
                deg[v] += 1
                if deg[v] == D:
                    open_vars.remove(v)
    if not scopes:
        raise InfeasibleSpec("no constraint could be placed")
    if len(scopes) < target:
        log.info("random_kxor placed %d of %d constraints", len(scopes), target)
    signs = rng.choice(np.array([-1, 1]), size=len(scopes))
    return Instance.kxor(n, scopes, signs)


def triangle_free_random(n: int, k_mix, D: int, seed: int) -> Instance:
    """
    Greedy random packing of constraints that keeps the instance triangle-free.

    ``k_mix`` is a list of predicate names (see ``DEFAULT_MIX``) or an int k,
    meaning the default mix restricted to arity at most k. A candidate scope is
    accepted only if no two of its variables already share a constraint and no
    two of its variables have a common neighbour; this rules out both
    overlapping scopes and hyper-triangles.
    """
    if isinstance(k_mix, int):
        k_mix = [name for name in DEFAULT_MIX if int(name[-1]) <= k_mix]
    preds: list[Predicate] = [_NAMED[name]() for name in k_mix]
    if not preds:
        raise InfeasibleSpec("empty predicate mix")
    mean_arity = float(np.mean([p.arity for p in preds]))
    target = int(n * D / mean_arity)
    if target < 1 or n < min(p.arity for p in preds):
        raise InfeasibleSpec("n too small for the requested density")

    rng = np.random.default_rng(seed)
    nb: list[set[int]] = [set() for _ in range(n)]
    deg = np.zeros(n, dtype=np.int64)
    open_vars = _OpenSet(n)
    constraints = []
    attempts = 0
    budget = ATTEMPTS_PER_CONSTRAINT * target
    r_max = max(p.arity for p in preds)
    while len(constraints) < target and attempts < budget and len(open_vars) >= r_max:
        size = min(BATCH, budget - attempts)
        attempts += size
        choice = rng.integers(len(preds), size=size).tolist()
        items = list(open_vars.items)
        rows = rng.integers(len(items), size=(size, r_max)).tolist()
        for which, row in zip(choice, rows):
            pred = preds[which]
            r = pred.arity
            row = row[:r]
            if len(constraints) >= target or len(set(row)) != r:
                continue
            scope = [items[i] for i in row]
            if not all(v in open_vars for v in scope) or not _fits(scope, nb):
                continue
            constraints.append((pred, tuple(scope)))
            for u in scope:
                nb[u].update(w for w in scope if w != u)
                deg[u] += 1
                if deg[u] == D:
                    open_vars.remove(u)
    if not constraints:
        raise InfeasibleSpec("no constraint could be placed")
    if len(constraints) < target:
        log.info("triangle_free_random placed %d of %d constraints", len(constraints), target)
    return Instance(n, constraints)


def _fits(scope, nb) -> bool:
    for u, v in combinations(scope, 2):
        if v in nb[u] or not nb[u].isdisjoint(nb[v]):
            return False
    return True


def complete_graph_maxcut(n: int) -> Instance:
    """Max-Cut on K_n: a constraint ``x_i != x_j`` for every pair."""
    return Instance(n, [(xor(2, -1), (i, j)) for i, j in combinations(range(n), 2)])


def random_sign_complete_graph(n: int, seed: int) -> Instance:
    """2XOR on K_n with each edge independently ``x_i == x_j`` or ``x_i != x_j``."""
    rng = np.random.default_rng(seed)
    pairs = list(combinations(range(n), 2))
    signs = rng.choice(np.array([-1, 1]), size=len(pairs))
    return Instance.kxor(n, pairs, signs)


def grid_2sat(D: int) -> Instance:
    """
    Max-2SAT on a D x D grid of variables (variable ``r*D + c``).

    Two variables in the same row get ``x or y``; two in the same column get
    ``not x or not y``. A variable is true when it equals +1.
    """
    if D < 2:
        raise ValueError("grid needs D >= 2")
    cons = []
    for r in range(D):
        for a, b in combinations(range(D), 2):
            cons.append((or_(2), (r * D + a, r * D + b)))
    for c in range(D):
        for a, b in combinations(range(D), 2):
            cons.append((nand(2), (a * D + c, b * D + c)))
    return Instance(D * D, cons)


def nae_ae_gadget() -> Instance:
    """
    Eight 3-ary NAE/AE constraints on x1..x3 (vars 0-2) and y1..y3 (vars 3-5).

    Every assignment satisfies exactly four of them.
    """
    x1, x2, x3, y1, y2, y3 = range(6)
    NAE, AE = nae(3), ae(3)
    return Instance(6, [
        (NAE, (x1, x2, x3)),
        (AE, (y1, x2, x3)), (AE, (x1, y2, x3)), (AE, (x1, x2, y3)),
        (NAE, (x1, y2, y3)), (NAE, (y1, x2, y3)), (NAE, (y1, y2, x3)),
        (AE, (y1, y2, y3)),
    ])
