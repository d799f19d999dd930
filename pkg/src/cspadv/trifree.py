"""
Greedy median thresholds for triangle-free CSPs.

Variables are split uniformly at random into a Fixed side F and a Greedy
side G. A constraint is *active* when exactly one of its variables, j, lies
in G. With x_F uniform, each greedy bit is the sign of the sum of the
derivatives ``Q_l = d_j P_l`` of its active constraints, shifted by an exact
median so that the bit stays unbiased. Triangle-freeness keeps these sums
over disjoint variable sets, so inactive constraints see independent uniform
bits and active ones gain in expectation.
"""
from __future__ import annotations

import math
import time
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .csp import Instance, Predicate, check_triangle_free, mu, sqrt_degree_yardstick, validate
from .fourier import MultilinearPoly, derivative
from .report import SolveReport, as_rng

K_MAX = 8
HALF = Fraction(1, 2)


class NotTriangleFree(ValueError):
    def __init__(self, report):
        super().__init__(report.describe())
        self.report = report


@dataclass(frozen=True)
class PartitionPlan:
    """
    A Fixed/Greedy split with its active constraints.

    ``N[j]`` lists ``(constraint id, position of j in the scope)`` for the
    active constraints of greedy variable ``j``; ``A[j]`` is the union of
    their other variables.
    """

    n: int
    in_G: np.ndarray
    N: dict
    A: dict

    @property
    def G(self) -> list[int]:
        return np.flatnonzero(self.in_G).tolist()

    @property
    def F(self) -> list[int]:
        return np.flatnonzero(~self.in_G).tolist()

    def active(self) -> dict[int, int]:
        """Map from active constraint id to its greedy variable."""
        return {ell: j for j, items in self.N.items() for ell, _ in items}


def _precheck(inst: Instance) -> None:
    rep = validate(inst, min_arity=2)
    bad = [p.arity for p in inst.predicates if p.arity > K_MAX]
    if not rep.ok or bad:
        raise ValueError(str(rep) if not rep.ok else f"arity above {K_MAX}")
    tf = check_triangle_free(inst)
    if not tf.ok:
        raise NotTriangleFree(tf)


def plan_from_greedy_set(inst: Instance, in_G) -> PartitionPlan:
    in_G = np.asarray(in_G, dtype=bool)
    N: dict[int, list] = defaultdict(list)
    A: dict[int, set] = defaultdict(set)
    for ell, scope in enumerate(inst.scopes):
        greedy = [t for t, v in enumerate(scope) if in_G[v]]
        if len(greedy) == 1:
            t = greedy[0]
            j = scope[t]
            N[j].append((ell, t))
            A[j].update(v for v in scope if v != j)
    return PartitionPlan(
        inst.n, in_G,
        {j: tuple(v) for j, v in N.items()},
        {j: frozenset(v) for j, v in A.items()},
    )


def plan_partition(inst: Instance, rng=None, check: bool = True) -> PartitionPlan:
    """Put each variable in G independently with probability 1/2."""
    if check:
        _precheck(inst)
    in_G = as_rng(rng).random(inst.n) < 0.5
    return plan_from_greedy_set(inst, in_G)


def plan_invariant_holds(inst: Instance, plan: PartitionPlan) -> bool:
    """
    Independence structure needed for inactive constraints.

    For every inactive constraint, the sets ``A_j`` of its greedy variables
    must be pairwise disjoint and avoid its fixed variables.
    """
    active = plan.active()
    for ell, scope in enumerate(inst.scopes):
        if ell in active:
            continue
        seen = {v for v in scope if not plan.in_G[v]}
        for v in scope:
            if plan.in_G[v]:
                a = plan.A.get(v, frozenset())
                if not seen.isdisjoint(a):
                    return False
                seen |= a
    return True


def lift(p: MultilinearPoly, scope, n: int) -> MultilinearPoly:
    """Rename local variable t of ``p`` to ``scope[t]`` in an n-variable polynomial."""
    return MultilinearPoly(n, {tuple(scope[t] for t in key): c for key, c in p.terms.items()})


def derivative_terms(inst: Instance, plan: PartitionPlan, j: int, exact: bool = True) -> list[MultilinearPoly]:
    """``Q_l = d_j P_l`` for each active constraint of ``j``, over the instance's variables."""
    if not plan.in_G[j]:
        raise ValueError(f"variable {j} is not on the greedy side")
    out = []
    for ell, _ in plan.N.get(j, ()):
        pred, scope = inst.constraint(ell)
        out.append(derivative(lift(pred.poly(exact), scope, inst.n), j))
    return out


@lru_cache(maxsize=None)
def half_derivative_pmf(pred: Predicate, t: int) -> tuple[Fraction, Fraction, Fraction]:
    """
    Distribution of ``2 * d_t P`` over uniform inputs: probabilities of -1, 0, +1.
    """
    counts = [0, 0, 0]
    bit = 1 << t
    for row in range(1 << pred.arity):
        if not row & bit:
            counts[pred.table[row | bit] - pred.table[row] + 1] += 1
    total = 1 << (pred.arity - 1)
    return tuple(Fraction(c, total) for c in counts)


@dataclass(frozen=True)
class ThresholdRule:
    """
    Exact median rule for a sum of independent derivative terms.

    The sum lives on half-integers; ``support_half[i]`` is twice a support
    point and ``probs[i]`` its probability. The greedy bit is +1 above
    ``theta``, -1 below, and +1 with probability ``p_plus_at_tie`` at ``theta``.
    """

    theta: Fraction
    p_plus_at_tie: Fraction
    support_half: tuple[int, ...]
    probs: tuple[Fraction, ...]

    @property
    def theta_half(self) -> int:
        return int(2 * self.theta)

    @property
    def distribution(self) -> dict[Fraction, Fraction]:
        return {Fraction(h, 2): p for h, p in zip(self.support_half, self.probs)}

    def prob_above(self) -> Fraction:
        return sum((p for h, p in zip(self.support_half, self.probs) if h > self.theta_half), Fraction(0))

    def prob_at(self) -> Fraction:
        return sum((p for h, p in zip(self.support_half, self.probs) if h == self.theta_half), Fraction(0))

    def bias(self) -> Fraction:
        """``E[x_j]`` under the rule; zero by construction."""
        above, at = self.prob_above(), self.prob_at()
        below = 1 - above - at
        return above - below + at * (2 * self.p_plus_at_tie - 1)

    def plus_probability(self, qsum_half: int) -> Fraction:
        if qsum_half > self.theta_half:
            return Fraction(1)
        if qsum_half < self.theta_half:
            return Fraction(0)
        return self.p_plus_at_tie

    def mean_abs_deviation(self) -> Fraction:
        """``E|Q - theta|``, which equals ``E[x_j Q]`` for an unbiased x_j."""
        return sum((p * abs(Fraction(h, 2) - self.theta) for h, p in zip(self.support_half, self.probs)), Fraction(0))

    def stddev(self) -> float:
        mean = sum((p * Fraction(h, 2) for h, p in zip(self.support_half, self.probs)), Fraction(0))
        var = sum((p * (Fraction(h, 2) - mean) ** 2 for h, p in zip(self.support_half, self.probs)), Fraction(0))
        return math.sqrt(var)


COIN_RULE = ThresholdRule(Fraction(0), HALF, (0,), (Fraction(1),))


def rule_from_pmfs(pmfs) -> ThresholdRule:
    """Convolve per-term pmfs over {-1, 0, +1} half-units and take the median."""
    if not pmfs:
        return COIN_RULE
    dist = {0: Fraction(1)}
    for pm in pmfs:
        nxt: dict[int, Fraction] = defaultdict(Fraction)
        for h, p in dist.items():
            for d, q in zip((-1, 0, 1), pm):
                if q:
                    nxt[h + d] += p * q
        dist = nxt
    support = sorted(h for h, p in dist.items() if p)
    probs = [dist[h] for h in support]
    cdf = Fraction(0)
    for h, p in zip(support, probs):
        cdf += p
        if cdf >= HALF:
            theta_half, at = h, p
            break
    above = 1 - cdf
    p_tie = (HALF - above) / at
    return ThresholdRule(Fraction(theta_half, 2), p_tie, tuple(support), tuple(probs))


def threshold_rule(terms) -> ThresholdRule:
    """
    Rule for a list of derivative polynomials ``Q_l`` on disjoint variables.

    Each term's pmf is read off by enumerating its own variables.
    """
    pmfs = []
    for q in terms:
        vs = sorted(q.variables())
        counts = [0, 0, 0]
        for bits in range(1 << len(vs)):
            x = np.ones(q.n)
            for t, v in enumerate(vs):
                if not bits >> t & 1:
                    x[v] = -1
            h = 2 * q(x)
            if abs(h - round(h)) > 1e-9 or abs(h) > 1 + 1e-9:
                raise ValueError("derivative term takes a value outside {-1/2, 0, 1/2}")
            counts[int(round(h)) + 1] += 1
        total = 1 << len(vs)
        pmfs.append(tuple(Fraction(c, total) for c in counts))
    return rule_from_pmfs(pmfs)


class RuleCache:
    """Rules keyed by the multiset of (predicate, position) of the active constraints."""

    def __init__(self, inst: Instance):
        self.inst = inst
        self._rules: dict[tuple, ThresholdRule] = {}

    def signature(self, items) -> tuple:
        return tuple(sorted((self.inst.pred_ids[ell], t) for ell, t in items))

    def rule(self, items) -> ThresholdRule:
        key = self.signature(items)
        rule = self._rules.get(key)
        if rule is None:
            preds = self.inst.predicates
            rule = self._rules[key] = rule_from_pmfs([half_derivative_pmf(preds[pid], t) for pid, t in key])
        return rule

    def rules_for(self, plan: PartitionPlan) -> dict[int, ThresholdRule]:
        return {j: self.rule(plan.N.get(j, ())) for j in plan.G}

    def __len__(self):
        return len(self._rules)


def active_sums_half(inst: Instance, plan: PartitionPlan, x) -> dict[int, int]:
    """``2 * sum_{l in N_j} Q_l(x)`` for each greedy j, from truth tables."""
    bits = (np.asarray(x) > 0).astype(np.int64)
    out = {j: 0 for j in plan.G}
    for j, items in plan.N.items():
        total = 0
        for ell, t in items:
            pred, scope = inst.constraint(ell)
            row = sum(int(bits[v]) << s for s, v in enumerate(scope))
            total += pred.table[row | 1 << t] - pred.table[row & ~(1 << t)]
        out[j] = total
    return out


def greedy_assign(inst: Instance, plan: PartitionPlan, x_F, rules, rng=None) -> np.ndarray:
    """
    Complete ``x_F`` (values on G are ignored) with the greedy bits.

    One uniform tie coin is drawn per greedy variable in index order.
    """
    rng = as_rng(rng)
    x = np.array(x_F, dtype=np.int8, copy=True)
    G = plan.G
    coins = rng.random(len(G))
    sums = active_sums_half(inst, plan, x)
    for j, u in zip(G, coins):
        x[j] = 1 if u < rules[j].plus_probability(sums[j]) else -1
    return x


class _FastRep:
    """Vectorized partition, activity detection and greedy pass."""

    def __init__(self, inst: Instance):
        self.inst = inst
        self.groups = list(inst._groups.items())

    def run(self, rng, cache: RuleCache):
        inst = self.inst
        n = inst.n
        in_G = rng.random(n) < 0.5
        x = rng.choice(np.array([-1, 1], dtype=np.int8), size=n)
        bits = (x > 0).astype(np.int64)
        sums = np.zeros(n, dtype=np.int64)
        items: dict[int, list] = defaultdict(list)
        for r, (ells, scopes, rows, tables) in self.groups:
            g = in_G[scopes]
            act = g.sum(axis=1) == 1
            if not act.any():
                continue
            sc = scopes[act]
            t = np.argmax(g[act], axis=1)
            j = sc[np.arange(sc.shape[0]), t]
            row = (bits[sc] << np.arange(r)).sum(axis=1)
            rw = rows[act]
            h = tables[rw, row | (1 << t)].astype(np.int64) - tables[rw, row & ~(1 << t)]
            np.add.at(sums, j, h)
            for ell, jj, tt in zip(ells[act].tolist(), j.tolist(), t.tolist()):
                items[jj].append((ell, tt))
        G = np.flatnonzero(in_G)
        coins = rng.random(G.shape[0])
        for j, u in zip(G.tolist(), coins):
            rule = cache.rule(items.get(j, ()))
            x[j] = 1 if u < rule.plus_probability(int(sums[j])) else -1
        return x, in_G, items


def default_reps(k: int) -> int:
    return 8 * math.ceil(math.exp(k))


def solve_triangle_free(inst: Instance, rng=None, reps: int | None = None, check_plans: bool = False):
    """
    Repeat partition, uniform x_F and greedy completion; keep the best assignment.

    ``check_plans`` re-verifies the independence structure of every plan.
    Returns ``(x, SolveReport)``.
    """
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = as_rng(rng)
    t0 = time.perf_counter()
    _precheck(inst)
    k = max(p.arity for p in inst.predicates)
    reps = reps or default_reps(k)
    cache = RuleCache(inst)
    fast = _FastRep(inst)
    base = mu(inst)
    m = inst.m
    best_x, best_count, per_rep = None, -1, []
    for _ in range(reps):
        x, in_G, items = fast.run(rng, cache)
        if check_plans:
            plan = PartitionPlan(inst.n, in_G, {j: tuple(v) for j, v in items.items()},
                                 {j: frozenset(v for ell, _ in it for v in inst.scopes[ell] if v != j)
                                  for j, it in items.items()})
            if not plan_invariant_holds(inst, plan):
                raise AssertionError("greedy neighbourhoods overlap on a triangle-free instance")
        c = inst.satisfied_count(x)
        per_rep.append(float(Fraction(c, m) - base))
        if c > best_count:
            best_x, best_count = x, c
    millis = (time.perf_counter() - t0) * 1000
    report = SolveReport.build(
        "trifree", inst, best_x, best_count, seed=seed, millis=millis, reps=reps,
        extra={"per_rep_advantage": per_rep, "mean_rep_advantage": float(np.mean(per_rep)),
               "rules_cached": len(cache), "k": k},
    )
    return best_x, report
