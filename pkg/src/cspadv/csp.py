"""
Constraint satisfaction instances over {-1,+1} variables.

An :class:`Instance` holds ``n`` variables and ``m`` constraints, each a
:class:`Predicate` (a 0/1 truth table) applied to an ordered scope of
distinct variables. Satisfied counts are always computed as exact integers
from truth tables; the associated polynomial is only used for analysis.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .fourier import MultilinearPoly, from_truth_table

K_MAX = 8


@dataclass(frozen=True)
class Predicate:
    """
    Boolean predicate of arity r given by its 2^r-entry truth table.

    Row ``b`` corresponds to inputs ``x_t = +1`` iff bit ``t`` of ``b`` is set;
    ``table[b] == 1`` means the constraint is satisfied.
    """

    table: tuple[int, ...]

    def __post_init__(self):
        table = tuple(int(v) for v in self.table)
        size = len(table)
        if size < 2 or size & (size - 1):
            raise ValueError(f"truth table length {size} is not a power of two >= 2")
        if any(v not in (0, 1) for v in table):
            raise ValueError("truth table entries must be 0 or 1")
        if size.bit_length() - 1 > K_MAX:
            raise ValueError(f"arity exceeds k_max={K_MAX}")
        object.__setattr__(self, "table", table)

    @property
    def arity(self) -> int:
        return len(self.table).bit_length() - 1

    @property
    def n_satisfying(self) -> int:
        return sum(self.table)

    @property
    def density(self) -> Fraction:
        """Fraction of inputs that satisfy the predicate."""
        return Fraction(self.n_satisfying, len(self.table))

    def __call__(self, x: Sequence[int]) -> int:
        row = sum(1 << t for t, v in enumerate(x) if v > 0)
        return self.table[row]

    def sensitive(self, t: int) -> bool:
        """True if flipping input ``t`` changes the output on some row."""
        bit = 1 << t
        return any(self.table[b] != self.table[b ^ bit] for b in range(len(self.table)) if not b & bit)

    def depends_on_all(self) -> bool:
        return all(self.sensitive(t) for t in range(self.arity))

    def poly(self, exact: bool = False) -> MultilinearPoly:
        return _predicate_poly(self.table, exact)

    def parity_sign(self) -> int | None:
        """``b`` if this is the parity predicate ``prod x_t == b``, else None."""
        for b in (1, -1):
            if self.table == xor(self.arity, b).table:
                return b
        return None

    def to_hex(self) -> str:
        value = sum(v << b for b, v in enumerate(self.table))
        width = max(1, len(self.table) // 4)
        return format(value, f"0{width}x")

    @classmethod
    def from_hex(cls, r: int, text: str) -> "Predicate":
        value = int(text, 16)
        if value >> (1 << r):
            raise ValueError(f"hex table {text!r} has more than 2^{r} bits")
        return cls(tuple(value >> b & 1 for b in range(1 << r)))

    @classmethod
    def from_function(cls, r: int, fn) -> "Predicate":
        """Build from a function of a tuple of r values in {-1,+1}."""
        rows = []
        for b in range(1 << r):
            x = tuple(1 if b >> t & 1 else -1 for t in range(r))
            rows.append(1 if fn(x) else 0)
        return cls(tuple(rows))


@lru_cache(maxsize=None)
def _predicate_poly(table: tuple[int, ...], exact: bool) -> MultilinearPoly:
    return from_truth_table(np.array(table), exact=exact)


@lru_cache(maxsize=None)
def xor(r: int, b: int = 1) -> Predicate:
    """Satisfied iff ``x_1 * ... * x_r == b``."""
    b = int(b)
    if b not in (1, -1):
        raise ValueError("parity sign must be +1 or -1")
    return Predicate.from_function(r, lambda x: math.prod(x) == b)


@lru_cache(maxsize=None)
def or_(r: int) -> Predicate:
    return Predicate.from_function(r, lambda x: any(v > 0 for v in x))


@lru_cache(maxsize=None)
def and_(r: int) -> Predicate:
    return Predicate.from_function(r, lambda x: all(v > 0 for v in x))


@lru_cache(maxsize=None)
def nand(r: int) -> Predicate:
    return Predicate.from_function(r, lambda x: not all(v > 0 for v in x))


@lru_cache(maxsize=None)
def nae(r: int) -> Predicate:
    return Predicate.from_function(r, lambda x: len(set(x)) > 1)


@lru_cache(maxsize=None)
def ae(r: int) -> Predicate:
    return Predicate.from_function(r, lambda x: len(set(x)) == 1)


@lru_cache(maxsize=None)
def constant_true(r: int) -> Predicate:
    return Predicate((1,) * (1 << r))


class Instance:
    """
    A CSP instance: ``n`` variables and a list of (predicate, scope) constraints.

    Predicates are pooled by truth table and constraints refer to them by id.
    Instances are treated as immutable once built.
    """

    def __init__(self, n: int, constraints: Iterable[tuple[Predicate, Sequence[int]]] = ()):
        self.n = int(n)
        self.predicates: list[Predicate] = []
        pool: dict[tuple[int, ...], int] = {}
        pred_ids, scopes = [], []
        for pred, scope in constraints:
            pid = pool.get(pred.table)
            if pid is None:
                pid = pool[pred.table] = len(self.predicates)
                self.predicates.append(pred)
            pred_ids.append(pid)
            scopes.append(tuple(int(v) for v in scope))
        self.pred_ids: tuple[int, ...] = tuple(pred_ids)
        self.scopes: tuple[tuple[int, ...], ...] = tuple(scopes)

    @classmethod
    def kxor(cls, n: int, scopes: Iterable[Sequence[int]], signs: Iterable[int]) -> "Instance":
        """Instance with constraints ``prod_{i in scope} x_i == sign``."""
        cons = []
        for scope, b in zip(scopes, signs, strict=True):
            cons.append((xor(len(scope), int(b)), scope))
        return cls(n, cons)

    @property
    def m(self) -> int:
        return len(self.scopes)

    def constraint(self, ell: int) -> tuple[Predicate, tuple[int, ...]]:
        return self.predicates[self.pred_ids[ell]], self.scopes[ell]

    def __iter__(self):
        for pid, scope in zip(self.pred_ids, self.scopes):
            yield self.predicates[pid], scope

    def __eq__(self, other) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return self.n == other.n and [(p.table, s) for p, s in self] == [(p.table, s) for p, s in other]

    __hash__ = None

    def __repr__(self) -> str:
        kind = f"{self.kxor_arity}xor" if self.is_kxor else "generic"
        return f"Instance(n={self.n}, m={self.m}, kind={kind})"

    @cached_property
    def kxor_arity(self) -> int | None:
        """k if every predicate is a +-parity of the same arity k, else None."""
        if not self.predicates:
            return None
        arities = {p.arity for p in self.predicates}
        if len(arities) != 1 or any(p.parity_sign() is None for p in self.predicates):
            return None
        return arities.pop()

    @property
    def is_kxor(self) -> bool:
        return self.kxor_arity is not None

    @cached_property
    def signs(self) -> np.ndarray:
        """Right-hand sides ``b_l`` of a kXOR instance."""
        if not self.is_kxor:
            raise ValueError("signs are only defined for kXOR instances")
        by_pred = [p.parity_sign() for p in self.predicates]
        return np.array([by_pred[pid] for pid in self.pred_ids], dtype=np.int8)

    @cached_property
    def _groups(self):
        # per arity: (constraint ids, scope array, predicate-row ids, stacked tables)
        groups = {}
        by_arity = defaultdict(list)
        for ell, scope in enumerate(self.scopes):
            by_arity[len(scope)].append(ell)
        for r, ells in sorted(by_arity.items()):
            pids = sorted({self.pred_ids[ell] for ell in ells})
            local = {pid: t for t, pid in enumerate(pids)}
            tables = np.array([self.predicates[pid].table for pid in pids], dtype=np.uint8)
            rows = np.array([local[self.pred_ids[ell]] for ell in ells], dtype=np.int64)
            scopes = np.array([self.scopes[ell] for ell in ells], dtype=np.int64).reshape(len(ells), r)
            groups[r] = (np.array(ells, dtype=np.int64), scopes, rows, tables)
        return groups

    def satisfied_mask(self, x) -> np.ndarray:
        """Boolean vector: which constraints ``x`` satisfies."""
        x = check_assignment(self, x)
        out = np.zeros(self.m, dtype=bool)
        bits = (x > 0).astype(np.int64)
        for r, (ells, scopes, rows, tables) in self._groups.items():
            row_index = (bits[scopes] << np.arange(r)).sum(axis=1)
            out[ells] = tables[rows, row_index].astype(bool)
        return out

    def satisfied_count(self, x) -> int:
        return int(self.satisfied_mask(x).sum())

    def satisfied_counts(self, X) -> np.ndarray:
        """Satisfied counts for each row of an (N, n) array of assignments."""
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.n:
            raise ValueError(f"expected shape (N, {self.n})")
        bits = (X > 0).astype(np.int64)
        total = np.zeros(X.shape[0], dtype=np.int64)
        for r, (ells, scopes, rows, tables) in self._groups.items():
            row_index = (bits[:, scopes] << np.arange(r)).sum(axis=2)
            total += tables[rows[None, :], row_index].sum(axis=1, dtype=np.int64)
        return total


def check_assignment(inst: Instance, x) -> np.ndarray:
    arr = np.asarray(x)
    if arr.shape != (inst.n,):
        raise ValueError(f"assignment has shape {arr.shape}, expected ({inst.n},)")
    if not np.all((arr == 1) | (arr == -1)):
        raise ValueError("assignment entries must be +1 or -1")
    return arr


def value_fraction(inst: Instance, x) -> Fraction:
    """Exact fraction of constraints satisfied by ``x``."""
    if inst.m == 0:
        raise ValueError("instance has no constraints")
    return Fraction(inst.satisfied_count(x), inst.m)


def mu(inst: Instance) -> Fraction:
    """Expected satisfied fraction under a uniformly random assignment."""
    if inst.m == 0:
        raise ValueError("instance has no constraints")
    return sum((inst.predicates[pid].density for pid in inst.pred_ids), Fraction(0)) / inst.m


def associated_polynomial(inst: Instance, exact: bool = False) -> MultilinearPoly:
    """
    Polynomial whose value at ``x`` is ``value_fraction(inst, x) - mu(inst)``.

    It is the average over constraints of the centred predicates lifted onto
    their scopes. With ``exact=True`` coefficients are Fractions.
    """
    m = inst.m
    if m == 0:
        raise ValueError("instance has no constraints")
    scale = Fraction(1, m) if exact else 1.0 / m
    lifted: list[list[tuple[tuple[int, ...], object]]] = []
    for pred in inst.predicates:
        lifted.append([(key, c) for key, c in pred.poly(exact).terms.items() if key])
    acc: dict[tuple[int, ...], object] = {}
    for pid, scope in zip(inst.pred_ids, inst.scopes):
        for key, c in lifted[pid]:
            glob = tuple(sorted(scope[t] for t in key))
            acc[glob] = acc.get(glob, 0) + c
    return MultilinearPoly(inst.n, {k: c * scale for k, c in acc.items()})


def degrees(inst: Instance) -> np.ndarray:
    """Number of constraints containing each variable."""
    deg = np.zeros(inst.n, dtype=np.int64)
    for scope in inst.scopes:
        for v in scope:
            deg[v] += 1
    return deg


def degree(inst: Instance, i: int) -> int:
    if not 0 <= i < inst.n:
        raise IndexError(f"variable {i} out of range")
    return sum(1 for scope in inst.scopes if i in scope)


def max_degree(inst: Instance) -> int:
    return int(degrees(inst).max(initial=0))


def sqrt_degree_yardstick(inst: Instance) -> float:
    """``sum_i sqrt(deg(i)) / m``, the scale of the achievable advantage."""
    return float(np.sqrt(degrees(inst)).sum() / inst.m)


def incidence(inst: Instance) -> list[list[int]]:
    """For each variable, the ids of the constraints containing it."""
    inc: list[list[int]] = [[] for _ in range(inst.n)]
    for ell, scope in enumerate(inst.scopes):
        for v in scope:
            inc[v].append(ell)
    return inc


@dataclass(frozen=True)
class TriangleFreeReport:
    """Outcome of :func:`check_triangle_free`; ``witness`` lists constraint ids."""

    kind: str  # "ok" | "overlap" | "hyper_triangle"
    witness: tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        return self.kind == "ok"

    def describe(self) -> str:
        if self.ok:
            return "triangle-free"
        if self.kind == "overlap":
            return f"constraints {self.witness[0]} and {self.witness[1]} share two or more variables"
        a, b, c = self.witness
        return f"constraints {a}, {b}, {c} pairwise intersect (hyper-triangle)"


def check_triangle_free(inst: Instance) -> TriangleFreeReport:
    """
    Look for two scopes sharing at least two variables, then for a hyper-triangle.

    A hyper-triangle is three constraints that pairwise intersect without a
    variable common to all three; constraints merely sharing one variable do
    not form one (otherwise every variable of degree 3 would).
    """
    pair_owner: dict[tuple[int, int], int] = {}
    for ell, scope in enumerate(inst.scopes):
        for u, v in combinations(sorted(scope), 2):
            prev = pair_owner.setdefault((u, v), ell)
            if prev != ell:
                return TriangleFreeReport("overlap", (prev, ell))

    inc = incidence(inst)
    for ell, scope in enumerate(inst.scopes):
        for u, v in combinations(scope, 2):
            # variables reachable from u through another constraint
            via_u = {}
            for a in inc[u]:
                if a != ell:
                    for w in inst.scopes[a]:
                        if w != u:
                            via_u.setdefault(w, a)
            for b in inc[v]:
                if b == ell:
                    continue
                for w in inst.scopes[b]:
                    if w != v and w in via_u:
                        return TriangleFreeReport("hyper_triangle", tuple(sorted((ell, via_u[w], b))))
    return TriangleFreeReport("ok")


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        return "valid" if self.ok else "; ".join(self.violations)


def validate(inst: Instance, min_arity: int = 1) -> ValidationReport:
    """
    List every structural problem with ``inst``.

    Checks scope bounds and distinctness, that each predicate depends on all
    of its inputs, the arity range, and for kXOR instances that no two
    constraints share the same scope as a set.
    """
    report = ValidationReport()
    for ell, (pred, scope) in enumerate(inst):
        if len(scope) != pred.arity:
            report.violations.append(f"constraint {ell}: scope length {len(scope)} != arity {pred.arity}")
        if len(set(scope)) != len(scope):
            report.violations.append(f"constraint {ell}: repeated coordinate in scope {scope}")
        if any(not 0 <= v < inst.n for v in scope):
            report.violations.append(f"constraint {ell}: scope {scope} out of range for n={inst.n}")
        if pred.arity < min_arity:
            report.violations.append(f"constraint {ell}: arity {pred.arity} below {min_arity}")
    for pid, pred in enumerate(inst.predicates):
        for t in range(pred.arity):
            if not pred.sensitive(t):
                used = [ell for ell, p in enumerate(inst.pred_ids) if p == pid]
                report.violations.append(
                    f"insensitive coordinate {t} in predicate {pred.to_hex()} (constraints {used[:5]})"
                )
    if inst.is_kxor:
        seen: dict[frozenset, int] = {}
        for ell, scope in enumerate(inst.scopes):
            key = frozenset(scope)
            if key in seen:
                report.violations.append(
                    f"kXOR constraints {seen[key]} and {ell} have the same scope set"
                )
            else:
                seen[key] = ell
    return report
