"""
Sparse multilinear polynomials over the Boolean hypercube {-1,+1}^n.

A polynomial is stored as a map from index subsets (sorted tuples) to real
coefficients. Coefficients may be floats or :class:`fractions.Fraction`;
the dict-based operations (expectation, variance, influence, derivative,
restriction) preserve exact rationals, evaluation goes through numpy.

Truth-table convention, shared with the instance file format: row index
``b = sum_t b_t * 2**t`` where ``b_t = 1`` iff input ``t`` is ``+1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

ZERO_TOL = 1e-12
MAX_TABLE_ARITY = 20

Key = tuple[int, ...]


def _canonical_key(key: Iterable[int]) -> Key:
    k = tuple(sorted(int(i) for i in key))
    if len(set(k)) != len(k):
        raise ValueError(f"repeated variable in monomial {key!r}")
    return k


class MultilinearPoly:
    """
    Real multilinear polynomial ``sum_S c_S prod_{i in S} x_i`` on n variables.

    Instances are immutable. Coefficients with magnitude at most ``1e-12``
    are dropped on construction.

    :param n: number of variables
    :param terms: mapping from an iterable of variable indices to a coefficient;
                  repeated keys (in any order) are summed
    """

    __slots__ = ("n", "_terms", "_compiled")

    def __init__(self, n: int, terms: Mapping[Iterable[int], float] | None = None):
        if n < 0:
            raise ValueError("n must be non-negative")
        acc: dict[Key, float] = {}
        for key, c in (terms or {}).items():
            k = _canonical_key(key)
            if k and (k[0] < 0 or k[-1] >= n):
                raise ValueError(f"monomial {k} out of range for n={n}")
            acc[k] = acc.get(k, 0) + c
        self.n = n
        self._terms = {k: c for k, c in acc.items() if abs(c) > ZERO_TOL}
        self._compiled = None

    @classmethod
    def _from_clean(cls, n: int, terms: dict[Key, float]) -> "MultilinearPoly":
        # keys already canonical and in range; only drop zeros
        p = cls.__new__(cls)
        p.n = n
        p._terms = {k: c for k, c in terms.items() if abs(c) > ZERO_TOL}
        p._compiled = None
        return p

    @classmethod
    def constant(cls, n: int, c: float) -> "MultilinearPoly":
        return cls._from_clean(n, {(): c})

    @classmethod
    def monomial(cls, n: int, key: Iterable[int], c: float = 1.0) -> "MultilinearPoly":
        return cls(n, {tuple(key): c})

    @property
    def terms(self) -> Mapping[Key, float]:
        return MappingProxyType(self._terms)

    @property
    def degree(self) -> int:
        return max((len(k) for k in self._terms), default=0)

    def coefficient(self, key: Iterable[int]) -> float:
        return self._terms.get(_canonical_key(key), 0)

    def variables(self) -> set[int]:
        return {i for k in self._terms for i in k}

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __repr__(self) -> str:
        if not self._terms:
            return f"MultilinearPoly(n={self.n}, 0)"
        parts = []
        for k in sorted(self._terms, key=lambda k: (len(k), k)):
            mono = "*".join(f"x{i}" for i in k) or "1"
            parts.append(f"{self._terms[k]}*{mono}")
        return f"MultilinearPoly(n={self.n}, " + " + ".join(parts) + ")"

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultilinearPoly):
            return NotImplemented
        return self.n == other.n and self._terms == other._terms

    __hash__ = None

    def allclose(self, other: "MultilinearPoly", tol: float = 1e-9) -> bool:
        keys = set(self._terms) | set(other._terms)
        return all(abs(self._terms.get(k, 0) - other._terms.get(k, 0)) <= tol for k in keys)

    def __add__(self, other):
        if isinstance(other, MultilinearPoly):
            n = max(self.n, other.n)
            out = dict(self._terms)
            for k, c in other._terms.items():
                out[k] = out.get(k, 0) + c
            return MultilinearPoly._from_clean(n, out)
        out = dict(self._terms)
        out[()] = out.get((), 0) + other
        return MultilinearPoly._from_clean(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return MultilinearPoly._from_clean(self.n, {k: -c for k, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, c):
        if isinstance(c, MultilinearPoly):
            return NotImplemented
        return MultilinearPoly._from_clean(self.n, {k: v * c for k, v in self._terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, c):
        return MultilinearPoly._from_clean(self.n, {k: v / c for k, v in self._terms.items()})

    def compiled(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """Terms grouped by degree as ``(index array (t, d), coefficient array (t,))`` pairs."""
        if self._compiled is None:
            groups: dict[int, tuple[list, list]] = {}
            for k, c in self._terms.items():
                keys, coefs = groups.setdefault(len(k), ([], []))
                keys.append(k)
                coefs.append(float(c))
            self._compiled = [
                (np.asarray(keys, dtype=np.int64).reshape(len(keys), d), np.asarray(coefs))
                for d, (keys, coefs) in sorted(groups.items())
            ]
        return self._compiled

    def __call__(self, x) -> float:
        return evaluate(self, x)


@dataclass(frozen=True)
class PartialAssignment:
    """Values fixed on a subset of coordinates."""

    fixed: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for i, v in dict(self.fixed).items():
            if v not in (-1, 1):
                raise ValueError(f"value for x{i} must be +1 or -1, got {v!r}")
            if int(i) < 0:
                raise ValueError("negative index")
            clean[int(i)] = int(v)
        object.__setattr__(self, "fixed", MappingProxyType(clean))

    @classmethod
    def from_mask(cls, mask, values) -> "PartialAssignment":
        """Fix the coordinates where ``mask`` is true to the matching entries of ``values``."""
        idx = np.flatnonzero(mask)
        return cls({int(i): int(values[i]) for i in idx})

    def free(self, n: int) -> list[int]:
        return [i for i in range(n) if i not in self.fixed]

    def merge(self, x_free, n: int) -> np.ndarray:
        """Full assignment taking fixed values here and ``x_free`` (length n) elsewhere."""
        out = np.array(x_free, dtype=np.int8, copy=True)
        if out.shape != (n,):
            raise ValueError(f"expected length {n}")
        for i, v in self.fixed.items():
            out[i] = v
        return out


def _as_pm1(x, n: int) -> np.ndarray:
    arr = np.asarray(x)
    if arr.shape != (n,):
        raise ValueError(f"assignment has shape {arr.shape}, expected ({n},)")
    if not np.all((arr == 1) | (arr == -1)):
        raise ValueError("assignment entries must be +1 or -1")
    return arr


def _eval_compiled(p: MultilinearPoly, point: np.ndarray) -> float:
    total = 0.0
    for idx, coef in p.compiled():
        if idx.shape[1] == 0:
            total += float(coef.sum())
        else:
            total += float(coef @ np.prod(point[idx], axis=1))
    return total


def evaluate(p: MultilinearPoly, x) -> float:
    """Value of ``p`` at a point of {-1,+1}^n."""
    return _eval_compiled(p, _as_pm1(x, p.n).astype(np.float64))


def evaluate_many(p: MultilinearPoly, X) -> np.ndarray:
    """Evaluate ``p`` on each row of the (N, n) array ``X``."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != p.n:
        raise ValueError(f"expected shape (N, {p.n})")
    out = np.zeros(X.shape[0])
    for idx, coef in p.compiled():
        if idx.shape[1] == 0:
            out += coef.sum()
        else:
            out += np.prod(X[:, idx], axis=2) @ coef
    return out


def evaluate_at_biases(p: MultilinearPoly, mu) -> float:
    """
    Expectation of ``p(X)`` for independent bits with ``E[X_i] = mu[i]``.

    By multilinearity this is ``p`` evaluated at the real point ``mu``; in
    particular ``evaluate_at_biases(g, eta * x)`` is the noise operator
    ``T_eta g`` applied at ``x``.
    """
    mu = np.asarray(mu, dtype=np.float64)
    if mu.shape != (p.n,):
        raise ValueError(f"bias vector has shape {mu.shape}, expected ({p.n},)")
    if np.any(np.abs(mu) > 1 + ZERO_TOL):
        raise ValueError("biases must lie in [-1, 1]")
    return _eval_compiled(p, mu)


def expectation(p: MultilinearPoly):
    return p._terms.get((), 0)


def variance(p: MultilinearPoly):
    return sum((c * c for k, c in p._terms.items() if k), 0)


def influence(p: MultilinearPoly, i: int):
    if not 0 <= i < p.n:
        raise IndexError(f"variable {i} out of range for n={p.n}")
    return sum((c * c for k, c in p._terms.items() if i in k), 0)


def derivative(p: MultilinearPoly, i: int) -> MultilinearPoly:
    """``(p(x, x_i=+1) - p(x, x_i=-1)) / 2``; variable indices are kept, ``x_i`` drops out."""
    if not 0 <= i < p.n:
        raise IndexError(f"variable {i} out of range for n={p.n}")
    out = {}
    for k, c in p._terms.items():
        if i in k:
            out[tuple(j for j in k if j != i)] = c
    return MultilinearPoly._from_clean(p.n, out)


def restrict(p: MultilinearPoly, pa: PartialAssignment) -> MultilinearPoly:
    """Substitute the fixed values of ``pa``. The result mentions only free variables."""
    fixed = pa.fixed
    if any(i >= p.n for i in fixed):
        raise IndexError("partial assignment fixes a variable out of range")
    if not fixed:
        return p
    out: dict[Key, float] = {}
    for k, c in p._terms.items():
        free = []
        for j in k:
            v = fixed.get(j)
            if v is None:
                free.append(j)
            elif v < 0:
                c = -c
        key = tuple(free)
        out[key] = out.get(key, 0) + c
    return MultilinearPoly._from_clean(p.n, out)


def level_mass(p: MultilinearPoly, lo: int, hi: int):
    """Sum of squared coefficients on monomials of size in ``[lo, hi]``."""
    if lo < 0 or hi < lo:
        raise ValueError("need 0 <= lo <= hi")
    return sum((c * c for k, c in p._terms.items() if lo <= len(k) <= hi), 0)


def fwht(a) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform, ``out[s] = sum_b (-1)^popcount(s & b) a[b]``."""
    a = np.array(a, copy=True)
    n = a.shape[0]
    if n & (n - 1):
        raise ValueError("length must be a power of two")
    h = 1
    while h < n:
        a = a.reshape(-1, 2, h)
        a = np.stack((a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]), axis=1)
        h *= 2
    return a.reshape(n)


def hypercube(r: int) -> np.ndarray:
    """All 2^r points of {-1,+1}^r as rows, ordered by the truth-table convention."""
    rows = np.arange(1 << r)[:, None]
    return (((rows >> np.arange(r)) & 1) * 2 - 1).astype(np.int8)


def from_truth_table(table, exact: bool = False) -> MultilinearPoly:
    """
    Fourier expansion of the function whose value on row ``b`` is ``table[b]``.

    With ``exact=True`` and integer table entries the coefficients are
    :class:`Fraction` objects.
    """
    vals = np.asarray(table)
    size = vals.shape[0]
    if vals.ndim != 1 or size == 0 or size & (size - 1):
        raise ValueError("truth table length must be a power of two")
    r = size.bit_length() - 1
    if r > MAX_TABLE_ARITY:
        raise ValueError(f"arity {r} exceeds {MAX_TABLE_ARITY}")
    if exact:
        w = fwht(vals.astype(object))
    else:
        w = fwht(vals.astype(np.float64))
    terms = {}
    for s in range(size):
        if w[s] == 0:
            continue
        key = tuple(t for t in range(r) if s >> t & 1)
        sign = -1 if len(key) % 2 else 1
        # chi_S(x) = (-1)^(|S| - popcount(s & b)) under the +1 <-> bit 1 convention
        terms[key] = sign * (Fraction(int(w[s]), size) if exact else w[s] / size)
    return MultilinearPoly._from_clean(r, terms)


def to_truth_table(p: MultilinearPoly) -> np.ndarray:
    """Values of ``p`` on all 2^n rows (n <= 20)."""
    if p.n > MAX_TABLE_ARITY:
        raise ValueError("too many variables for a dense table")
    return evaluate_many(p, hypercube(p.n))
