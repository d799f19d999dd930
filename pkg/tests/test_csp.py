from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest

from cspadv.csp import (
    Instance,
    Predicate,
    and_,
    associated_polynomial,
    check_triangle_free,
    constant_true,
    degree,
    degrees,
    max_degree,
    mu,
    nae,
    or_,
    validate,
    value_fraction,
    xor,
)
from cspadv.fourier import evaluate, hypercube, influence, variance
from cspadv.gen import complete_graph_maxcut, random_kxor, triangle_free_random
from cspadv.oracle import brute_force_opt
from cspadv.textformat import FormatError, format_instance, parse_instance

from conftest import random_small_kxor


class TestPredicate:
    def test_convention(self):
        p = Predicate.from_function(2, lambda x: x[0] == 1 and x[1] == -1)
        assert p.table == (0, 1, 0, 0)
        assert p((1, -1)) == 1

    def test_hex_round_trip(self):
        for pred in (xor(3), or_(2), nae(3), and_(4)):
            assert Predicate.from_hex(pred.arity, pred.to_hex()) == pred

    def test_parity_sign(self):
        assert xor(3, -1).parity_sign() == -1
        assert or_(2).parity_sign() is None

    def test_bad_tables(self):
        with pytest.raises(ValueError):
            Predicate((0, 1, 1))
        with pytest.raises(ValueError):
            Predicate((0, 2))


class TestValue:
    def test_single_clause(self):
        inst = Instance.kxor(3, [(0, 1, 2)], [1])
        assert value_fraction(inst, [1, 1, 1]) == 1

    def test_length_error(self):
        with pytest.raises(ValueError):
            value_fraction(Instance.kxor(3, [(0, 1, 2)], [1]), [1, 1])

    def test_maxcut_k10(self):
        assert brute_force_opt(complete_graph_maxcut(10))[0] == Fraction(25, 45)

    def test_counts_batch(self, rng):
        inst = random_small_kxor(rng, 8, 3, 20)
        X = hypercube(8)
        assert list(inst.satisfied_counts(X)) == [inst.satisfied_count(x) for x in X]


class TestMu:
    def test_kxor_half(self, rng):
        assert mu(random_small_kxor(rng, 9, 3, 10)) == Fraction(1, 2)

    def test_nae(self):
        assert mu(Instance(3, [(nae(3), (0, 1, 2))])) == Fraction(3, 4)

    def test_constant(self):
        assert mu(Instance(2, [(constant_true(2), (0, 1))])) == 1


class TestAssociatedPolynomial:
    def test_single_3xor(self):
        p = associated_polynomial(Instance.kxor(3, [(0, 1, 2)], [1]), exact=True)
        assert dict(p.terms) == {(0, 1, 2): Fraction(1, 2)}

    def test_cancellation(self):
        inst = Instance(2, [(or_(2), (0, 1)), (Predicate(tuple(1 - v for v in or_(2).table)), (0, 1))])
        assert len(associated_polynomial(inst)) == 0

    def test_kxor_closed_form(self, rng):
        inst = random_small_kxor(rng, 10, 4, 15)
        p = associated_polynomial(inst, exact=True)
        for scope, b in zip(inst.scopes, inst.signs):
            assert p.coefficient(scope) == Fraction(int(b), 2 * inst.m)

    def test_reconstruction_exhaustive(self, rng):
        preds = [or_(2), and_(2), nae(3), xor(3), or_(3), Predicate.from_hex(3, "96")]
        for _ in range(5):
            cons = []
            for _ in range(8):
                pr = preds[rng.integers(len(preds))]
                cons.append((pr, tuple(rng.choice(10, size=pr.arity, replace=False).tolist())))
            inst = Instance(10, cons)
            P = associated_polynomial(inst, exact=True)
            base = mu(inst)
            for x in hypercube(10):
                assert float(value_fraction(inst, x) - base) == pytest.approx(evaluate(P, x), abs=1e-9)

    def test_reconstruction_random_pairs(self, rng):
        from cspadv.gen import triangle_free_random
        for s in range(20):
            inst = triangle_free_random(60, 3, 3, s)
            P = associated_polynomial(inst)
            for _ in range(50):
                x = rng.choice([-1, 1], size=60)
                assert float(value_fraction(inst, x) - mu(inst)) == pytest.approx(evaluate(P, x), abs=1e-9)

    @pytest.mark.parametrize("k", [2, 3, 5])
    def test_kxor_influence_and_variance(self, rng, k):
        inst = random_kxor(40, k, 4, int(rng.integers(1000)))
        P = associated_polynomial(inst, exact=True)
        m = inst.m
        for i in range(inst.n):
            assert influence(P, i) == Fraction(degree(inst, i), 4 * m * m)
        assert variance(P) == Fraction(1, 4 * m)


class TestDegrees:
    def test_single(self):
        inst = Instance.kxor(6, [(0, 1, 2)], [1])
        assert degree(inst, 0) == 1 and degree(inst, 5) == 0

    def test_complete_graph(self):
        assert set(degrees(complete_graph_maxcut(7))) == {6}

    def test_generator_cap(self):
        assert max_degree(random_kxor(100, 3, 6, 0)) <= 6


class TestTriangleFree:
    def test_overlap(self):
        r = check_triangle_free(Instance.kxor(4, [(0, 1, 2), (1, 2, 3)], [1, 1]))
        assert r.kind == "overlap" and set(r.witness) == {0, 1}

    def test_hyper_triangle(self):
        r = check_triangle_free(Instance.kxor(3, [(0, 1), (1, 2), (2, 0)], [1, 1, 1]))
        assert r.kind == "hyper_triangle" and sorted(r.witness) == [0, 1, 2]

    def test_disjoint_ok(self):
        assert check_triangle_free(Instance.kxor(6, [(0, 1, 2), (3, 4, 5)], [1, -1])).ok

    def test_star_is_ok(self):
        # three constraints through one variable pairwise intersect only there
        inst = Instance.kxor(7, [(0, 1, 2), (0, 3, 4), (0, 5, 6)], [1, 1, 1])
        assert check_triangle_free(inst).ok

    def test_planted_triangle_in_generated(self):
        for s in range(20):
            inst = triangle_free_random(200, 3, 3, s)
            assert check_triangle_free(inst).ok
            a, b = inst.scopes[0][:2], inst.scopes[1][:1]
            c = inst.scopes[2][:1]
            planted = Instance(inst.n, list(inst) + [(or_(2), (a[0], b[0])), (or_(2), (b[0], c[0])), (or_(2), (c[0], a[0]))])
            assert not check_triangle_free(planted).ok


class TestValidate:
    def test_repeated(self):
        rep = validate(Instance(3, [(or_(3), (0, 0, 1))]))
        assert any("repeated" in v for v in rep.violations)

    def test_insensitive(self):
        pred = Predicate.from_function(2, lambda x: x[0] == 1)
        rep = validate(Instance(2, [(pred, (0, 1))]))
        assert any("insensitive" in v for v in rep.violations)

    def test_kxor_negated_duplicate(self):
        rep = validate(Instance.kxor(3, [(0, 1, 2), (2, 1, 0)], [1, -1]))
        assert not rep.ok

    def test_bounds_and_arity(self):
        rep = validate(Instance(2, [(or_(2), (0, 5))]))
        assert any("out of range" in v for v in rep.violations)
        assert not validate(Instance(2, [(xor(1), (0,))]), min_arity=2).ok


class TestTextFormat:
    def test_round_trip_generators(self):
        for inst in (random_kxor(50, 3, 4, 1), triangle_free_random(80, 3, 2, 2), complete_graph_maxcut(5)):
            assert parse_instance(format_instance(inst, ["hello"])) == inst

    def test_errors(self):
        with pytest.raises(FormatError):
            parse_instance("x 3 0 1 2 +1\n")
        with pytest.raises(FormatError):
            parse_instance("p csp 3 2\nx 3 0 1 2 +1\n")
        with pytest.raises(FormatError):
            parse_instance("p csp 3 1\nx 3 0 1 2 0\n")
        with pytest.raises(FormatError):
            parse_instance("p csp 3 1\nq\n")

    def test_comments_and_generic(self):
        inst = parse_instance("# hi\np csp 2 1\nc 2 0 1 e\n")
        assert inst.constraint(0)[0] == or_(2)
