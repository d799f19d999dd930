import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from cspadv.csp import Predicate, and_, or_, xor
from cspadv.fourier import (
    MultilinearPoly,
    PartialAssignment,
    derivative,
    evaluate,
    evaluate_at_biases,
    evaluate_many,
    expectation,
    from_truth_table,
    hypercube,
    influence,
    level_mass,
    restrict,
    to_truth_table,
    variance,
)

from conftest import random_poly


def P(n, terms):
    return MultilinearPoly(n, terms)


class TestConstruction:
    def test_keys_are_canonical_and_merged(self):
        p = P(3, {(1, 0): 1.0, (0, 1): 0.5, (2,): 0.0})
        assert dict(p.terms) == {(0, 1): 1.5}

    def test_tiny_coefficients_dropped(self):
        assert len(P(2, {(0,): 1e-13, (1,): 1e-11})) == 1

    def test_out_of_range_key(self):
        with pytest.raises(ValueError):
            P(2, {(0, 2): 1.0})

    def test_degree(self):
        assert P(5, {(): 1, (0, 3, 4): 2}).degree == 3
        assert P(5, {}).degree == 0

    def test_arithmetic(self):
        a = P(3, {(0,): 1.0, (1, 2): 2.0})
        b = P(3, {(0,): -1.0, (): 0.5})
        assert (a + b) == P(3, {(1, 2): 2.0, (): 0.5})
        assert (2 * a - a) == a
        assert (a / 2).coefficient((2, 1)) == 1.0


class TestEvaluate:
    def test_monomial(self):
        assert evaluate(P(2, {(0, 1): 1}), [1, -1]) == -1

    def test_satisfied_xor_clause(self):
        assert evaluate(P(3, {(): 0.5, (0, 1, 2): 0.5}), [1, 1, 1]) == 1.0

    def test_or2_at_false_false(self):
        assert evaluate(or_(2).poly(), [-1, -1]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            evaluate(P(3, {(0,): 1}), [1, 1])

    def test_non_pm1_rejected(self):
        with pytest.raises(ValueError):
            evaluate(P(2, {(0,): 1}), [1, 0])

    def test_evaluate_many_matches(self, rng):
        p = random_poly(rng, 8, 3)
        X = hypercube(8)
        assert np.allclose(evaluate_many(p, X), [evaluate(p, x) for x in X])


class TestBiases:
    def test_independent_product(self):
        assert evaluate_at_biases(P(2, {(0, 1): 1}), [0.5, 0.5]) == pytest.approx(0.25)

    def test_unbiased_bit(self):
        assert evaluate_at_biases(P(3, {(0,): 1}), [0, 0, 0]) == 0

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            evaluate_at_biases(P(1, {(0,): 1}), [1.5])

    def test_agrees_with_evaluate_at_vertices(self, rng):
        p = random_poly(rng, 6, 3)
        for x in hypercube(6):
            assert evaluate_at_biases(p, x) == pytest.approx(evaluate(p, x), abs=1e-12)

    @pytest.mark.parametrize("j", range(4))
    def test_noise_operator_by_enumeration(self, rng, j):
        eta = math.cos(j * math.pi / 3) / 2
        n = 10
        g = random_poly(rng, n, 3)
        x_star = rng.choice([-1, 1], size=n)
        flips = hypercube(n)  # -1 means flipped
        keep = (flips + 1) // 2
        w = np.prod(np.where(keep == 1, (1 + eta) / 2, (1 - eta) / 2), axis=1)
        avg = float(w @ evaluate_many(g, flips * x_star))
        assert evaluate_at_biases(g, eta * x_star) == pytest.approx(avg, abs=1e-9)


class TestMoments:
    def test_parseval_example(self):
        p = P(3, {(): 0.5, (0,): 0.3, (1, 2): 0.4})
        assert expectation(p) == 0.5
        assert variance(p) == pytest.approx(0.25)
        assert influence(p, 2) == pytest.approx(0.16)

    def test_absent_variable(self):
        assert influence(P(4, {(0, 1): 1.0}), 3) == 0

    def test_influence_index_error(self):
        with pytest.raises(IndexError):
            influence(P(2, {}), 2)

    def test_influence_is_mean_square_derivative(self, rng):
        for _ in range(20):
            p = random_poly(rng, 9, 4)
            X = hypercube(9)
            for i in range(9):
                d = evaluate_many(derivative(p, i), X)
                assert influence(p, i) == pytest.approx(np.mean(d ** 2), abs=1e-9)

    def test_exact_mode_stays_rational(self):
        p = P(2, {(0,): Fraction(1, 3), (0, 1): Fraction(1, 6)})
        assert influence(p, 0) == Fraction(5, 36)


class TestDerivative:
    def test_drop_variable(self):
        assert derivative(P(3, {(0, 1, 2): 1}), 0) == P(3, {(1, 2): 1})

    def test_and2(self):
        d = derivative(and_(2).poly(), 0)
        assert d.allclose(P(2, {(): 0.25, (1,): 0.25}))
        assert sorted(set(np.round(to_truth_table(d), 12))) == [0.0, 0.5]

    def test_matches_definition(self, rng):
        p = random_poly(rng, 6, 3)
        X = hypercube(6)
        for i in range(6):
            plus, minus = X.copy(), X.copy()
            plus[:, i], minus[:, i] = 1, -1
            expected = (evaluate_many(p, plus) - evaluate_many(p, minus)) / 2
            assert np.allclose(evaluate_many(derivative(p, i), X), expected)

    def test_predicate_derivative_values(self):
        for table in product((0, 1), repeat=8):
            pred = Predicate(table)
            if not pred.depends_on_all():
                continue
            for i in range(3):
                vals = set(np.round(to_truth_table(derivative(pred.poly(), i)), 12))
                assert vals <= {-0.5, 0.0, 0.5} and len(vals) > 1


class TestRestrict:
    def test_substitution(self):
        p = P(3, {(0, 1): 1, (2,): 1})
        assert restrict(p, PartialAssignment({1: -1})) == P(3, {(0,): -1, (2,): 1})

    def test_identity(self, rng):
        p = random_poly(rng, 5, 2)
        assert restrict(p, PartialAssignment()) == p

    def test_consistency_exhaustive(self, rng):
        for _ in range(10):
            p = random_poly(rng, 10, 3)
            mask = rng.random(10) < 0.5
            vals = rng.choice([-1, 1], size=10)
            pa = PartialAssignment.from_mask(mask, vals)
            q = restrict(p, pa)
            assert q.variables() <= set(pa.free(10))
            for x in hypercube(10)[:: 7]:
                assert evaluate(q, x) == pytest.approx(evaluate(p, pa.merge(x, 10)), abs=1e-9)

    def test_bad_value(self):
        with pytest.raises(ValueError):
            PartialAssignment({0: 0})


class TestLevelMass:
    def test_single_level(self):
        p = P(5, {(0, 1, 2): 0.5})
        assert level_mass(p, 2, 4) == 0.25
        assert level_mass(p, 0, 1) == 0

    def test_variance_when_only_constant_below(self, rng):
        p = random_poly(rng, 6, 3)
        assert level_mass(p, 1, 6) == pytest.approx(variance(p))

    def test_bad_range(self):
        with pytest.raises(ValueError):
            level_mass(P(1, {}), 2, 1)


class TestTruthTable:
    def test_constant(self):
        assert from_truth_table([1, 1, 1, 1]) == P(2, {(): 1.0})

    def test_or2(self):
        assert from_truth_table(or_(2).table).allclose(P(2, {(): 0.75, (0,): 0.25, (1,): 0.25, (0, 1): -0.25}))

    def test_xor3(self):
        assert from_truth_table(xor(3).table, exact=True) == P(3, {(): Fraction(1, 2), (0, 1, 2): Fraction(1, 2)})

    def test_bad_length(self):
        with pytest.raises(ValueError):
            from_truth_table([0, 1, 1])

    def test_round_trip_and_parseval(self, rng):
        for r in range(1, 9):
            table = rng.integers(0, 2, size=1 << r)
            p = from_truth_table(table, exact=True)
            assert np.array_equal(to_truth_table(p), table)
            assert sum(c * c for c in p.terms.values()) == Fraction(int(table.sum()), 1 << r)
